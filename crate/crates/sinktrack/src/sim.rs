//! Seeded generators for the benchmark motion models: constant velocity,
//! random walk, and constant velocity with additive noise.
//!
//! Randomness comes from the ChaCha8 stream cipher (`rand_chacha::ChaCha8Rng`
//! seeded through `SeedableRng::seed_from_u64`), with standard-normal draws
//! from `rand_distr::StandardNormal`. Draw order is fixed: per object the
//! initial x then y, then any per-object velocity draws (x then y), then
//! per frame and per object the displacement or noise draws (x then y).
//! Identical parameters and seed therefore reproduce a bit-identical
//! `FrameSequence`.
//!
//! Every sampled quantity is snapped to a `2^-20` grid. At that resolution
//! the kinematics stay exact in `f64`: frame differences, constant-velocity
//! extrapolations and second differences incur no rounding, so noiseless
//! tracks have acceleration cost exactly zero.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::frames::{FrameSequence, PointSet};

/// Which motion model a scenario runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimKind {
    ConstantVelocity,
    RandomWalk,
    ConstantVelocityNoisy,
}

/// How additive noise enters the noisy constant-velocity model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseModel {
    /// Each observed frame is the clean position plus an independent draw.
    #[default]
    Positional,
    /// Noise accumulates along the trajectory like a drift.
    Accumulated,
}

impl NoiseModel {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseModel::Positional => "positional",
            NoiseModel::Accumulated => "accumulated",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positional" => Some(NoiseModel::Positional),
            "accumulated" => Some(NoiseModel::Accumulated),
            _ => None,
        }
    }
}

/// Declarative description of one simulated dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SimScenario {
    pub kind: SimKind,
    pub n: usize,
    /// Speed multiplier (constant-velocity models).
    pub m: f64,
    /// Step or noise variance (random walk / noisy models).
    pub sigma2: f64,
    pub steps: usize,
    pub seed: u64,
    pub noise_model: NoiseModel,
}

impl SimScenario {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        if self.steps < 2 {
            return Err(Error::InvalidParameter("steps must be >= 2".into()));
        }
        if !(self.m >= 0.0 && self.m.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "m must be finite and >= 0, got {}",
                self.m
            )));
        }
        if !(self.sigma2 >= 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma2 must be finite and >= 0, got {}",
                self.sigma2
            )));
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<FrameSequence> {
        self.validate()?;
        match self.kind {
            SimKind::ConstantVelocity => gen_constant_velocity(self.n, self.m, self.steps, self.seed),
            SimKind::RandomWalk => gen_random_walk(self.n, self.sigma2, self.steps, self.seed),
            SimKind::ConstantVelocityNoisy => gen_constant_velocity_noisy_with(
                self.n,
                self.m,
                self.sigma2,
                self.steps,
                self.seed,
                self.noise_model,
            ),
        }
    }
}

/// SplitMix64 finalizer; decorrelates nearby seeds.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for replicate `r`: `splitmix64(base ^ r)`. Replicate streams
/// are independent and reproducible from the base seed alone.
pub fn child_seed(base: u64, replicate: u64) -> u64 {
    splitmix64(base ^ replicate)
}

const GRID: f64 = 1048576.0; // 2^20

#[inline]
fn snap(x: f64) -> f64 {
    (x * GRID).round() / GRID
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn validate_common(n: usize, steps: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    if steps < 2 {
        return Err(Error::InvalidParameter("steps must be >= 2".into()));
    }
    Ok(())
}

fn build_sequence(positions: Vec<Vec<[f64; 2]>>) -> Result<FrameSequence> {
    let frames = positions
        .into_iter()
        .enumerate()
        .map(|(t, pts)| PointSet::new(pts, t as i64))
        .collect::<Result<Vec<_>>>()?;
    FrameSequence::new(frames)
}

/// Clean constant-velocity trajectories and their velocities.
///
/// Initial coordinates are standard normal; each per-axis speed is `m` times
/// a standard-normal draw, clamped at zero from below so some objects rest
/// along an axis. Position at frame `t` is `initial + t * velocity`.
fn constant_velocity_paths(
    n: usize,
    m: f64,
    steps: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<Vec<[f64; 2]>>, Vec<[f64; 2]>) {
    let mut initial = Vec::with_capacity(n);
    let mut velocity = Vec::with_capacity(n);
    for _ in 0..n {
        let x = snap(normal(rng));
        let y = snap(normal(rng));
        let vx = snap((m * normal(rng)).max(0.0));
        let vy = snap((m * normal(rng)).max(0.0));
        initial.push([x, y]);
        velocity.push([vx, vy]);
    }
    let positions = (0..steps)
        .map(|t| {
            let t = t as f64;
            (0..n)
                .map(|i| {
                    [
                        initial[i][0] + t * velocity[i][0],
                        initial[i][1] + t * velocity[i][1],
                    ]
                })
                .collect()
        })
        .collect();
    (positions, velocity)
}

/// Objects moving at constant velocity without noise.
pub fn gen_constant_velocity(n: usize, m: f64, steps: usize, seed: u64) -> Result<FrameSequence> {
    validate_common(n, steps)?;
    if !(m >= 0.0 && m.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "m must be finite and >= 0, got {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (positions, _) = constant_velocity_paths(n, m, steps, &mut rng);
    build_sequence(positions)
}

/// Objects taking independent Gaussian steps with per-axis variance `sigma2`.
pub fn gen_random_walk(n: usize, sigma2: f64, steps: usize, seed: u64) -> Result<FrameSequence> {
    validate_common(n, steps)?;
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sigma2 must be finite and >= 0, got {sigma2}"
        )));
    }
    let sigma = sigma2.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current: Vec<[f64; 2]> = (0..n)
        .map(|_| [snap(normal(&mut rng)), snap(normal(&mut rng))])
        .collect();
    let mut positions = vec![current.clone()];
    for _ in 1..steps {
        for p in current.iter_mut() {
            p[0] += snap(sigma * normal(&mut rng));
            p[1] += snap(sigma * normal(&mut rng));
        }
        positions.push(current.clone());
    }
    build_sequence(positions)
}

/// Constant-velocity motion with positional observation noise.
pub fn gen_constant_velocity_noisy(
    n: usize,
    m: f64,
    sigma2: f64,
    steps: usize,
    seed: u64,
) -> Result<FrameSequence> {
    gen_constant_velocity_noisy_with(n, m, sigma2, steps, seed, NoiseModel::Positional)
}

/// Constant-velocity motion plus per-movement Gaussian noise under the chosen
/// noise model. Noise is drawn for every frame after the first (one draw per
/// axis per object per movement); with `sigma2 = 0` the output is bit-identical
/// to `gen_constant_velocity` at the same seed.
pub fn gen_constant_velocity_noisy_with(
    n: usize,
    m: f64,
    sigma2: f64,
    steps: usize,
    seed: u64,
    model: NoiseModel,
) -> Result<FrameSequence> {
    validate_common(n, steps)?;
    if !(m >= 0.0 && m.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "m must be finite and >= 0, got {m}"
        )));
    }
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sigma2 must be finite and >= 0, got {sigma2}"
        )));
    }
    let sigma = sigma2.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut positions, _) = constant_velocity_paths(n, m, steps, &mut rng);
    let mut cumulative = vec![[0.0_f64; 2]; n];
    for frame in positions.iter_mut().skip(1) {
        for (i, p) in frame.iter_mut().enumerate() {
            let ex = snap(sigma * normal(&mut rng));
            let ey = snap(sigma * normal(&mut rng));
            match model {
                NoiseModel::Positional => {
                    p[0] += ex;
                    p[1] += ey;
                }
                NoiseModel::Accumulated => {
                    cumulative[i][0] += ex;
                    cumulative[i][1] += ey;
                    p[0] += cumulative[i][0];
                    p[1] += cumulative[i][1];
                }
            }
        }
    }
    build_sequence(positions)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_speed_freezes_all_frames() {
        let seq = gen_constant_velocity(20, 0.0, 3, 42).unwrap();
        for t in 1..seq.len() {
            assert_eq!(seq.frame(t).positions(), seq.frame(0).positions());
        }
    }

    #[test]
    fn constant_velocity_differences_are_exact() {
        for seed in 0..20 {
            let seq = gen_constant_velocity(50, 1.7, 3, seed).unwrap();
            for i in 0..seq.n() {
                let p0 = seq.frame(0).get(i);
                let p1 = seq.frame(1).get(i);
                let p2 = seq.frame(2).get(i);
                assert_eq!(p2[0] - p1[0], p1[0] - p0[0]);
                assert_eq!(p2[1] - p1[1], p1[1] - p0[1]);
            }
        }
    }

    #[test]
    fn velocities_are_clamped_at_zero() {
        let seq = gen_constant_velocity(200, 2.0, 2, 7).unwrap();
        let mut rests = 0;
        for i in 0..seq.n() {
            let v = [
                seq.frame(1).get(i)[0] - seq.frame(0).get(i)[0],
                seq.frame(1).get(i)[1] - seq.frame(0).get(i)[1],
            ];
            assert!(v[0] >= 0.0 && v[1] >= 0.0);
            if v[0] == 0.0 || v[1] == 0.0 {
                rests += 1;
            }
        }
        // About 75% of objects rest along at least one axis.
        assert!(rests > 100, "only {rests} resting objects");
    }

    #[test]
    fn mean_clamped_speed_matches_half_normal_moment() {
        // E[max(Z, 0)] = 1 / sqrt(2 pi) = 0.3989...
        let m = 1.0;
        let seq = gen_constant_velocity(500_000, m, 2, 123).unwrap();
        let mut sum = 0.0;
        for i in 0..seq.n() {
            sum += seq.frame(1).get(i)[0] - seq.frame(0).get(i)[0];
            sum += seq.frame(1).get(i)[1] - seq.frame(0).get(i)[1];
        }
        let mean = sum / (2.0 * seq.n() as f64);
        let expect = m / (2.0 * std::f64::consts::PI).sqrt();
        assert!(
            (mean - expect).abs() < 3e-3,
            "mean {mean} vs expected {expect}"
        );
    }

    #[test]
    fn zero_variance_walk_freezes_all_frames() {
        let seq = gen_random_walk(20, 0.0, 4, 9).unwrap();
        for t in 1..seq.len() {
            assert_eq!(seq.frame(t).positions(), seq.frame(0).positions());
        }
    }

    #[test]
    fn walk_step_variance_matches_sigma2() {
        let sigma2 = 0.7;
        let seq = gen_random_walk(500_000, sigma2, 2, 321).unwrap();
        let n = seq.n();
        let mut steps = Vec::with_capacity(2 * n);
        for i in 0..n {
            steps.push(seq.frame(1).get(i)[0] - seq.frame(0).get(i)[0]);
            steps.push(seq.frame(1).get(i)[1] - seq.frame(0).get(i)[1]);
        }
        let mean: f64 = steps.iter().sum::<f64>() / steps.len() as f64;
        let var: f64 =
            steps.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (steps.len() - 1) as f64;
        assert!(
            (var - sigma2).abs() < 0.01 * sigma2,
            "variance {var} vs {sigma2}"
        );
    }

    #[test]
    fn determinism_and_seed_sensitivity() {
        let a = gen_random_walk(30, 0.5, 3, 5).unwrap();
        let b = gen_random_walk(30, 0.5, 3, 5).unwrap();
        let c = gen_random_walk(30, 0.5, 3, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);

        let d = gen_constant_velocity_noisy(30, 0.5, 0.1, 3, 11).unwrap();
        let e = gen_constant_velocity_noisy(30, 0.5, 0.1, 3, 11).unwrap();
        assert_eq!(d, e);
    }

    #[test]
    fn zero_noise_matches_clean_generator_bitwise() {
        let clean = gen_constant_velocity(40, 0.5, 3, 77).unwrap();
        let noisy = gen_constant_velocity_noisy(40, 0.5, 0.0, 3, 77).unwrap();
        assert_eq!(clean, noisy);
    }

    /// Variance of the per-axis second difference under each noise model.
    /// Positional noise on frames 1 and 2 enters with coefficients -2 and 1:
    /// variance (4 + 1) sigma^2. Accumulated noise cancels the shared term:
    /// variance 2 sigma^2.
    #[test]
    fn second_difference_variance_identifies_noise_model() {
        let sigma2 = 0.4;
        for (model, coeff) in [(NoiseModel::Positional, 5.0), (NoiseModel::Accumulated, 2.0)] {
            let seq =
                gen_constant_velocity_noisy_with(100_000, 0.5, sigma2, 3, 202, model).unwrap();
            let n = seq.n();
            let mut samples = Vec::with_capacity(2 * n);
            for i in 0..n {
                let p0 = seq.frame(0).get(i);
                let p1 = seq.frame(1).get(i);
                let p2 = seq.frame(2).get(i);
                samples.push(p2[0] - 2.0 * p1[0] + p0[0]);
                samples.push(p2[1] - 2.0 * p1[1] + p0[1]);
            }
            let mean: f64 = samples.iter().sum::<f64>() / samples.len() as f64;
            let var: f64 = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>()
                / (samples.len() - 1) as f64;
            let expect = coeff * sigma2;
            assert!(
                (var - expect).abs() < 0.03 * expect,
                "{model:?}: variance {var} vs {expect}"
            );
        }
    }

    #[test]
    fn noiseless_tracks_have_exactly_zero_acceleration() {
        let seq = gen_constant_velocity(30, 2.0, 3, 55).unwrap();
        let cost =
            crate::frames::acceleration_cost(seq.frame(0), seq.frame(1), seq.frame(2)).unwrap();
        for i in 0..seq.n() {
            assert_eq!(cost.get(i, i, i), 0.0);
        }
    }

    #[test]
    fn child_seeds_differ_across_replicates() {
        let seeds: Vec<u64> = (0..100).map(|r| child_seed(0, r)).collect();
        let mut unique = seeds.clone();
        unique.sort_unstable();
        unique.dedup();
        assert_eq!(unique.len(), seeds.len());
        assert_eq!(child_seed(42, 3), child_seed(42, 3));
        assert_ne!(child_seed(42, 3), child_seed(43, 3));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(gen_constant_velocity(0, 0.5, 3, 0).is_err());
        assert!(gen_constant_velocity(5, -1.0, 3, 0).is_err());
        assert!(gen_constant_velocity(5, 0.5, 1, 0).is_err());
        assert!(gen_random_walk(5, -0.1, 3, 0).is_err());
        assert!(gen_constant_velocity_noisy(5, 0.5, f64::NAN, 3, 0).is_err());
    }

    #[test]
    fn scenario_dispatch_matches_direct_calls() {
        let scenario = SimScenario {
            kind: SimKind::RandomWalk,
            n: 10,
            m: 0.0,
            sigma2: 0.3,
            steps: 3,
            seed: 14,
            noise_model: NoiseModel::default(),
        };
        assert_eq!(
            scenario.generate().unwrap(),
            gen_random_walk(10, 0.3, 3, 14).unwrap()
        );
    }
}
