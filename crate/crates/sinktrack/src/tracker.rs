//! Tracking pipelines over two or three frames and the diagonal performance
//! index used to score them.
//!
//! Every pipeline produces a `d x d` association matrix whose rows are frame-t
//! objects; ground truth is the identity, so a row counts as correct when its
//! diagonal entry is the strict row maximum. Pipelines enable log-domain
//! updates on their own when the kernel scale demands it, since callers cannot
//! know the cost magnitudes before the frames exist.

use std::time::{Duration, Instant};

use crate::error::Result;
use crate::frames::{acceleration_cost, speed_cost, PointSet};
use crate::mass::MassVector;
use crate::matrix::SquareMatrix;
use crate::sinkhorn::{sinkhorn_plan, SolverOptions, STABILIZATION_THRESHOLD};
use crate::sinkhorn3::{compress_ij, compress_ik, sinkhorn3_plan};

/// Which pipeline produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Nearest-neighbor style transport on frame-to-frame distances.
    Speed,
    /// 3-marginal transport on the velocity-change tensor.
    Accel3d,
    /// Two-stage baseline: associate t -> t+1, extrapolate, associate with t+2.
    Accel2d,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Speed, Method::Accel3d, Method::Accel2d];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Speed => "speed",
            Method::Accel3d => "accel3d",
            Method::Accel2d => "accel2d",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s.trim().to_ascii_lowercase().as_str() {
            "speed" => Some(Method::Speed),
            "accel3d" => Some(Method::Accel3d),
            "accel2d" => Some(Method::Accel2d),
            _ => None,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which pair the compressed 3-marginal association describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputAxis {
    /// t -> t+1 association (`sum_k p_ijk`).
    IJ,
    /// t -> t+2 association (`sum_j p_ijk`).
    IK,
}

/// How the two-stage baseline associates predictions with the last frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage3Assoc {
    /// A second entropic solve over the prediction-to-frame distances.
    Sinkhorn,
    /// Greedy nearest neighbor, encoded as a one-hot association.
    NearestNeighbor,
}

/// One tracking run: the association matrix, its row-argmax assignment, the
/// diagonal performance index and solver diagnostics.
#[derive(Debug, Clone)]
pub struct TrackingResult {
    pub association: SquareMatrix,
    pub assignment: Vec<usize>,
    pub performance_index: f64,
    pub method: Method,
    pub iterations: usize,
    pub converged: bool,
    pub runtime: Duration,
}

/// Fraction of rows whose diagonal entry strictly exceeds every other entry
/// in the row. Ties count as failures.
pub fn performance_index(association: &SquareMatrix) -> f64 {
    let d = association.d();
    let mut correct = 0;
    for i in 0..d {
        let row = association.row(i);
        let diag = row[i];
        if row
            .iter()
            .enumerate()
            .all(|(j, &v)| j == i || diag > v)
        {
            correct += 1;
        }
    }
    correct as f64 / d as f64
}

/// Flips on log-domain updates when the kernel scale exceeds the safe range.
fn auto_stabilize(opts: &SolverOptions, max_cost: f64) -> SolverOptions {
    let mut opts = *opts;
    if opts.lambda * max_cost > STABILIZATION_THRESHOLD {
        opts.stabilized = true;
    }
    opts
}

/// Entropic nearest-neighbor tracking between two frames.
pub fn track_speed(a: &PointSet, b: &PointSet, opts: &SolverOptions) -> Result<TrackingResult> {
    let start = Instant::now();
    let cost = speed_cost(a, b)?;
    let uniform = MassVector::uniform(cost.d());
    let solve_opts = auto_stabilize(opts, cost.max_entry());
    let plan = sinkhorn_plan(&cost, &uniform, &uniform, &solve_opts)?;
    let association = plan.entries;
    Ok(TrackingResult {
        assignment: association.row_argmax(),
        performance_index: performance_index(&association),
        association,
        method: Method::Speed,
        iterations: plan.iterations,
        converged: plan.converged,
        runtime: start.elapsed(),
    })
}

/// Constant-velocity tracking through a 3-marginal solve on the velocity
/// change tensor; `axis` picks which compressed pair the result scores.
pub fn track_accel_3d(
    a: &PointSet,
    b: &PointSet,
    c: &PointSet,
    opts: &SolverOptions,
    axis: OutputAxis,
) -> Result<TrackingResult> {
    let start = Instant::now();
    let cost = acceleration_cost(a, b, c)?;
    let uniform = MassVector::uniform(cost.d());
    let solve_opts = auto_stabilize(opts, cost.max_entry());
    let tensor = sinkhorn3_plan(&cost, &uniform, &uniform, &uniform, &solve_opts)?;
    let association = match axis {
        OutputAxis::IJ => compress_ij(&tensor),
        OutputAxis::IK => compress_ik(&tensor),
    };
    Ok(TrackingResult {
        assignment: association.row_argmax(),
        performance_index: performance_index(&association),
        association,
        method: Method::Accel3d,
        iterations: tensor.iterations,
        converged: tensor.converged,
        runtime: start.elapsed(),
    })
}

/// Two-stage constant-velocity baseline scoring the t -> t+2 association,
/// with an entropic third stage.
pub fn track_accel_2d(
    a: &PointSet,
    b: &PointSet,
    c: &PointSet,
    opts: &SolverOptions,
) -> Result<TrackingResult> {
    track_accel_2d_with(a, b, c, opts, Stage3Assoc::Sinkhorn)
}

/// Two-stage baseline with a selectable third stage: first associate
/// t -> t+1 by speed cost, then extrapolate each object to `q_i = 2 b_sigma(i) - a_i`
/// and associate the predictions with frame t+2.
pub fn track_accel_2d_with(
    a: &PointSet,
    b: &PointSet,
    c: &PointSet,
    opts: &SolverOptions,
    stage3: Stage3Assoc,
) -> Result<TrackingResult> {
    let start = Instant::now();
    let first = track_speed(a, b, opts)?;
    let sigma = &first.assignment;

    let predicted: Vec<[f64; 2]> = (0..a.len())
        .map(|i| {
            let p = a.get(i);
            let q = b.get(sigma[i]);
            [2.0 * q[0] - p[0], 2.0 * q[1] - p[1]]
        })
        .collect();
    let predictions = PointSet::new(predicted, a.frame_index() + 2)?;

    let cost = speed_cost(&predictions, c)?;
    let d = cost.d();
    let (association, iterations, converged) = match stage3 {
        Stage3Assoc::Sinkhorn => {
            let uniform = MassVector::uniform(d);
            let solve_opts = auto_stabilize(opts, cost.max_entry());
            let plan = sinkhorn_plan(&cost, &uniform, &uniform, &solve_opts)?;
            (
                plan.entries,
                first.iterations + plan.iterations,
                first.converged && plan.converged,
            )
        }
        Stage3Assoc::NearestNeighbor => {
            let mut one_hot = SquareMatrix::zeros(d);
            for i in 0..d {
                let mut best = 0;
                for k in 1..d {
                    if cost.get(i, k) < cost.get(i, best) {
                        best = k;
                    }
                }
                one_hot.set(i, best, 1.0 / d as f64);
            }
            (one_hot, first.iterations, first.converged)
        }
    };

    Ok(TrackingResult {
        assignment: association.row_argmax(),
        performance_index: performance_index(&association),
        association,
        method: Method::Accel2d,
        iterations,
        converged,
        runtime: start.elapsed(),
    })
}
