//! Entropic transport over three marginals: the coupling is a `d^3` tensor
//! whose three axis-marginals are prescribed, and the optimum has the scaled
//! form `P_ijk = u_i * v_j * w_k * exp(-lambda * m_ijk)`.
//!
//! One iteration is a full cycle of marginal projections (axis 0, then 1,
//! then 2). Convergence is judged on the summed L1 residual over all three
//! marginals. The stabilized mode follows the same absorption scheme as the
//! 2-marginal solver: plain updates on a potential-absorbed kernel, with a
//! log-sum-exp recovery cycle for slices that flush to zero.
//!
//! Reductions are parallelized over tensor axes with a fixed per-element
//! order and ordered chunk folds, so repeated solves are bit-stable
//! regardless of thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mass::MassVector;
use crate::matrix::SquareMatrix;
use crate::sinkhorn::{
    absorb, exp_flushed, logsumexp_by, needs_absorb, SolverOptions, DEGENERATE_DEN,
    RESIDUAL_MARGIN,
};
use crate::tensor::{CostTensor3, Tensor3, TransportTensor3};

/// Below this side length the solver runs single-threaded; tiny tensors are
/// dominated by fork/join overhead.
const PARALLEL_MIN_DIM: usize = 32;

/// Residual sweeps over large tensors run every this many cycles.
const RESIDUAL_CHECK_STRIDE: usize = 4;

fn check_dims3(
    cost: &CostTensor3,
    r: &MassVector,
    c: &MassVector,
    s: &MassVector,
) -> Result<usize> {
    let d = cost.d();
    for (name, len) in [
        ("axis-0 marginal vs cost tensor", r.len()),
        ("axis-1 marginal vs cost tensor", c.len()),
        ("axis-2 marginal vs cost tensor", s.len()),
    ] {
        if len != d {
            return Err(Error::DimensionMismatch {
                context: name,
                expected: d,
                found: len,
            });
        }
    }
    Ok(d)
}

/// Solves the 3-marginal entropic transport problem by cyclic scaling.
pub fn sinkhorn3_plan(
    cost: &CostTensor3,
    r: &MassVector,
    c: &MassVector,
    s: &MassVector,
    opts: &SolverOptions,
) -> Result<TransportTensor3> {
    let d = check_dims3(cost, r, c, s)?;
    opts.validate()?;
    opts.check_kernel_scale(cost.max_entry())?;

    if d == 1 {
        let mut entries = Tensor3::zeros(1)?;
        entries.set(0, 0, 0, 1.0);
        return Ok(TransportTensor3 {
            entries,
            iterations: 1,
            converged: true,
            marginal_residual: 0.0,
        });
    }

    Solver3::new(cost, r, c, s, opts)?.run()
}

/// Marginalizes a coupling tensor over its last axis: `p'_ij = sum_k p_ijk`.
pub fn compress_ij(plan: &TransportTensor3) -> SquareMatrix {
    plan.entries.marginalize(2)
}

/// Marginalizes a coupling tensor over its middle axis: `p'_ik = sum_j p_ijk`.
pub fn compress_ik(plan: &TransportTensor3) -> SquareMatrix {
    plan.entries.marginalize(1)
}

struct Solver3<'a> {
    d: usize,
    plane: usize,
    serial: bool,
    stabilized: bool,
    scale: f64,
    opts: &'a SolverOptions,
    targets: [&'a MassVector; 3],
    log_targets: [Vec<f64>; 3],
    /// `-lambda * m`, kept for rebuilds and rescue cycles (stabilized mode).
    logk: Vec<f64>,
    /// Materialized `exp(logk + alpha_i + beta_j + gamma_k)`.
    kernel: Vec<f64>,
    potentials: [Vec<f64>; 3],
    scalings: [Vec<f64>; 3],
}

impl<'a> Solver3<'a> {
    fn new(
        cost: &CostTensor3,
        r: &'a MassVector,
        c: &'a MassVector,
        s: &'a MassVector,
        opts: &'a SolverOptions,
    ) -> Result<Self> {
        let d = cost.d();
        let serial = d < PARALLEL_MIN_DIM;
        let lambda = opts.lambda;
        let map = |m: &f64| -lambda * m;
        let logk: Vec<f64> = if serial {
            cost.as_tensor().data().iter().map(map).collect()
        } else {
            cost.as_tensor().data().par_iter().map(map).collect()
        };
        let log_of = |m: &MassVector| m.weights().iter().map(|&x| x.ln()).collect::<Vec<_>>();
        let mut solver = Self {
            d,
            plane: d * d,
            serial,
            stabilized: opts.stabilized,
            scale: lambda * cost.max_entry(),
            opts,
            targets: [r, c, s],
            log_targets: [log_of(r), log_of(c), log_of(s)],
            kernel: Vec::new(),
            logk,
            potentials: [vec![0.0; d], vec![0.0; d], vec![0.0; d]],
            scalings: [vec![1.0; d], vec![1.0; d], vec![1.0; d]],
        };
        solver.rebuild_kernel();
        Ok(solver)
    }

    fn rebuild_kernel(&mut self) {
        let d = self.d;
        let plane = self.plane;
        let [alpha, beta, gamma] = &self.potentials;
        let logk = &self.logk;
        let mut kernel = std::mem::take(&mut self.kernel);
        kernel.resize(d * plane, 0.0);
        let fill = |i: usize, out: &mut [f64]| {
            for j in 0..d {
                let ab = alpha[i] + beta[j];
                for k in 0..d {
                    out[j * d + k] = exp_flushed(logk[(i * d + j) * d + k] + ab + gamma[k]);
                }
            }
        };
        if self.serial {
            for (i, out) in kernel.chunks_mut(plane).enumerate() {
                fill(i, out);
            }
        } else {
            kernel
                .par_chunks_mut(plane)
                .enumerate()
                .for_each(|(i, out)| fill(i, out));
        }
        self.kernel = kernel;
    }

    fn absorb_all(&mut self) {
        for axis in 0..3 {
            absorb(&mut self.potentials[axis], &mut self.scalings[axis]);
        }
        self.rebuild_kernel();
    }

    /// One full log-sum-exp projection cycle on the potentials; scalings are
    /// folded in first. Always safe, used to escape flushed-to-zero slices.
    fn rescue(&mut self) {
        for axis in 0..3 {
            absorb(&mut self.potentials[axis], &mut self.scalings[axis]);
        }
        for axis in 0..3 {
            let lses = self.axis_lse(axis);
            for (x, lse) in lses.into_iter().enumerate() {
                self.potentials[axis][x] = self.log_targets[axis][x] - lse;
            }
        }
        self.rebuild_kernel();
    }

    /// Per-slice log-sum-exp of `logk` plus the two potentials of the other
    /// axes (the updated axis's own potential is excluded).
    fn axis_lse(&self, axis: usize) -> Vec<f64> {
        let d = self.d;
        let plane = self.plane;
        let logk = &self.logk;
        let [alpha, beta, gamma] = &self.potentials;
        let body = move |x: usize| -> f64 {
            match axis {
                0 => logsumexp_by(plane, |jk| {
                    logk[x * plane + jk] + beta[jk / d] + gamma[jk % d]
                }),
                1 => logsumexp_by(plane, |ik| {
                    let (i, k) = (ik / d, ik % d);
                    logk[(i * d + x) * d + k] + alpha[i] + gamma[k]
                }),
                _ => logsumexp_by(plane, |ij| {
                    let (i, j) = (ij / d, ij % d);
                    logk[(i * d + j) * d + x] + alpha[i] + beta[j]
                }),
            }
        };
        if self.serial {
            (0..d).map(body).collect()
        } else {
            (0..d).into_par_iter().map(body).collect()
        }
    }

    fn run(mut self) -> Result<TransportTensor3> {
        let d = self.d;
        let mut iterations = 0;
        let mut converged = false;
        let mut residual = f64::INFINITY;

        'outer: for iter in 1..=self.opts.max_iterations {
            iterations = iter;

            for axis in 0..3 {
                let dens = self.axis_denominators(axis);
                let target = self.targets[axis];
                let mut anomaly = false;
                for x in 0..d {
                    if (dens[x].is_nan() || dens[x] <= DEGENERATE_DEN) && target[x] > 0.0 {
                        anomaly = true;
                        break;
                    }
                }
                if !anomaly {
                    let scaling = &mut self.scalings[axis];
                    for x in 0..d {
                        let s = if target[x] == 0.0 { 0.0 } else { target[x] / dens[x] };
                        if !s.is_finite() {
                            anomaly = true;
                            break;
                        }
                        scaling[x] = s;
                    }
                }
                if anomaly {
                    if !self.stabilized {
                        return Err(Error::NeedsStabilization { scale: self.scale });
                    }
                    self.rescue();
                    continue 'outer;
                }
                if self.stabilized && needs_absorb(&self.scalings[axis]) {
                    self.absorb_all();
                    continue 'outer;
                }
            }

            // Large tensors amortize the residual sweep over a few cycles;
            // the final cycle always measures, so the reported residual and
            // flag describe the returned coupling.
            let check = self.serial
                || iter % RESIDUAL_CHECK_STRIDE == 0
                || iter == self.opts.max_iterations;
            if check {
                let marginals = self.current_marginals();
                residual = residual_l1(&marginals, self.targets);
                if residual <= self.opts.tolerance * RESIDUAL_MARGIN {
                    converged = true;
                    break;
                }
            }
        }

        if !converged {
            // A rescue or absorb may have ended the last cycle early; measure
            // the coupling actually being returned.
            let marginals = self.current_marginals();
            residual = residual_l1(&marginals, self.targets);
        }
        let entries = self.materialize()?;
        Ok(TransportTensor3 {
            entries,
            iterations,
            converged,
            marginal_residual: residual,
        })
    }

    /// `sum over the other two axes of kernel * scalings` for one axis.
    /// Every variant sweeps the tensor linearly: per slice of the leading
    /// axis, row dot products against `w` (axes 0 and 1) or row-wise
    /// accumulation into a local vector (axis 2), folded in slice order.
    fn axis_denominators(&self, axis: usize) -> Vec<f64> {
        let d = self.d;
        let plane = self.plane;
        let kernel = &self.kernel;
        let [u, v, w] = &self.scalings;
        match axis {
            0 => {
                let body = |i: usize| -> f64 {
                    let slice = &kernel[i * plane..(i + 1) * plane];
                    let mut total = 0.0;
                    for j in 0..d {
                        total += v[j] * dot(&slice[j * d..(j + 1) * d], w);
                    }
                    total
                };
                if self.serial {
                    (0..d).map(body).collect()
                } else {
                    (0..d).into_par_iter().map(body).collect()
                }
            }
            1 => {
                let chunk = |i: usize| -> Vec<f64> {
                    let slice = &kernel[i * plane..(i + 1) * plane];
                    (0..d)
                        .map(|j| u[i] * dot(&slice[j * d..(j + 1) * d], w))
                        .collect()
                };
                self.fold_chunks(d, chunk)
            }
            _ => {
                let chunk = |i: usize| -> Vec<f64> {
                    let mut acc = vec![0.0; d];
                    let slice = &kernel[i * plane..(i + 1) * plane];
                    for j in 0..d {
                        let uv = u[i] * v[j];
                        axpy(&mut acc, uv, &slice[j * d..(j + 1) * d]);
                    }
                    acc
                };
                self.fold_chunks(d, chunk)
            }
        }
    }

    /// Runs per-slice chunks (in parallel when worthwhile) and folds the
    /// partial vectors in slice order, so sums are schedule-independent.
    fn fold_chunks(&self, d: usize, chunk: impl Fn(usize) -> Vec<f64> + Sync + Send) -> Vec<f64> {
        let partials: Vec<Vec<f64>> = if self.serial {
            (0..d).map(chunk).collect()
        } else {
            (0..d).into_par_iter().map(chunk).collect()
        };
        let mut out = vec![0.0; d];
        for p in partials {
            for (o, x) in out.iter_mut().zip(p) {
                *o += x;
            }
        }
        out
    }

    /// All three axis-marginals of the current scaled coupling in one sweep.
    fn current_marginals(&self) -> [Vec<f64>; 3] {
        let d = self.d;
        let plane = self.plane;
        let kernel = &self.kernel;
        let [u, v, w] = &self.scalings;
        let chunk = |i: usize| -> (f64, Vec<f64>, Vec<f64>) {
            let mut m1 = vec![0.0; d];
            let mut m2 = vec![0.0; d];
            let slice = &kernel[i * plane..(i + 1) * plane];
            for j in 0..d {
                let uv = u[i] * v[j];
                let row = &slice[j * d..(j + 1) * d];
                let mut row_total = 0.0;
                for ((&kv, &wk), acc) in row.iter().zip(w.iter()).zip(m2.iter_mut()) {
                    let p = uv * wk * kv;
                    row_total += p;
                    *acc += p;
                }
                m1[j] = row_total;
            }
            let m0 = m1.iter().sum();
            (m0, m1, m2)
        };
        let partials: Vec<(f64, Vec<f64>, Vec<f64>)> = if self.serial {
            (0..d).map(chunk).collect()
        } else {
            (0..d).into_par_iter().map(chunk).collect()
        };
        let mut m0 = vec![0.0; d];
        let mut m1 = vec![0.0; d];
        let mut m2 = vec![0.0; d];
        for (i, (p0, p1, p2)) in partials.into_iter().enumerate() {
            m0[i] = p0;
            for x in 0..d {
                m1[x] += p1[x];
                m2[x] += p2[x];
            }
        }
        [m0, m1, m2]
    }

    fn materialize(self) -> Result<Tensor3> {
        let d = self.d;
        let plane = self.plane;
        let kernel = &self.kernel;
        let [u, v, w] = &self.scalings;
        let mut entries = Tensor3::zeros(d)?;
        let fill = |i: usize, out: &mut [f64]| {
            let slice = &kernel[i * plane..(i + 1) * plane];
            for j in 0..d {
                let uv = u[i] * v[j];
                for k in 0..d {
                    out[j * d + k] = uv * w[k] * slice[j * d + k];
                }
            }
        };
        {
            let data = entries.data_mut();
            if self.serial {
                for (i, out) in data.chunks_mut(plane).enumerate() {
                    fill(i, out);
                }
            } else {
                data.par_chunks_mut(plane)
                    .enumerate()
                    .for_each(|(i, out)| fill(i, out));
            }
        }
        if !self.stabilized && entries.data().iter().any(|p| !p.is_finite()) {
            return Err(Error::NeedsStabilization { scale: self.scale });
        }
        Ok(entries)
    }
}

/// Dot product with four independent accumulators (fixed order, so results
/// are reproducible while the chains still pipeline).
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0_f64; 4];
    let quads = n / 4;
    for q in 0..quads {
        let i = 4 * q;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * quads..n {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `acc += scale * row`, element-wise.
#[inline]
fn axpy(acc: &mut [f64], scale: f64, row: &[f64]) {
    for (a, &x) in acc.iter_mut().zip(row) {
        *a += scale * x;
    }
}

fn residual_l1(marginals: &[Vec<f64>; 3], targets: [&MassVector; 3]) -> f64 {
    marginals
        .iter()
        .zip(targets)
        .map(|(m, t)| {
            m.iter()
                .zip(t.weights())
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exact_triple_oracle;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn solve_uniform(cost: &CostTensor3, opts: &SolverOptions) -> TransportTensor3 {
        let u = MassVector::uniform(cost.d());
        sinkhorn3_plan(cost, &u, &u, &u, opts).unwrap()
    }

    #[test]
    fn single_cell_converges_in_one_pass() {
        let cost = CostTensor3::from_fn(1, |_, _, _| 2.0).unwrap();
        let plan = solve_uniform(&cost, &SolverOptions::default());
        assert!(plan.converged);
        assert_eq!(plan.iterations, 1);
        assert_eq!(plan.entries.get(0, 0, 0), 1.0);
    }

    #[test]
    fn constant_cost_gives_uniform_tensor() {
        let d = 3;
        let cost = CostTensor3::from_fn(d, |_, _, _| 1.5).unwrap();
        let plan = solve_uniform(&cost, &SolverOptions::with_lambda(10.0));
        assert!(plan.converged);
        let expect = 1.0 / (d * d * d) as f64;
        for &p in plan.entries.data() {
            assert!((p - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn converged_tensor_satisfies_all_marginals() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for stabilized in [false, true] {
            let cost = CostTensor3::from_fn(4, |_, _, _| rng.random::<f64>()).unwrap();
            let u = MassVector::uniform(4);
            let opts = SolverOptions {
                stabilized,
                ..SolverOptions::with_lambda(60.0)
            };
            let plan = sinkhorn3_plan(&cost, &u, &u, &u, &opts).unwrap();
            assert!(plan.converged);
            let marginals = plan.entries.axis_marginals();
            let res = residual_l1(&marginals, [&u, &u, &u]);
            assert!(res <= opts.tolerance, "residual {res}");
            assert!((plan.entries.sum() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn compress_examples() {
        // uniform tensor -> uniform matrix
        let d = 3;
        let uniform = TransportTensor3 {
            entries: Tensor3::from_fn(d, |_, _, _| 1.0 / 27.0).unwrap(),
            iterations: 0,
            converged: true,
            marginal_residual: 0.0,
        };
        let ij = compress_ij(&uniform);
        let ik = compress_ik(&uniform);
        for i in 0..d {
            for x in 0..d {
                assert!((ij.get(i, x) - 1.0 / 9.0).abs() < 1e-15);
                assert!((ik.get(i, x) - 1.0 / 9.0).abs() < 1e-15);
            }
        }

        // single atom at (0, 1, 2)
        let mut atom = Tensor3::zeros(3).unwrap();
        atom.set(0, 1, 2, 1.0);
        let atom = TransportTensor3 {
            entries: atom,
            iterations: 0,
            converged: true,
            marginal_residual: 0.0,
        };
        assert_eq!(compress_ij(&atom).get(0, 1), 1.0);
        assert_eq!(compress_ik(&atom).get(0, 2), 1.0);
    }

    #[test]
    fn compressions_preserve_mass_and_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cost = CostTensor3::from_fn(5, |_, _, _| rng.random::<f64>()).unwrap();
        let plan = solve_uniform(&cost, &SolverOptions::with_lambda(40.0));
        let ij = compress_ij(&plan);
        let ik = compress_ik(&plan);
        let total = plan.entries.sum();
        assert!((ij.sum() - total).abs() < 1e-12);
        assert!((ik.sum() - total).abs() < 1e-12);
        // Both compressions share the axis-0 marginal.
        let rows_ij = ij.row_sums();
        let rows_ik = ik.row_sums();
        for i in 0..5 {
            assert!((rows_ij[i] - rows_ik[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_constant_velocity_triple_dominates_diagonal() {
        // Three tracks at constant velocity: m_iii = 0, everything else > 0.
        let starts = [[0.0, 0.0], [5.0, 0.0], [0.0, 5.0]];
        let vels = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let pos = |i: usize, t: f64| {
            [
                starts[i][0] + t * vels[i][0],
                starts[i][1] + t * vels[i][1],
            ]
        };
        let cost = CostTensor3::from_fn(3, |i, j, k| {
            let a = pos(i, 0.0);
            let b = pos(j, 1.0);
            let c = pos(k, 2.0);
            let ax = c[0] - 2.0 * b[0] + a[0];
            let ay = c[1] - 2.0 * b[1] + a[1];
            (ax * ax + ay * ay).sqrt()
        })
        .unwrap();
        for i in 0..3 {
            assert_eq!(cost.get(i, i, i), 0.0);
        }

        let (assignment, value) = exact_triple_oracle(&cost).unwrap();
        assert_eq!(assignment.first, vec![0, 1, 2]);
        assert_eq!(assignment.second, vec![0, 1, 2]);
        assert_eq!(value, 0.0);

        let plan = solve_uniform(&cost, &SolverOptions::with_lambda(100.0).stabilized());
        assert!(plan.converged);
        let compressed = compress_ij(&plan);
        for i in 0..3 {
            for j in 0..3 {
                if j != i {
                    assert!(
                        compressed.get(i, i) > compressed.get(i, j),
                        "row {i} not diagonal-dominant"
                    );
                }
            }
        }
    }

    #[test]
    fn stabilized_matches_plain_mode() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for d in [2, 4, 6] {
            let cost = CostTensor3::from_fn(d, |_, _, _| rng.random::<f64>()).unwrap();
            let opts = SolverOptions::with_lambda(30.0);
            let plain = solve_uniform(&cost, &opts);
            let log = solve_uniform(&cost, &opts.stabilized());
            for (a, b) in plain.entries.data().iter().zip(log.entries.data()) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn third_axis_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let d = 4;
        let cost = CostTensor3::from_fn(d, |_, _, _| rng.random::<f64>()).unwrap();
        let mut pi: Vec<usize> = (0..d).collect();
        pi.shuffle(&mut rng);
        let permuted = CostTensor3::from_fn(d, |i, j, k| cost.get(i, j, pi[k])).unwrap();
        let opts = SolverOptions::with_lambda(50.0);
        let base = solve_uniform(&cost, &opts);
        let perm = solve_uniform(&permuted, &opts);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    assert!(
                        (perm.entries.get(i, j, k) - base.entries.get(i, j, pi[k])).abs() < 1e-10
                    );
                }
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let cost = CostTensor3::from_fn(3, |_, _, _| 1.0).unwrap();
        let err = sinkhorn3_plan(
            &cost,
            &MassVector::uniform(3),
            &MassVector::uniform(2),
            &MassVector::uniform(3),
            &SolverOptions::default(),
        );
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn extreme_kernel_requires_stabilized() {
        let cost =
            CostTensor3::from_fn(2, |i, j, k| if i == j && j == k { 0.0 } else { 20.0 }).unwrap();
        let opts = SolverOptions::with_lambda(100.0);
        assert!(matches!(
            sinkhorn3_plan(
                &cost,
                &MassVector::uniform(2),
                &MassVector::uniform(2),
                &MassVector::uniform(2),
                &opts
            ),
            Err(Error::NeedsStabilization { .. })
        ));
        let plan = solve_uniform(&cost, &opts.stabilized());
        assert!(plan.converged);
    }

    /// Argmax chain used by the exact-limit checks: row argmax of the (i, j)
    /// compression, then row argmax of the (j, k) marginal.
    fn argmax_chain(plan: &TransportTensor3) -> (Vec<usize>, Vec<usize>) {
        let sigma = compress_ij(plan).row_argmax();
        let tau = plan.entries.marginalize(0).row_argmax();
        (sigma, tau)
    }

    #[test]
    fn exact_limit_matches_triple_oracle() {
        // The 3-marginal polytope has fractional vertices, so a generic
        // random tensor's optimum need not be a permutation chain. Plant the
        // d smallest entries on a chain to make it the unique optimum.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut tested = 0;
        while tested < 5 {
            let d = rng.random_range(2..=4);
            let mut sigma: Vec<usize> = (0..d).collect();
            let mut tau: Vec<usize> = (0..d).collect();
            sigma.shuffle(&mut rng);
            tau.shuffle(&mut rng);
            let cost = CostTensor3::from_fn(d, |i, j, k| {
                if sigma[i] == j && tau[j] == k {
                    rng.random_range(0.0..0.1)
                } else {
                    rng.random_range(0.3..1.0)
                }
            })
            .unwrap();
            let (oracle, best) = exact_triple_oracle(&cost).unwrap();
            assert_eq!(oracle.first, sigma);
            assert_eq!(oracle.second, tau);
            // Require a clear gap to the runner-up chain as well.
            let mut values = Vec::new();
            collect_pair_values(&cost, &mut values);
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert!((values[0] - best).abs() < 1e-12);
            if values[1] - best < 0.05 * cost.max_entry() {
                continue;
            }
            let plan = solve_uniform(
                &cost,
                &SolverOptions {
                    lambda: 1000.0 / cost.max_entry(),
                    max_iterations: 2_000_000,
                    stabilized: true,
                    ..SolverOptions::default()
                },
            );
            let (sigma, tau) = argmax_chain(&plan);
            assert_eq!(sigma, oracle.first);
            assert_eq!(tau, oracle.second);
            tested += 1;
        }
    }

    /// Test-local enumeration of `(1/d) sum_i m[i][sigma(i)][tau(sigma(i))]`
    /// over every permutation pair.
    fn collect_pair_values(cost: &CostTensor3, out: &mut Vec<f64>) {
        fn perms(d: usize) -> Vec<Vec<usize>> {
            fn go(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
                if rest.is_empty() {
                    out.push(prefix.clone());
                    return;
                }
                for idx in 0..rest.len() {
                    let x = rest.remove(idx);
                    prefix.push(x);
                    go(prefix, rest, out);
                    prefix.pop();
                    rest.insert(idx, x);
                }
            }
            let mut out = Vec::new();
            go(&mut Vec::new(), &mut (0..d).collect(), &mut out);
            out
        }
        let d = cost.d();
        for sigma in perms(d) {
            for tau in perms(d) {
                let total: f64 = (0..d).map(|i| cost.get(i, sigma[i], tau[sigma[i]])).sum();
                out.push(total / d as f64);
            }
        }
    }
}
