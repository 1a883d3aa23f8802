//! Entropic-regularized optimal transport between two discrete marginals.
//!
//! The solver minimizes `<P, M> - (1/lambda) * H(P)` over the transport
//! polytope `U(r, c)` by alternately rescaling the kernel `K = exp(-lambda * M)`
//! so that the optimum has the form `P = diag(u) * K * diag(v)`. Larger
//! `lambda` means weaker regularization and a plan closer to the exact
//! assignment optimum.
//!
//! Two modes are available. The default materializes the kernel directly and
//! errors when `lambda * max(M)` puts it at risk of underflow. The stabilized
//! mode keeps log-domain potentials and absorbs the scaling vectors into them
//! whenever they grow extreme, rebuilding the kernel around the current
//! potentials; degenerate slices (a row or column whose kernel entries all
//! flush to zero) are recovered with a full log-sum-exp update.

use crate::error::{Error, Result};
use crate::mass::MassVector;
use crate::matrix::{CostMatrix, SquareMatrix, TransportPlan};

/// Above `lambda * max(M) > STABILIZATION_THRESHOLD` the raw kernel
/// `exp(-lambda * m)` is at risk of underflow and the solver insists on
/// log-domain updates.
pub const STABILIZATION_THRESHOLD: f64 = 500.0;

/// Scaling factors beyond this magnitude (either side of 1) are absorbed
/// into the log-domain potentials. Wide enough that rebuilds stay rare,
/// narrow enough that products of three scalings and a kernel entry stay
/// comfortably inside the representable range.
pub(crate) const ABSORB_LIMIT: f64 = 1e90;

/// Denominators at or below this are treated as flushed-to-zero slices and
/// recovered in the log domain.
pub(crate) const DEGENERATE_DEN: f64 = 1e-290;

/// The in-loop convergence test keeps this much headroom below the caller's
/// tolerance so that residuals recomputed from the materialized plan (whose
/// summation order differs) still meet it.
pub(crate) const RESIDUAL_MARGIN: f64 = 1.0 - 1e-3;

/// Knobs for both the 2-marginal and 3-marginal scaling solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Regularization strength; larger values track the unregularized
    /// optimum more closely but make the kernel more extreme.
    pub lambda: f64,
    /// Convergence threshold on the summed L1 marginal residual.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Run the updates in the log domain (required for extreme kernels).
    pub stabilized: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            lambda: 100.0,
            tolerance: 1e-9,
            max_iterations: 10_000,
            stabilized: false,
        }
    }
}

impl SolverOptions {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    pub fn stabilized(mut self) -> Self {
        self.stabilized = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidOptions(format!(
                "lambda must be positive and finite, got {}",
                self.lambda
            )));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidOptions(format!(
                "tolerance must be positive and finite, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidOptions("max_iterations must be >= 1".into()));
        }
        Ok(())
    }

    /// Errors unless the kernel scale is safe for the selected mode.
    /// The comparison carries a relative epsilon so `lambda = T / max(M)`
    /// lands on the legal side of the threshold `T`.
    pub(crate) fn check_kernel_scale(&self, max_cost: f64) -> Result<()> {
        let scale = self.lambda * max_cost;
        if !self.stabilized && scale > STABILIZATION_THRESHOLD * (1.0 + 1e-9) {
            return Err(Error::NeedsStabilization { scale });
        }
        Ok(())
    }
}

/// `exp` with a hard flush to zero below the subnormal range. Subnormal
/// kernel entries contribute nothing at solver tolerances but their
/// arithmetic is pathologically slow.
#[inline]
pub(crate) fn exp_flushed(arg: f64) -> f64 {
    if arg < -700.0 {
        0.0
    } else {
        arg.exp()
    }
}

/// Log-sum-exp with the max trick; `terms(idx)` supplies the summands.
#[inline]
pub(crate) fn logsumexp_by(count: usize, terms: impl Fn(usize) -> f64) -> f64 {
    let mut mx = f64::NEG_INFINITY;
    for idx in 0..count {
        let t = terms(idx);
        if t > mx {
            mx = t;
        }
    }
    if mx == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut sum = 0.0;
    for idx in 0..count {
        sum += (terms(idx) - mx).exp();
    }
    mx + sum.ln()
}

fn check_dims(cost: &CostMatrix, r: &MassVector, c: &MassVector) -> Result<usize> {
    let d = cost.d();
    if r.len() != d {
        return Err(Error::DimensionMismatch {
            context: "source marginal vs cost matrix",
            expected: d,
            found: r.len(),
        });
    }
    if c.len() != d {
        return Err(Error::DimensionMismatch {
            context: "target marginal vs cost matrix",
            expected: d,
            found: c.len(),
        });
    }
    Ok(d)
}

/// Solves the entropic transport problem, returning the scaled plan together
/// with iteration diagnostics. `converged` reports whether the summed L1
/// residual over both marginals dropped to `opts.tolerance` before
/// `opts.max_iterations` full update cycles.
pub fn sinkhorn_plan(
    cost: &CostMatrix,
    r: &MassVector,
    c: &MassVector,
    opts: &SolverOptions,
) -> Result<TransportPlan> {
    let d = check_dims(cost, r, c)?;
    opts.validate()?;
    opts.check_kernel_scale(cost.max_entry())?;

    // A single spot forces the whole plan analytically.
    if d == 1 {
        let mut entries = SquareMatrix::zeros(1);
        entries.set(0, 0, 1.0);
        return Ok(TransportPlan {
            entries,
            iterations: 1,
            converged: true,
            marginal_residual: 0.0,
        });
    }

    if opts.stabilized {
        sinkhorn_stabilized(cost, r, c, opts)
    } else {
        sinkhorn_scaling(cost, r, c, opts)
    }
}

/// Plain scaling updates on the materialized kernel.
fn sinkhorn_scaling(
    cost: &CostMatrix,
    r: &MassVector,
    c: &MassVector,
    opts: &SolverOptions,
) -> Result<TransportPlan> {
    let d = cost.d();
    let lambda = opts.lambda;
    let kernel: Vec<f64> = cost
        .as_matrix()
        .data()
        .iter()
        .map(|&m| exp_flushed(-lambda * m))
        .collect();
    let scale = lambda * cost.max_entry();

    let mut u = vec![1.0; d];
    let mut v = vec![1.0; d];
    let mut iterations = 0;
    let mut converged = false;
    let mut residual = f64::INFINITY;

    for iter in 1..=opts.max_iterations {
        iterations = iter;

        for i in 0..d {
            let kv: f64 = (0..d).map(|j| kernel[i * d + j] * v[j]).sum();
            let ui = if r[i] == 0.0 { 0.0 } else { r[i] / kv };
            if !ui.is_finite() {
                return Err(Error::NeedsStabilization { scale });
            }
            u[i] = ui;
        }
        for j in 0..d {
            let ktu: f64 = (0..d).map(|i| kernel[i * d + j] * u[i]).sum();
            let vj = if c[j] == 0.0 { 0.0 } else { c[j] / ktu };
            if !vj.is_finite() {
                return Err(Error::NeedsStabilization { scale });
            }
            v[j] = vj;
        }

        residual = plan_residual(&kernel, d, &u, &v, r, c);
        if residual <= opts.tolerance * RESIDUAL_MARGIN {
            converged = true;
            break;
        }
    }

    let entries = SquareMatrix::from_fn(d, |i, j| u[i] * kernel[i * d + j] * v[j]);
    if entries.data().iter().any(|p| !p.is_finite()) {
        return Err(Error::NeedsStabilization { scale });
    }
    Ok(TransportPlan {
        entries,
        iterations,
        converged,
        marginal_residual: residual,
    })
}

/// Summed L1 residual of `diag(u) K diag(v)` against both marginals, with the
/// same per-entry evaluation the materialized plan uses.
fn plan_residual(kernel: &[f64], d: usize, u: &[f64], v: &[f64], r: &MassVector, c: &MassVector) -> f64 {
    let mut col_sums = vec![0.0; d];
    let mut residual = 0.0;
    for i in 0..d {
        let mut row_sum = 0.0;
        for j in 0..d {
            let p = u[i] * kernel[i * d + j] * v[j];
            row_sum += p;
            col_sums[j] += p;
        }
        residual += (row_sum - r[i]).abs();
    }
    for j in 0..d {
        residual += (col_sums[j] - c[j]).abs();
    }
    residual
}

/// Absorption-stabilized scaling: plain updates on the kernel
/// `exp(-lambda m + alpha_i + beta_j)`, with the scaling vectors folded into
/// the potentials whenever they leave `[1/ABSORB_LIMIT, ABSORB_LIMIT]`.
fn sinkhorn_stabilized(
    cost: &CostMatrix,
    r: &MassVector,
    c: &MassVector,
    opts: &SolverOptions,
) -> Result<TransportPlan> {
    let d = cost.d();
    let lambda = opts.lambda;
    let logk: Vec<f64> = cost
        .as_matrix()
        .data()
        .iter()
        .map(|&m| -lambda * m)
        .collect();
    let log_r: Vec<f64> = r.weights().iter().map(|&x| x.ln()).collect();
    let log_c: Vec<f64> = c.weights().iter().map(|&x| x.ln()).collect();

    let mut alpha = vec![0.0; d];
    let mut beta = vec![0.0; d];
    let mut u = vec![1.0; d];
    let mut v = vec![1.0; d];
    let mut kernel = vec![0.0; d * d];
    let rebuild = |kernel: &mut [f64], alpha: &[f64], beta: &[f64]| {
        for i in 0..d {
            for j in 0..d {
                kernel[i * d + j] = exp_flushed(logk[i * d + j] + alpha[i] + beta[j]);
            }
        }
    };
    rebuild(&mut kernel, &alpha, &beta);

    // One full log-sum-exp cycle on the potentials: always safe, used when a
    // slice of the materialized kernel is entirely flushed to zero.
    let lse_cycle = |alpha: &mut [f64], beta: &mut [f64]| {
        for i in 0..d {
            let lse = logsumexp_by(d, |j| logk[i * d + j] + beta[j]);
            alpha[i] = log_r[i] - lse;
        }
        for j in 0..d {
            let lse = logsumexp_by(d, |i| logk[i * d + j] + alpha[i]);
            beta[j] = log_c[j] - lse;
        }
    };

    let mut iterations = 0;
    let mut converged = false;
    let mut residual = f64::INFINITY;

    'outer: for iter in 1..=opts.max_iterations {
        iterations = iter;

        // Any degenerate or non-finite quantity falls back to one log-domain
        // cycle, which is always safe to take.
        macro_rules! rescue {
            () => {{
                absorb(&mut alpha, &mut u);
                absorb(&mut beta, &mut v);
                lse_cycle(&mut alpha, &mut beta);
                rebuild(&mut kernel, &alpha, &beta);
                continue 'outer;
            }};
        }

        for i in 0..d {
            let kv: f64 = (0..d).map(|j| kernel[i * d + j] * v[j]).sum();
            if (kv.is_nan() || kv <= DEGENERATE_DEN) && r[i] > 0.0 {
                rescue!();
            }
            let ui = if r[i] == 0.0 { 0.0 } else { r[i] / kv };
            if !ui.is_finite() {
                rescue!();
            }
            u[i] = ui;
        }
        if needs_absorb(&u) {
            absorb(&mut alpha, &mut u);
            absorb(&mut beta, &mut v);
            rebuild(&mut kernel, &alpha, &beta);
            continue 'outer;
        }
        for j in 0..d {
            let ktu: f64 = (0..d).map(|i| kernel[i * d + j] * u[i]).sum();
            if (ktu.is_nan() || ktu <= DEGENERATE_DEN) && c[j] > 0.0 {
                rescue!();
            }
            let vj = if c[j] == 0.0 { 0.0 } else { c[j] / ktu };
            if !vj.is_finite() {
                rescue!();
            }
            v[j] = vj;
        }
        if needs_absorb(&v) {
            absorb(&mut alpha, &mut u);
            absorb(&mut beta, &mut v);
            rebuild(&mut kernel, &alpha, &beta);
            continue 'outer;
        }

        residual = plan_residual(&kernel, d, &u, &v, r, c);
        if residual <= opts.tolerance * RESIDUAL_MARGIN {
            converged = true;
            break;
        }
    }

    if !converged {
        // A rescue or absorb may have ended the last cycle early; measure the
        // plan actually being returned.
        residual = plan_residual(&kernel, d, &u, &v, r, c);
    }
    let entries = SquareMatrix::from_fn(d, |i, j| u[i] * kernel[i * d + j] * v[j]);
    Ok(TransportPlan {
        entries,
        iterations,
        converged,
        marginal_residual: residual,
    })
}

pub(crate) fn needs_absorb(scaling: &[f64]) -> bool {
    scaling
        .iter()
        .any(|&x| x > ABSORB_LIMIT || (x > 0.0 && x < 1.0 / ABSORB_LIMIT))
}

/// Folds a scaling vector into its log-domain potential and resets it.
pub(crate) fn absorb(potential: &mut [f64], scaling: &mut [f64]) {
    for (p, s) in potential.iter_mut().zip(scaling.iter_mut()) {
        // s == 0 encodes a zero target mass; exp(-inf) restores the zero.
        *p += s.ln();
        *s = 1.0;
    }
}

/// Total transport cost `<P, M>` of a plan against a cost matrix.
pub fn transport_cost(plan: &TransportPlan, cost: &CostMatrix) -> Result<f64> {
    let d = plan.d();
    if cost.d() != d {
        return Err(Error::DimensionMismatch {
            context: "cost matrix vs transport plan",
            expected: d,
            found: cost.d(),
        });
    }
    Ok(plan
        .entries
        .data()
        .iter()
        .zip(cost.as_matrix().data())
        .map(|(&p, &m)| p * m)
        .sum())
}

/// Summed L1 feasibility violation: `|rowsums - r|_1 + |colsums - c|_1`.
pub fn marginal_residual(plan: &TransportPlan, r: &MassVector, c: &MassVector) -> Result<f64> {
    let d = plan.d();
    if r.len() != d || c.len() != d {
        return Err(Error::DimensionMismatch {
            context: "marginals vs transport plan",
            expected: d,
            found: if r.len() != d { r.len() } else { c.len() },
        });
    }
    let rows = plan.entries.row_sums();
    let cols = plan.entries.col_sums();
    let row_l1: f64 = rows.iter().zip(r.weights()).map(|(a, b)| (a - b).abs()).sum();
    let col_l1: f64 = cols.iter().zip(c.weights()).map(|(a, b)| (a - b).abs()).sum();
    Ok(row_l1 + col_l1)
}
