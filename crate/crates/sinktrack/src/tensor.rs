use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

/// Hard cap on the side length of a dense `d^3` tensor (`512^3` doubles = 1 GiB).
pub const MAX_TENSOR_DIM: usize = 512;

/// Dense `d x d x d` tensor of `f64`, laid out with the last axis contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    d: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("tensor needs d >= 1".into()));
        }
        if d > MAX_TENSOR_DIM {
            return Err(Error::TensorTooLarge {
                d,
                max: MAX_TENSOR_DIM,
            });
        }
        Ok(Self {
            d,
            data: vec![0.0; d * d * d],
        })
    }

    pub fn from_fn(d: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let mut t = Self::zeros(d)?;
        let mut idx = 0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    t.data[idx] = f(i, j, k);
                    idx += 1;
                }
            }
        }
        Ok(t)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.d + j) * self.d + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.d + j) * self.d + k] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// The contiguous `d^2` slice with the first axis fixed at `i`.
    #[inline]
    pub fn slice0(&self, i: usize) -> &[f64] {
        let n = self.d * self.d;
        &self.data[i * n..(i + 1) * n]
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
    }

    /// Marginal sums along each of the three axes, in one pass.
    pub fn axis_marginals(&self) -> [Vec<f64>; 3] {
        let d = self.d;
        let mut m0 = vec![0.0; d];
        let mut m1 = vec![0.0; d];
        let mut m2 = vec![0.0; d];
        for (i, slice) in self.data.chunks(d * d).enumerate() {
            for (j, row) in slice.chunks(d).enumerate() {
                for (acc2, &v) in m2.iter_mut().zip(row) {
                    m0[i] += v;
                    m1[j] += v;
                    *acc2 += v;
                }
            }
        }
        [m0, m1, m2]
    }

    /// Sums out the given axis, producing the matrix over the remaining two.
    pub fn marginalize(&self, axis: usize) -> SquareMatrix {
        assert!(axis < 3, "axis out of range");
        let d = self.d;
        let mut out = SquareMatrix::zeros(d);
        let mut idx = 0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let v = self.data[idx];
                    match axis {
                        0 => out.set(j, k, out.get(j, k) + v),
                        1 => out.set(i, k, out.get(i, k) + v),
                        _ => out.set(i, j, out.get(i, j) + v),
                    }
                    idx += 1;
                }
            }
        }
        out
    }
}

/// Non-negative costs over candidate triples (source, mid, target).
#[derive(Debug, Clone, PartialEq)]
pub struct CostTensor3 {
    tensor: Tensor3,
}

impl CostTensor3 {
    /// Validates that every entry is finite and non-negative.
    pub fn new(tensor: Tensor3) -> Result<Self> {
        let d = tensor.d();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let v = tensor.get(i, j, k);
                    if !v.is_finite() {
                        return Err(Error::NonFiniteCost {
                            index: vec![i, j, k],
                        });
                    }
                    if v < 0.0 {
                        return Err(Error::InvalidParameter(format!(
                            "cost entry ({i},{j},{k}) = {v} is negative"
                        )));
                    }
                }
            }
        }
        Ok(Self { tensor })
    }

    pub fn from_fn(d: usize, f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        Self::new(Tensor3::from_fn(d, f)?)
    }

    pub fn d(&self) -> usize {
        self.tensor.d()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.tensor.get(i, j, k)
    }

    pub fn as_tensor(&self) -> &Tensor3 {
        &self.tensor
    }

    pub fn max_entry(&self) -> f64 {
        self.tensor.max_abs()
    }
}

/// A feasible coupling over the 3-marginal polytope, with solver diagnostics.
#[derive(Debug, Clone)]
pub struct TransportTensor3 {
    pub entries: Tensor3,
    pub iterations: usize,
    pub converged: bool,
    /// Final summed L1 residual over the three marginals.
    pub marginal_residual: f64,
}

impl TransportTensor3 {
    pub fn d(&self) -> usize {
        self.entries.d()
    }
}
