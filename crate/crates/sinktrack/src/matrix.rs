use crate::error::{Error, Result};

/// Dense row-major `d x d` matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    d: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(d: usize) -> Self {
        assert!(d >= 1, "matrix needs d >= 1");
        Self {
            d,
            data: vec![0.0; d * d],
        }
    }

    pub fn from_fn(d: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                m.data[i * d + j] = f(i, j);
            }
        }
        m
    }

    /// Builds from nested rows; every row must have length `rows.len()`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return Err(Error::InvalidParameter("empty matrix".into()));
        }
        let mut data = Vec::with_capacity(d * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::RaggedRows {
                    row: i,
                    len: row.len(),
                    expected: d,
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { d, data })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.d + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.d + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.d).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.d];
        for i in 0..self.d {
            for (j, s) in sums.iter_mut().enumerate() {
                *s += self.get(i, j);
            }
        }
        sums
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
    }

    /// Index of the largest entry in each row; the first occurrence wins ties.
    pub fn row_argmax(&self) -> Vec<usize> {
        (0..self.d)
            .map(|i| {
                let row = self.row(i);
                let mut best = 0;
                for (j, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = j;
                    }
                }
                best
            })
            .collect()
    }
}

/// Non-negative transport costs between `d` sources and `d` targets.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    matrix: SquareMatrix,
}

impl CostMatrix {
    /// Validates that every entry is finite and non-negative.
    pub fn new(matrix: SquareMatrix) -> Result<Self> {
        for i in 0..matrix.d() {
            for j in 0..matrix.d() {
                let v = matrix.get(i, j);
                if !v.is_finite() {
                    return Err(Error::NonFiniteCost { index: vec![i, j] });
                }
                if v < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "cost entry ({i},{j}) = {v} is negative"
                    )));
                }
            }
        }
        Ok(Self { matrix })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(SquareMatrix::from_rows(rows)?)
    }

    pub fn from_fn(d: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::new(SquareMatrix::from_fn(d, f))
    }

    pub fn d(&self) -> usize {
        self.matrix.d()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    pub fn as_matrix(&self) -> &SquareMatrix {
        &self.matrix
    }

    pub fn max_entry(&self) -> f64 {
        self.matrix.max_abs()
    }
}

/// A feasible coupling over the transport polytope, with solver diagnostics.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    pub entries: SquareMatrix,
    pub iterations: usize,
    pub converged: bool,
    /// Final L1 residual over both marginals.
    pub marginal_residual: f64,
}

impl TransportPlan {
    pub fn d(&self) -> usize {
        self.entries.d()
    }
}
