//! Tridiagonal matrices and the Thomas algorithm.

use crate::error::{MedError, Result};

/// Square tridiagonal matrix stored by diagonals.
///
/// `lower[i]` is entry `(i + 1, i)` and `upper[i]` is entry `(i, i + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        let off = n.saturating_sub(1);
        Self {
            lower: vec![0.0; off],
            diag: vec![0.0; n],
            upper: vec![0.0; off],
        }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Entry `(i, j)`; zero outside the three diagonals.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if i == j + 1 {
            self.lower[j]
        } else if j == i + 1 {
            self.upper[i]
        } else {
            0.0
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Averages the two off-diagonals.
    pub fn symmetrized(&self) -> Self {
        let off: Vec<f64> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect();
        Self {
            lower: off.clone(),
            diag: self.diag.clone(),
            upper: off,
        }
    }

    /// Solves `A x = rhs` by forward elimination and back substitution.
    ///
    /// Returns the elimination pivots alongside the solution; for a
    /// symmetric matrix they are the `D` of `A = L D Lᵀ`.
    pub fn solve_with_pivots(&self, rhs: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.n();
        if rhs.len() != n {
            return Err(MedError::InvalidArgument(format!(
                "right-hand side has {} entries, matrix has {n} rows",
                rhs.len()
            )));
        }
        let mut pivots = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        let mut r = Vec::with_capacity(n);
        for i in 0..n {
            let (mut d, mut ri) = (self.diag[i], rhs[i]);
            if i > 0 {
                let m = self.lower[i - 1] / pivots[i - 1];
                d -= m * upper[i - 1];
                ri -= m * r[i - 1];
            }
            if d == 0.0 || !d.is_finite() {
                return Err(MedError::NotNegativeDefinite { row: i, pivot: d });
            }
            pivots.push(d);
            upper.push(if i + 1 < n { self.upper[i] } else { 0.0 });
            r.push(ri);
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let next = if i + 1 < n { upper[i] * x[i + 1] } else { 0.0 };
            x[i] = (r[i] - next) / pivots[i];
        }
        Ok((x, pivots))
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.solve_with_pivots(rhs).map(|(x, _)| x)
    }

    /// Solves `A x = rhs` for a symmetric negative definite `A`, failing at
    /// the first non-negative pivot.
    pub fn solve_negative_definite(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let (x, pivots) = self.solve_with_pivots(rhs)?;
        if let Some((row, &pivot)) = pivots.iter().enumerate().find(|(_, p)| **p >= 0.0) {
            return Err(MedError::NotNegativeDefinite { row, pivot });
        }
        Ok(x)
    }
}
