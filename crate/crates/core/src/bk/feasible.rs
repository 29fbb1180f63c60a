//! The set of digital prices compatible with a call curve.
//!
//! Given calls with slopes `s_i` over the buckets `[K_i, K_{i+1})`, a digital
//! vector gives positive masses and in-bucket means exactly when
//! `D_{i+1} < -s_i < D_i` for every finite bucket, together with `D_n > 0`.
//! That is an open box: `D_j ∈ (-s_j, -s_{j-1})`, with `-s_n := 0`.

use crate::error::{MedError, Result};
use crate::med::MarketQuotes;

/// Relative margin kept from the faces of the box during the search.
pub const INTERIOR_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct DigitalBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl DigitalBounds {
    /// Box implied by the calls of `q`; fails if any side is empty.
    pub fn from_quotes(q: &MarketQuotes) -> Result<Self> {
        let slopes = q.slopes();
        let n = q.n();
        let mut lower = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        for j in 1..=n {
            let lo = if j < n { -slopes[j] } else { 0.0 };
            let hi = -slopes[j - 1];
            if !(lo < hi) || !(hi <= 1.0) || lo < 0.0 {
                return Err(MedError::EmptyFeasibleSet {
                    index: j,
                    lower: lo,
                    upper: hi,
                });
            }
            lower.push(lo);
            upper.push(hi);
        }
        Ok(Self { lower, upper })
    }

    pub fn n(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, j: usize) -> f64 {
        self.upper[j] - self.lower[j]
    }

    /// First coordinate outside the open box, as an error.
    pub fn check_open(&self, digitals: &[f64]) -> Result<()> {
        if digitals.len() != self.n() {
            return Err(MedError::InvalidArgument(format!(
                "{} digitals for {} strikes",
                digitals.len(),
                self.n()
            )));
        }
        for (j, &d) in digitals.iter().enumerate() {
            if !(d > self.lower[j] && d < self.upper[j]) {
                return Err(MedError::NotInFeasibleSet {
                    index: j + 1,
                    value: d,
                    lower: self.lower[j],
                    upper: self.upper[j],
                });
            }
        }
        Ok(())
    }

    /// True if every coordinate keeps `margin · width` from both faces.
    pub fn contains_with_margin(&self, digitals: &[f64], margin: f64) -> bool {
        digitals.iter().enumerate().all(|(j, &d)| {
            let m = margin * self.width(j);
            d >= self.lower[j] + m && d <= self.upper[j] - m
        })
    }

    /// Clamps each coordinate into the box shrunk by `margin · width`.
    pub fn clamp(&self, digitals: &mut [f64], margin: f64) {
        for (j, d) in digitals.iter_mut().enumerate() {
            let m = margin * self.width(j);
            *d = d.clamp(self.lower[j] + m, self.upper[j] - m);
        }
    }

    /// Distance from `d_j` to the nearer face.
    pub fn slack(&self, j: usize, d: f64) -> f64 {
        (d - self.lower[j]).min(self.upper[j] - d)
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }
}

/// Starting digitals: minus the centred slope of the call curve at each
/// inner strike, the midpoint of the feasible interval at `K_n`, then
/// clamped at least [`INTERIOR_MARGIN`] inside the box.
pub fn init_digitals(q: &MarketQuotes) -> Result<Vec<f64>> {
    let bounds = DigitalBounds::from_quotes(q)?;
    let grid = q.grid();
    let n = q.n();
    let mut d: Vec<f64> = (1..=n)
        .map(|j| {
            if j < n {
                -(q.call(j + 1) - q.call(j - 1)) / (grid.strike(j + 1) - grid.strike(j - 1))
            } else {
                0.5 * (bounds.lower()[j - 1] + bounds.upper()[j - 1])
            }
        })
        .collect();
    bounds.clamp(&mut d, INTERIOR_MARGIN);
    Ok(d)
}
