use crate::error::{MedError, Result};
use crate::langevin::InverseLangevin;
use crate::med::MarketQuotes;
use crate::partition::{Bucket, StrikeGrid};

/// Per-bucket probability masses, tilts and conditional means.
#[derive(Debug, Clone, PartialEq)]
pub struct BucketParams {
    pub p: Vec<f64>,
    pub beta: Vec<f64>,
    pub kbar: Vec<f64>,
}

/// A density that is a single exponential on every bucket:
/// `f(x) = p_i exp(β_i x - c_i(β_i))` for `x ∈ [K_i, K_{i+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseExpDensity {
    grid: StrikeGrid,
    params: BucketParams,
    logc: Vec<f64>,
    /// Means implied by the tilts, `c_i'(β_i)`.
    means: Vec<f64>,
}

/// Masses `p_0 = 1 - D_1`, `p_i = D_i - D_{i+1}`, `p_n = D_n`.
pub fn bucket_masses(digitals: &[f64]) -> Result<Vec<f64>> {
    let n = digitals.len();
    let digital = |i: usize| match i {
        0 => 1.0,
        i if i <= n => digitals[i - 1],
        _ => 0.0,
    };
    (0..=n)
        .map(|i| {
            let mass = digital(i) - digital(i + 1);
            if mass > 0.0 {
                Ok(mass)
            } else {
                Err(MedError::InfeasibleDigitals { bucket: i, mass })
            }
        })
        .collect()
}

/// Conditional bucket means from calls, digitals and masses.
///
/// Uses `C_i - C_{i+1} = p_i (K̄_i - K_i) + (K_{i+1} - K_i) D_{i+1}` on the
/// finite buckets and `C_n = p_n (K̄_n - K_n)` on the last one.
pub fn bucket_means(q: &MarketQuotes, p: &[f64]) -> Result<Vec<f64>> {
    let digitals = q.digitals().ok_or(MedError::MissingDigitals)?;
    means_from(q, digitals, p)
}

pub(crate) fn means_from(q: &MarketQuotes, digitals: &[f64], p: &[f64]) -> Result<Vec<f64>> {
    let grid = q.grid();
    let n = grid.n();
    if p.len() != n + 1 || digitals.len() != n {
        return Err(MedError::InvalidArgument(format!(
            "expected {} masses and {n} digitals, got {} and {}",
            n + 1,
            p.len(),
            digitals.len()
        )));
    }
    (0..=n)
        .map(|i| {
            let lower = grid.strike(i);
            let upper = grid.strike(i + 1);
            let excess = if i < n {
                (q.call(i) - q.call(i + 1)) - (upper - lower) * digitals[i]
            } else {
                q.call(n)
            };
            let mean = lower + excess / p[i];
            if mean > lower && mean < upper {
                Ok(mean)
            } else {
                Err(MedError::InfeasibleMean {
                    bucket: i,
                    mean,
                    lower,
                    upper,
                })
            }
        })
        .collect()
}

/// Solves `c_i'(β_i) = K̄_i` bucket by bucket.
pub fn solve_betas(
    kbar: &[f64],
    grid: &StrikeGrid,
    inverter: &dyn InverseLangevin,
) -> Result<Vec<f64>> {
    if kbar.len() != grid.n() + 1 {
        return Err(MedError::InvalidArgument(format!(
            "{} means for {} buckets",
            kbar.len(),
            grid.n() + 1
        )));
    }
    grid.buckets()
        .zip(kbar)
        .enumerate()
        .map(|(i, (b, &m))| b.solve_tilt(i, m, inverter))
        .collect()
}

/// Maximum-entropy density matching the forward, calls and digitals.
pub fn build_density(
    q: &MarketQuotes,
    inverter: &dyn InverseLangevin,
) -> Result<PiecewiseExpDensity> {
    let digitals = q.digitals().ok_or(MedError::MissingDigitals)?;
    build_density_with_digitals(q, digitals, inverter)
}

/// As [`build_density`], with the digitals supplied separately (the calls
/// of `q` are used; its own digitals, if any, are ignored).
pub fn build_density_with_digitals(
    q: &MarketQuotes,
    digitals: &[f64],
    inverter: &dyn InverseLangevin,
) -> Result<PiecewiseExpDensity> {
    if digitals.len() != q.n() {
        return Err(MedError::InvalidArgument(format!(
            "{} digitals for {} strikes",
            digitals.len(),
            q.n()
        )));
    }
    let p = bucket_masses(digitals)?;
    let kbar = means_from(q, digitals, &p)?;
    let beta = solve_betas(&kbar, q.grid(), inverter)?;
    Ok(PiecewiseExpDensity::assemble(
        q.grid().clone(),
        BucketParams { p, beta, kbar },
    ))
}

impl PiecewiseExpDensity {
    /// Density with given masses and tilts; conditional means follow from
    /// the tilts. Masses must be positive and sum to one within `1e-12`.
    pub fn from_tilts(grid: StrikeGrid, p: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        let n = grid.n();
        if p.len() != n + 1 || beta.len() != n + 1 {
            return Err(MedError::InvalidArgument(format!(
                "need {} masses and tilts, got {} and {}",
                n + 1,
                p.len(),
                beta.len()
            )));
        }
        if let Some((bucket, &mass)) = p.iter().enumerate().find(|(_, m)| !(**m > 0.0)) {
            return Err(MedError::InfeasibleDigitals { bucket, mass });
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(MedError::InvalidArgument(format!(
                "masses sum to {total}, not 1"
            )));
        }
        if !(beta[n] < 0.0) || beta.iter().any(|b| !b.is_finite()) {
            return Err(MedError::Domain {
                what: "last-bucket tilt (needs beta < 0)",
                value: beta[n],
            });
        }
        let kbar = grid
            .buckets()
            .zip(&beta)
            .map(|(b, &t)| b.mean_unchecked(t))
            .collect();
        Ok(Self::assemble(grid, BucketParams { p, beta, kbar }))
    }

    fn assemble(grid: StrikeGrid, params: BucketParams) -> Self {
        let (logc, means) = grid
            .buckets()
            .zip(&params.beta)
            .map(|(b, &t)| (b.log_partition_unchecked(t), b.mean_unchecked(t)))
            .unzip();
        Self {
            grid,
            params,
            logc,
            means,
        }
    }

    pub fn grid(&self) -> &StrikeGrid {
        &self.grid
    }

    pub fn params(&self) -> &BucketParams {
        &self.params
    }

    /// `c_i(β_i)` per bucket.
    pub fn log_partitions(&self) -> &[f64] {
        &self.logc
    }

    /// `c_i'(β_i)` per bucket; equals `params().kbar` up to inversion error.
    pub fn tilted_means(&self) -> &[f64] {
        &self.means
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    fn bucket(&self, i: usize) -> Bucket {
        self.grid.bucket(i)
    }

    /// `ln f(x)`; `-∞` for `x < 0`.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x < 0.0 || x.is_nan() {
            return f64::NEG_INFINITY;
        }
        let i = self.grid.locate(x);
        self.params.p[i].ln() + self.bucket(i).log_density_unchecked(self.params.beta[i], x)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// `ln f(K_j^-) - ln f(K_j^+)` for `j = 1..=n`.
    pub fn log_jumps(&self) -> Vec<f64> {
        let p = &self.params.p;
        let beta = &self.params.beta;
        (1..=self.n())
            .map(|j| {
                let k = self.grid.strike(j);
                let left = p[j - 1].ln() + self.bucket(j - 1).log_density_unchecked(beta[j - 1], k);
                let right = p[j].ln() + self.bucket(j).log_density_unchecked(beta[j], k);
                left - right
            })
            .collect()
    }

    /// Closed-form `Σ p_i`.
    pub fn total_mass(&self) -> f64 {
        self.params.p.iter().sum()
    }

    /// Mass and mean of bucket `i` restricted to `[x, K_{i+1})`.
    fn partial(&self, i: usize, x: f64) -> (f64, f64) {
        let b = self.bucket(i);
        let beta = self.params.beta[i];
        if x <= b.lower {
            return (self.params.p[i], self.means[i]);
        }
        let sub = Bucket {
            lower: x,
            upper: b.upper,
        };
        let frac = (sub.log_partition_unchecked(beta) - self.logc[i]).exp();
        (self.params.p[i] * frac, sub.mean_unchecked(beta))
    }

    /// Undiscounted call price `E[(X - K)^+]`.
    pub fn price_call(&self, strike: f64) -> f64 {
        let k = strike.max(0.0);
        let j = self.grid.locate(k);
        let (mass, mean) = self.partial(j, k);
        // Sum from the tail so that small far buckets are not swamped.
        let above: f64 = (j + 1..=self.n())
            .rev()
            .map(|i| self.params.p[i] * (self.means[i] - k))
            .sum();
        above + mass * (mean - k)
    }

    /// Undiscounted digital price `P(X > K)`.
    pub fn price_digital(&self, strike: f64) -> f64 {
        let k = strike.max(0.0);
        let j = self.grid.locate(k);
        let (mass, _) = self.partial(j, k);
        let above: f64 = (j + 1..=self.n()).rev().map(|i| self.params.p[i]).sum();
        above + mass
    }

    pub fn forward(&self) -> f64 {
        self.price_call(0.0)
    }

    /// Calls at `K_1..K_n`.
    pub fn calls(&self) -> Vec<f64> {
        self.grid
            .strikes()
            .iter()
            .map(|&k| self.price_call(k))
            .collect()
    }

    /// Digitals at `K_1..K_n`.
    pub fn digitals(&self) -> Vec<f64> {
        self.grid
            .strikes()
            .iter()
            .map(|&k| self.price_digital(k))
            .collect()
    }

    /// Forward, calls and digitals priced under this density.
    pub fn implied_quotes(&self) -> MarketQuotes {
        MarketQuotes::new(
            self.grid.clone(),
            self.forward(),
            self.calls(),
            Some(self.digitals()),
        )
        .expect("density prices have matching shapes")
    }

    /// Differential entropy `-∫ f ln f = Σ p_i (c_i - β_i c_i' - ln p_i)`.
    pub fn entropy(&self) -> f64 {
        self.grid
            .buckets()
            .zip(&self.params.p)
            .zip(&self.params.beta)
            .map(|((b, &p), &beta)| p * (b.tilt_entropy_unchecked(beta) - p.ln()))
            .sum()
    }
}
