//! Log-partition functions of exponential tilts over strike buckets.
//!
//! The strikes `0 = K_0 < K_1 < ... < K_n < K_{n+1} = ∞` cut the positive
//! half-line into buckets `[K_i, K_{i+1})`, `i = 0..=n`. For a tilt `β`,
//! `c_i(β) = ln ∫_{K_i}^{K_{i+1}} e^{βx} dx`; its first derivative is the
//! tilted mean and its second derivative the tilted variance.
//!
//! For a finite bucket with midpoint `U` and half-width `V`,
//!
//! ```text
//! c(β)   = βU + ln 2 + ln V + ln(sinh(βV) / (βV))
//! c'(β)  = U + V L(βV)
//! c''(β) = V² L'(βV)
//! ```
//!
//! which is smooth through `β = 0`. The last bucket `[K_n, ∞)` only has a
//! normaliser for `β < 0`: `c_n(β) = βK_n - ln(-β)`.

use crate::error::{MedError, Result};
use crate::langevin::{langevin_prime_unchecked, langevin_unchecked, InverseLangevin};

const SINHC_SERIES: f64 = 1e-2;
/// Past this `|z|`, `ln sinh|z|` is taken as `|z| - ln 2 + ln(1 - e^{-2|z|})`.
const SINH_ASYMPTOTIC: f64 = 20.0;

/// `ln(sinh(z) / z)`, even in `z`, accurate in absolute terms for all finite `z`.
pub fn ln_sinhc(z: f64) -> f64 {
    let az = z.abs();
    if az < SINHC_SERIES {
        let z2 = z * z;
        z2 * (1.0 / 6.0 - z2 / 180.0 + z2 * z2 / 2835.0)
    } else if az < SINH_ASYMPTOTIC {
        (az.sinh() / az).ln()
    } else {
        az - std::f64::consts::LN_2 + (-(-2.0 * az).exp()).ln_1p() - az.ln()
    }
}

/// `ln(sinh z / z) - z L(z)`: the standardised entropy of a tilted uniform.
///
/// Even in `z`; equals `-z²/6 + z⁴/60 - z⁶/567 + ...` near zero.
pub fn tilt_entropy_kernel(z: f64) -> f64 {
    let az = z.abs();
    if az < SINHC_SERIES {
        let z2 = z * z;
        z2 * (-1.0 / 6.0 + z2 / 60.0 - z2 * z2 / 567.0)
    } else {
        // ln sinh|z| - ln|z| - |z| coth|z| + 1 with both large parts cancelled
        // analytically.
        1.0 - std::f64::consts::LN_2 - az.ln() + (-(-2.0 * az).exp()).ln_1p()
            - 2.0 * az / (2.0 * az).exp_m1()
    }
}

/// `1 - L(z)`, using `1 - coth z = -2 / expm1(2z)` for large positive `z`.
pub fn one_minus_langevin(z: f64) -> f64 {
    if z > 1.0 {
        1.0 / z - 2.0 / (2.0 * z).exp_m1()
    } else {
        1.0 - langevin_unchecked(z)
    }
}

/// Strictly increasing positive strikes `K_1..K_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct StrikeGrid {
    strikes: Vec<f64>,
}

impl StrikeGrid {
    pub fn new(strikes: Vec<f64>) -> Result<Self> {
        if strikes.is_empty() {
            return Err(MedError::InvalidGrid(
                "at least one strike is required".into(),
            ));
        }
        if let Some((i, k)) = strikes
            .iter()
            .enumerate()
            .find(|(_, k)| !(k.is_finite() && **k > 0.0))
        {
            return Err(MedError::InvalidGrid(format!(
                "strike {} is {k}; strikes must be finite and positive",
                i + 1
            )));
        }
        if let Some(i) = strikes.windows(2).position(|w| w[1] <= w[0]) {
            return Err(MedError::InvalidGrid(format!(
                "strikes must be strictly increasing: K_{} = {} and K_{} = {}",
                i + 1,
                strikes[i],
                i + 2,
                strikes[i + 1]
            )));
        }
        Ok(Self { strikes })
    }

    /// Number of strikes `n`; there are `n + 1` buckets.
    pub fn n(&self) -> usize {
        self.strikes.len()
    }

    pub fn strikes(&self) -> &[f64] {
        &self.strikes
    }

    /// `K_i` for `i = 0..=n+1`, with the sentinels `K_0 = 0` and `K_{n+1} = ∞`.
    pub fn strike(&self, i: usize) -> f64 {
        match i {
            0 => 0.0,
            i if i <= self.n() => self.strikes[i - 1],
            _ => f64::INFINITY,
        }
    }

    /// Bucket `[K_i, K_{i+1})` for `i = 0..=n`.
    pub fn bucket(&self, i: usize) -> Bucket {
        assert!(
            i <= self.n(),
            "bucket index {i} out of range 0..={}",
            self.n()
        );
        if i == self.n() {
            Bucket::tail(self.strike(i))
        } else {
            Bucket::finite(self.strike(i), self.strike(i + 1))
        }
    }

    pub fn buckets(&self) -> impl Iterator<Item = Bucket> + '_ {
        (0..=self.n()).map(|i| self.bucket(i))
    }

    /// Index of the bucket containing `x >= 0`.
    pub fn locate(&self, x: f64) -> usize {
        self.strikes.partition_point(|&k| k <= x)
    }

    pub fn geometry(&self) -> BucketGeometry {
        let (mid, half_width) = (0..self.n())
            .map(|i| {
                let (a, b) = (self.strike(i), self.strike(i + 1));
                (0.5 * (b + a), 0.5 * (b - a))
            })
            .unzip();
        BucketGeometry { mid, half_width }
    }
}

/// Midpoints `U_i` and half-widths `V_i` of the finite buckets `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BucketGeometry {
    pub mid: Vec<f64>,
    pub half_width: Vec<f64>,
}

/// One interval `[lower, upper)` carrying an exponential tilt; `upper = None`
/// for the unbounded last bucket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bucket {
    pub lower: f64,
    pub upper: Option<f64>,
}

impl Bucket {
    pub fn finite(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper: Some(upper),
        }
    }

    pub fn tail(lower: f64) -> Self {
        Self { lower, upper: None }
    }

    pub fn is_tail(&self) -> bool {
        self.upper.is_none()
    }

    pub fn mid(&self) -> Option<f64> {
        self.upper.map(|b| 0.5 * (b + self.lower))
    }

    pub fn half_width(&self) -> Option<f64> {
        self.upper.map(|b| 0.5 * (b - self.lower))
    }

    fn check_tilt(&self, beta: f64) -> Result<()> {
        if !beta.is_finite() || (self.is_tail() && beta >= 0.0) {
            return Err(MedError::Domain {
                what: "last-bucket log-partition (needs beta < 0)",
                value: beta,
            });
        }
        Ok(())
    }

    /// `ln ∫ e^{βx} dx` over the bucket.
    pub fn log_partition(&self, beta: f64) -> Result<f64> {
        self.check_tilt(beta)?;
        Ok(self.log_partition_unchecked(beta))
    }

    pub(crate) fn log_partition_unchecked(&self, beta: f64) -> f64 {
        match self.upper {
            Some(b) => {
                let (u, v) = (0.5 * (b + self.lower), 0.5 * (b - self.lower));
                beta * u + std::f64::consts::LN_2 + v.ln() + ln_sinhc(beta * v)
            }
            None => beta * self.lower - (-beta).ln(),
        }
    }

    /// Tilted mean `c'(β)`.
    pub fn mean(&self, beta: f64) -> Result<f64> {
        self.check_tilt(beta)?;
        Ok(self.mean_unchecked(beta))
    }

    pub(crate) fn mean_unchecked(&self, beta: f64) -> f64 {
        match self.upper {
            Some(b) => {
                let (u, v) = (0.5 * (b + self.lower), 0.5 * (b - self.lower));
                u + v * langevin_unchecked(beta * v)
            }
            None => self.lower - 1.0 / beta,
        }
    }

    /// Tilted variance `c''(β)`.
    pub fn variance(&self, beta: f64) -> Result<f64> {
        self.check_tilt(beta)?;
        Ok(self.variance_unchecked(beta))
    }

    pub(crate) fn variance_unchecked(&self, beta: f64) -> f64 {
        match self.half_width() {
            Some(v) => v * v * langevin_prime_unchecked(beta * v),
            None => 1.0 / (beta * beta),
        }
    }

    /// `((c'(β) - lower)² / c''(β), (upper - c'(β))² / c''(β))`, evaluated
    /// through `1 ± L(βV)` so that no strike-sized cancellation occurs.
    /// The second entry is `None` for the last bucket.
    pub fn edge_ratios(&self, beta: f64) -> (f64, Option<f64>) {
        match self.half_width() {
            Some(v) => {
                let z = beta * v;
                let lp = langevin_prime_unchecked(z);
                let below = one_minus_langevin(-z);
                let above = one_minus_langevin(z);
                (below * below / lp, Some(above * above / lp))
            }
            None => {
                let shift = -1.0 / beta;
                (shift * shift * beta * beta, None)
            }
        }
    }

    /// `c(β) - β c'(β)`, the differential entropy of the normalised tilt.
    pub(crate) fn tilt_entropy_unchecked(&self, beta: f64) -> f64 {
        match self.half_width() {
            Some(v) => (2.0 * v).ln() + tilt_entropy_kernel(beta * v),
            None => 1.0 - (-beta).ln(),
        }
    }

    /// `βx - c(β)`, the log of the normalised tilted density at `x`.
    pub(crate) fn log_density_unchecked(&self, beta: f64, x: f64) -> f64 {
        match self.upper {
            Some(b) => {
                let (u, v) = (0.5 * (b + self.lower), 0.5 * (b - self.lower));
                beta * (x - u) - (2.0 * v).ln() - ln_sinhc(beta * v)
            }
            None => beta * (x - self.lower) + (-beta).ln(),
        }
    }

    /// Inverts `c'(β) = mean`.
    ///
    /// `index` only labels the error. The last bucket is solved in closed
    /// form and never reaches the Langevin inverse.
    pub fn solve_tilt(
        &self,
        index: usize,
        mean: f64,
        inverter: &dyn InverseLangevin,
    ) -> Result<f64> {
        let upper = self.upper.unwrap_or(f64::INFINITY);
        if !(mean > self.lower && mean < upper) {
            return Err(MedError::InfeasibleMean {
                bucket: index,
                mean,
                lower: self.lower,
                upper,
            });
        }
        match self.upper {
            Some(b) => {
                let (u, v) = (0.5 * (b + self.lower), 0.5 * (b - self.lower));
                // Clamp rounding spill at the open ends.
                let y = ((mean - u) / v).clamp(-1.0 + f64::EPSILON, 1.0 - f64::EPSILON);
                Ok(inverter.invert(y)? / v)
            }
            None => Ok(-1.0 / (mean - self.lower)),
        }
    }
}

fn bucket_checked(grid: &StrikeGrid, i: usize) -> Result<Bucket> {
    if i > grid.n() {
        return Err(MedError::InvalidArgument(format!(
            "bucket index {i} out of range 0..={}",
            grid.n()
        )));
    }
    Ok(grid.bucket(i))
}

/// `c_i(β)`.
pub fn c(i: usize, beta: f64, grid: &StrikeGrid) -> Result<f64> {
    bucket_checked(grid, i)?.log_partition(beta)
}

/// `c_i'(β)`.
pub fn c_prime(i: usize, beta: f64, grid: &StrikeGrid) -> Result<f64> {
    bucket_checked(grid, i)?.mean(beta)
}

/// `c_i''(β)`.
pub fn c_double_prime(i: usize, beta: f64, grid: &StrikeGrid) -> Result<f64> {
    bucket_checked(grid, i)?.variance(beta)
}

/// The tilt `β_i` with `c_i'(β_i) = kbar`.
pub fn invert_c_prime(
    i: usize,
    kbar: f64,
    grid: &StrikeGrid,
    inverter: &dyn InverseLangevin,
) -> Result<f64> {
    bucket_checked(grid, i)?.solve_tilt(i, kbar, inverter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::langevin::{ExactInverse, InverseMethod};
    use proptest::prelude::*;

    fn grid(k: &[f64]) -> StrikeGrid {
        StrikeGrid::new(k.to_vec()).unwrap()
    }

    const EXACT: ExactInverse = ExactInverse {
        tol: 1e-15,
        max_iter: 100,
    };

    #[test]
    fn grid_validation() {
        assert!(StrikeGrid::new(vec![]).is_err());
        assert!(StrikeGrid::new(vec![1.0, 1.0]).is_err());
        assert!(StrikeGrid::new(vec![2.0, 1.0]).is_err());
        assert!(StrikeGrid::new(vec![0.0, 1.0]).is_err());
        let g = grid(&[90.0, 100.0]);
        assert_eq!(g.strike(0), 0.0);
        assert_eq!(g.strike(3), f64::INFINITY);
        assert_eq!(g.locate(0.0), 0);
        assert_eq!(g.locate(90.0), 1);
        assert_eq!(g.locate(99.9), 1);
        assert_eq!(g.locate(1e9), 2);
    }

    #[test]
    fn geometry_examples() {
        let g = grid(&[1.0]).geometry();
        assert_eq!((g.mid, g.half_width), (vec![0.5], vec![0.5]));
        let g = grid(&[90.0, 100.0, 110.0]).geometry();
        assert_eq!(g.mid, vec![45.0, 95.0, 105.0]);
        assert_eq!(g.half_width, vec![45.0, 5.0, 5.0]);
        let g = grid(&[7.3]).geometry();
        assert_eq!(g.mid[0], g.half_width[0]);
    }

    #[test]
    fn log_partition_examples() {
        let g = grid(&[2.0]);
        assert!((c(0, 0.0, &g).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((c(0, 1e-15, &g).unwrap() - 2f64.ln()).abs() < 1e-12);
        let g = grid(&[3.0, 10.0]);
        assert!((c(2, -1.0, &g).unwrap() + 10.0).abs() < 1e-15);
        assert!(matches!(c(2, 0.0, &g), Err(MedError::Domain { .. })));
        assert!(matches!(c(2, 0.5, &g), Err(MedError::Domain { .. })));
        assert!(c(3, -1.0, &g).is_err());
    }

    #[test]
    fn log_partition_matches_defining_formula() {
        let g = grid(&[1.0, 2.5]);
        for &beta in &[-3.0, -0.4, 0.02, 0.7, 2.0] {
            let b = g.bucket(1);
            let direct = (((beta * 2.5f64).exp() - beta.exp()) / beta).ln();
            assert!((b.log_partition(beta).unwrap() - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn overflow_guard() {
        let g = grid(&[1.0, 2.0]);
        let v = 0.5;
        let beta = 1000.0 / v;
        let c1 = c(1, beta, &g).unwrap();
        // ln((e^{2β} - e^{β})/β) ≈ 2β - ln β for huge β
        assert!((c1 - (2.0 * beta - beta.ln())).abs() < 1e-9);
        assert!(c(1, -beta, &g).unwrap().is_finite());
    }

    #[test]
    fn derivative_examples() {
        let g = grid(&[90.0, 100.0, 110.0]);
        let geo = g.geometry();
        for i in 0..3 {
            assert_eq!(c_prime(i, 0.0, &g).unwrap(), geo.mid[i]);
            let var0 = c_double_prime(i, 0.0, &g).unwrap();
            assert!((var0 - geo.half_width[i].powi(2) / 3.0).abs() < 1e-12);
            let hi = c_prime(i, 1e3, &g).unwrap();
            let lo = c_prime(i, -1e3, &g).unwrap();
            assert!((hi - g.strike(i + 1)).abs() < 0.01 && hi < g.strike(i + 1));
            assert!((lo - g.strike(i)).abs() < 0.01 && lo > g.strike(i));
        }
        let g = grid(&[10.0]);
        assert_eq!(c_prime(1, -2.0, &g).unwrap(), 10.5);
        assert_eq!(c_double_prime(1, -2.0, &g).unwrap(), 0.25);
    }

    #[test]
    fn second_derivative_matches_finite_difference() {
        let g = grid(&[1.0, 2.0, 4.0]);
        let h = 1e-5;
        for i in 0..=3 {
            let beta = if i == 3 { -0.3 } else { 0.3 };
            let fd =
                (c_prime(i, beta + h, &g).unwrap() - c_prime(i, beta - h, &g).unwrap()) / (2.0 * h);
            let an = c_double_prime(i, beta, &g).unwrap();
            assert!(((fd - an) / an).abs() < 1e-6, "bucket {i}: {fd} vs {an}");
        }
    }

    #[test]
    fn invert_examples() {
        let g = grid(&[90.0, 100.0, 110.0]);
        let m = InverseMethod::default();
        assert_eq!(invert_c_prime(1, 95.0, &g, &m).unwrap(), 0.0);
        assert_eq!(invert_c_prime(3, 112.0, &g, &m).unwrap(), -0.5);
        for &kbar in &[90.001, 93.0, 99.99] {
            let beta = invert_c_prime(1, kbar, &g, &EXACT).unwrap();
            assert!((c_prime(1, beta, &g).unwrap() - kbar).abs() <= 1e-10 * 5.0);
        }
        for &bad in &[90.0, 100.0, 120.0] {
            match invert_c_prime(1, bad, &g, &m) {
                Err(MedError::InfeasibleMean { bucket: 1, .. }) => {}
                other => panic!("expected infeasible mean, got {other:?}"),
            }
        }
        assert!(invert_c_prime(3, 110.0, &g, &m).is_err());
    }

    #[test]
    fn entropy_kernel_matches_direct_formula() {
        for &z in &[0.011f64, 0.3, 1.0, 4.0, 19.0, 25.0, 80.0] {
            let direct = (z.sinh() / z).ln() - z * langevin_unchecked(z);
            assert!((tilt_entropy_kernel(z) - direct).abs() < 1e-12, "z = {z}");
            assert_eq!(tilt_entropy_kernel(z), tilt_entropy_kernel(-z));
        }
        let z = SINHC_SERIES;
        let series = tilt_entropy_kernel(z * (1.0 - 1e-12));
        let direct = tilt_entropy_kernel(z * (1.0 + 1e-12));
        assert!((series - direct).abs() < 1e-14);
    }

    #[test]
    fn ln_sinhc_regimes_join() {
        let z = SINHC_SERIES;
        let below = ln_sinhc(z * (1.0 - 1e-12));
        assert!((below - (z.sinh() / z).ln()).abs() < 1e-15);
        let z = SINH_ASYMPTOTIC;
        let above = ln_sinhc(z);
        assert!((above - (z.sinh() / z).ln()).abs() < 1e-14 * z);
    }

    fn arb_grid() -> impl Strategy<Value = StrikeGrid> {
        prop::collection::vec(0.05f64..1.5, 1..6).prop_map(|gaps| {
            let mut k = 0.0;
            StrikeGrid::new(
                gaps.iter()
                    .map(|g| {
                        k += g;
                        k
                    })
                    .collect(),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn removable_singularity(g in arb_grid(), e in -16i32..=-4, neg in any::<bool>()) {
            let beta = if neg { -(10f64.powi(e)) } else { 10f64.powi(e) };
            for i in 0..g.n() {
                let quad = c(i, 0.0, &g).unwrap()
                    + beta * c_prime(i, 0.0, &g).unwrap()
                    + 0.5 * beta * beta * c_double_prime(i, 0.0, &g).unwrap();
                prop_assert!((c(i, beta, &g).unwrap() - quad).abs() <= 1e-8);
            }
        }

        #[test]
        fn convex_and_mean_inside(g in arb_grid(), beta in -40.0f64..40.0) {
            for i in 0..=g.n() {
                let b = if i == g.n() { -beta.abs() - 1e-3 } else { beta };
                prop_assert!(c_double_prime(i, b, &g).unwrap() > 0.0);
                let m = c_prime(i, b, &g).unwrap();
                prop_assert!(m > g.strike(i));
                if i < g.n() {
                    prop_assert!(m < g.strike(i + 1));
                }
            }
        }

        #[test]
        fn inversion_round_trip(g in arb_grid(), t in 0.001f64..0.999, tail in 0.01f64..5.0) {
            for i in 0..=g.n() {
                let kbar = if i == g.n() {
                    g.strike(i) + tail
                } else {
                    g.strike(i) + t * (g.strike(i + 1) - g.strike(i))
                };
                let beta = invert_c_prime(i, kbar, &g, &EXACT).unwrap();
                let back = c_prime(i, beta, &g).unwrap();
                prop_assert!(((back - kbar) / kbar).abs() <= 1e-10);
            }
        }

        #[test]
        fn derivatives_match_finite_differences(g in arb_grid(), beta in -8.0f64..8.0) {
            let h = 1e-5;
            for i in 0..g.n() {
                let fd1 = (c(i, beta + h, &g).unwrap() - c(i, beta - h, &g).unwrap()) / (2.0 * h);
                let fd2 = (c_prime(i, beta + h, &g).unwrap() - c_prime(i, beta - h, &g).unwrap()) / (2.0 * h);
                let d1 = c_prime(i, beta, &g).unwrap();
                let d2 = c_double_prime(i, beta, &g).unwrap();
                if beta.abs() > 0.1 {
                    prop_assert!(((fd1 - d1) / d1).abs() <= 1e-6);
                    prop_assert!(((fd2 - d2) / d2).abs() <= 1e-6);
                } else {
                    prop_assert!((fd1 - d1).abs() <= 1e-6);
                    prop_assert!((fd2 - d2).abs() <= 1e-6);
                }
            }
        }

        #[test]
        fn last_bucket_ratio_is_one(g in arb_grid(), beta in -50.0f64..-1e-3) {
            let n = g.n();
            let shift = c_prime(n, beta, &g).unwrap() - g.strike(n);
            let ratio = shift * shift / c_double_prime(n, beta, &g).unwrap();
            prop_assert!((ratio - 1.0).abs() <= 1e-12);
        }
    }
}
