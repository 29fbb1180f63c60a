#![allow(dead_code)]

use medcal::med::{MarketQuotes, PiecewiseExpDensity};
use medcal::partition::{c, StrikeGrid};
use medcal_testkit::quad;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` strikes starting near 60 with random gaps.
pub fn random_grid(rng: &mut ChaCha8Rng, n: usize) -> StrikeGrid {
    let mut k = rng.gen_range(40.0..70.0);
    let span = rng.gen_range(60.0..120.0);
    let mut strikes = Vec::with_capacity(n);
    for _ in 0..n {
        strikes.push(k);
        k += span / n as f64 * rng.gen_range(0.5..1.5);
    }
    StrikeGrid::new(strikes).unwrap()
}

/// Random tilts: `|β V| < zmax` on finite buckets, tail mean offset in
/// `[2, 30]`.
pub fn random_tilts(rng: &mut ChaCha8Rng, grid: &StrikeGrid, zmax: f64) -> Vec<f64> {
    grid.buckets()
        .map(|b| match b.half_width() {
            Some(v) => rng.gen_range(-zmax..zmax) / v,
            None => -1.0 / rng.gen_range(2.0..30.0),
        })
        .collect()
}

/// Density with independent random masses and tilts; generally
/// discontinuous at the strikes.
pub fn random_density(rng: &mut ChaCha8Rng, n: usize) -> PiecewiseExpDensity {
    let grid = random_grid(rng, n);
    let beta = random_tilts(rng, &grid, 4.0);
    let w: Vec<f64> = (0..=n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    let p = w.iter().map(|x| x / total).collect();
    PiecewiseExpDensity::from_tilts(grid, p, beta).unwrap()
}

/// Masses chosen so that the density is continuous at every strike.
pub fn continuous_density(grid: StrikeGrid, beta: Vec<f64>) -> PiecewiseExpDensity {
    let n = grid.n();
    let edge = |i: usize, k: f64| beta[i] * k - c(i, beta[i], &grid).unwrap();
    let mut log_p = vec![0.0; n + 1];
    for j in 1..=n {
        let k = grid.strike(j);
        log_p[j] = log_p[j - 1] + edge(j - 1, k) - edge(j, k);
    }
    let shift = log_p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_p.iter().map(|l| (l - shift).exp()).collect();
    let total: f64 = w.iter().sum();
    let p = w.iter().map(|x| x / total).collect();
    PiecewiseExpDensity::from_tilts(grid, p, beta).unwrap()
}

/// Continuous density following the log-slope of a gamma law with mean
/// `100` and shape `25`, with the tilts jittered by up to `jitter`.
pub fn market_like_density(rng: &mut ChaCha8Rng, n: usize, jitter: f64) -> PiecewiseExpDensity {
    let (shape, scale) = (25.0, 4.0);
    let lo = 70.0;
    let hi = 150.0;
    let strikes: Vec<f64> = if n == 1 {
        vec![100.0]
    } else {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    };
    let grid = StrikeGrid::new(strikes).unwrap();
    let slope = |x: f64| (shape - 1.0) / x - 1.0 / scale;
    let beta: Vec<f64> = grid
        .buckets()
        .map(|b| {
            let x = b.mid().unwrap_or(b.lower);
            let s = slope(x.max(1.0));
            let s = if b.is_tail() { s.min(-0.05) } else { s };
            s * (1.0 + rng.gen_range(-jitter..=jitter))
        })
        .collect();
    continuous_density(grid, beta)
}

pub fn calls_only(d: &PiecewiseExpDensity) -> MarketQuotes {
    d.implied_quotes().with_digitals(None).unwrap()
}

/// Applies `g` on each bucket of `grid` and sums, integrating the tail out
/// to 80 multiples of `tail_scale`.
pub fn integrate_buckets<F: Fn(f64) -> f64>(
    grid: &StrikeGrid,
    g: F,
    tail_scale: f64,
    tol: f64,
) -> f64 {
    let n = grid.n();
    let mut total = 0.0;
    for i in 0..n {
        total += quad::integrate(&g, grid.strike(i), grid.strike(i + 1), tol);
    }
    total + quad::integrate_tail(&g, grid.strike(n), tail_scale, tol)
}

/// `-∫ f ln f` by quadrature.
pub fn quadrature_entropy(d: &PiecewiseExpDensity) -> f64 {
    let scale = -1.0 / d.params().beta[d.n()];
    -integrate_buckets(
        d.grid(),
        |x| {
            let f = d.pdf(x);
            if f > 0.0 {
                f * d.ln_pdf(x)
            } else {
                0.0
            }
        },
        scale,
        1e-12,
    )
}

/// `∫ |f - g|` for two densities on the same grid.
pub fn l1_distance(a: &PiecewiseExpDensity, b: &PiecewiseExpDensity) -> f64 {
    let scale = (-1.0 / a.params().beta[a.n()]).max(-1.0 / b.params().beta[b.n()]);
    integrate_buckets(a.grid(), |x| (a.pdf(x) - b.pdf(x)).abs(), scale, 1e-12)
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
