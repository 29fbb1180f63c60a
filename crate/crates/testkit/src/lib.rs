//! Independent numerical oracles for the medcal test suites.
//!
//! Nothing here depends on medcal itself: each routine is a generic,
//! brute-force method used to check a closed form from the outside.

pub mod quad {
    //! Adaptive Gauss–Kronrod (7/15) quadrature.

    const XGK: [f64; 8] = [
        0.991_455_371_120_812_6,
        0.949_107_912_342_758_5,
        0.864_864_423_359_769_1,
        0.741_531_185_599_394_4,
        0.586_087_235_467_691_1,
        0.405_845_151_377_397_2,
        0.207_784_955_007_898_5,
        0.0,
    ];
    const WGK: [f64; 8] = [
        0.022_935_322_010_529_22,
        0.063_092_092_629_978_55,
        0.104_790_010_322_250_2,
        0.140_653_259_715_525_9,
        0.169_004_726_639_267_9,
        0.190_350_578_064_785_4,
        0.204_432_940_075_298_9,
        0.209_482_141_084_728_0,
    ];
    const WG: [f64; 4] = [
        0.129_484_966_168_869_7,
        0.279_705_391_489_276_7,
        0.381_830_050_505_118_9,
        0.417_959_183_673_469_4,
    ];

    fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = f(c);
        let mut kronrod = fc * WGK[7];
        let mut gauss = fc * WG[3];
        for j in 0..7 {
            let x = h * XGK[j];
            let s = f(c - x) + f(c + x);
            kronrod += WGK[j] * s;
            if j % 2 == 1 {
                gauss += WG[j / 2] * s;
            }
        }
        (kronrod * h, ((kronrod - gauss) * h).abs())
    }

    fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (val, err) = gk15(f, a, b);
        if err <= tol || depth == 0 || (b - a).abs() < 1e-14 * a.abs().max(1.0) {
            return val;
        }
        let m = 0.5 * (a + b);
        adapt(f, a, m, 0.5 * tol, depth - 1) + adapt(f, m, b, 0.5 * tol, depth - 1)
    }

    /// `∫_a^b f` to roughly absolute accuracy `tol`.
    pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        adapt(&f, a, b, tol, 50)
    }

    /// `∫_a^∞ f` for an integrand that decays at least like `e^{-(x-a)/scale}`.
    ///
    /// The half-line is cut into panels of one decay scale each, out to 80 scales.
    pub fn integrate_tail<F: Fn(f64) -> f64>(f: F, a: f64, scale: f64, tol: f64) -> f64 {
        let panels = 80;
        (0..panels)
            .map(|k| {
                let lo = a + k as f64 * scale;
                integrate(&f, lo, lo + scale, tol / panels as f64)
            })
            .sum()
    }
}

pub mod optimize {
    //! One-dimensional search.

    /// Golden-section search for the maximiser of a unimodal `f` on `[lo, hi]`.
    pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let mut f1 = f(x1);
        let mut f2 = f(x2);
        while hi - lo > tol {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = f(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = f(x1);
            }
        }
        0.5 * (lo + hi)
    }

    /// Root of an increasing `f` on `[lo, hi]` by bisection.
    pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
        assert!(f(lo) <= 0.0 && f(hi) >= 0.0, "root not bracketed");
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if mid == lo && mid == hi {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

pub mod diff {
    //! Central finite differences.

    /// Gradient of a scalar function by central differences with step `h`.
    pub fn gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
        let mut probe = x.to_vec();
        (0..x.len())
            .map(|j| {
                probe[j] = x[j] + h;
                let up = f(&probe);
                probe[j] = x[j] - h;
                let down = f(&probe);
                probe[j] = x[j];
                (up - down) / (2.0 * h)
            })
            .collect()
    }

    /// Dense Jacobian `J[i][j] = ∂g_i/∂x_j` by central differences, one
    /// column per pair of evaluations.
    pub fn jacobian<F: Fn(&[f64]) -> Vec<f64>>(g: F, x: &[f64], h: f64) -> Vec<Vec<f64>> {
        let n = x.len();
        let mut probe = x.to_vec();
        let mut jac = vec![vec![0.0; n]; n];
        for j in 0..n {
            probe[j] = x[j] + h;
            let up = g(&probe);
            probe[j] = x[j] - h;
            let down = g(&probe);
            probe[j] = x[j];
            for i in 0..n {
                jac[i][j] = (up[i] - down[i]) / (2.0 * h);
            }
        }
        jac
    }
}

pub mod linalg {
    //! Small dense symmetric eigenproblems and solves.

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
    pub fn symmetric_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
        let n = a.len();
        let mut m: Vec<Vec<f64>> = a.to_vec();
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| m[i][j] * m[i][j])
                .sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if m[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (mkp, mkq) = (m[k][p], m[k][q]);
                        m[k][p] = c * mkp - s * mkq;
                        m[k][q] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let (mpk, mqk) = (m[p][k], m[q][k]);
                        m[p][k] = c * mpk - s * mqk;
                        m[q][k] = s * mpk + c * mqk;
                    }
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ev
    }

    /// Solves a small dense system by Gaussian elimination with partial pivoting.
    pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a
            .iter()
            .zip(b)
            .map(|(row, &r)| {
                let mut row = row.clone();
                row.push(r);
                row
            })
            .collect();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
                .unwrap();
            m.swap(col, piv);
            for row in col + 1..n {
                let f = m[row][col] / m[col][col];
                for k in col..=n {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
            x[i] = (m[i][n] - s) / m[i][i];
        }
        x
    }
}

pub mod maxent {
    //! Discrete maximum entropy under linear moment constraints.
    //!
    //! Maximises `-Σ w_k f_k ln f_k` over densities `f` sampled at nodes `x_k`
    //! with quadrature weights `w_k`, subject to `Σ w_k f_k = 1` and
    //! `Σ w_k f_k φ_j(x_k) = t_j`. The solution is `f ∝ exp(λ·φ)`; the
    //! multipliers minimise the convex dual `ln Σ w exp(λ·(φ - t))`, found
    //! by damped Newton.

    use super::linalg;

    pub struct Solution {
        pub density: Vec<f64>,
        pub entropy: f64,
        pub multipliers: Vec<f64>,
        pub iterations: usize,
    }

    pub fn solve(
        nodes: &[f64],
        weights: &[f64],
        features: &[&dyn Fn(f64) -> f64],
        targets: &[f64],
        tol: f64,
    ) -> Solution {
        let m = features.len();
        let phi: Vec<Vec<f64>> = nodes
            .iter()
            .map(|&x| {
                features
                    .iter()
                    .zip(targets)
                    .map(|(f, t)| f(x) - t)
                    .collect()
            })
            .collect();
        let dual = |lam: &[f64]| -> (f64, Vec<f64>, Vec<Vec<f64>>) {
            let expo: Vec<f64> = phi
                .iter()
                .map(|p| p.iter().zip(lam).map(|(a, b)| a * b).sum::<f64>())
                .collect();
            let shift = expo.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let u: Vec<f64> = expo
                .iter()
                .zip(weights)
                .map(|(e, w)| w * (e - shift).exp())
                .collect();
            let z: f64 = u.iter().sum();
            let mut g = vec![0.0; m];
            let mut h = vec![vec![0.0; m]; m];
            for (uk, p) in u.iter().zip(&phi) {
                let q = uk / z;
                for a in 0..m {
                    g[a] += q * p[a];
                    for b in 0..m {
                        h[a][b] += q * p[a] * p[b];
                    }
                }
            }
            for a in 0..m {
                for b in 0..m {
                    h[a][b] -= g[a] * g[b];
                }
            }
            (z.ln() + shift, g, h)
        };
        let mut lam = vec![0.0; m];
        let mut iterations = 0;
        for it in 0..500 {
            iterations = it;
            let (val, g, h) = dual(&lam);
            let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if gn < tol {
                break;
            }
            let step = linalg::solve(&h, &g);
            let mut t = 1.0;
            loop {
                let trial: Vec<f64> = lam.iter().zip(&step).map(|(l, s)| l - t * s).collect();
                let (tv, _, _) = dual(&trial);
                if tv <= val || t < 1e-12 {
                    lam = trial;
                    break;
                }
                t *= 0.5;
            }
        }
        let expo: Vec<f64> = nodes
            .iter()
            .map(|&x| {
                features
                    .iter()
                    .zip(&lam)
                    .map(|(f, l)| l * f(x))
                    .sum::<f64>()
            })
            .collect();
        let shift = expo.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let raw: Vec<f64> = expo.iter().map(|e| (e - shift).exp()).collect();
        let z: f64 = raw.iter().zip(weights).map(|(r, w)| r * w).sum();
        let density: Vec<f64> = raw.iter().map(|r| r / z).collect();
        let entropy = -density
            .iter()
            .zip(weights)
            .filter(|(f, _)| **f > 0.0)
            .map(|(f, w)| w * f * f.ln())
            .sum::<f64>();
        Solution {
            density,
            entropy,
            multipliers: lam,
            iterations,
        }
    }
}
