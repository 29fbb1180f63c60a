//! The Langevin function `L(x) = coth(x) - 1/x`, its derivative, and
//! approximations of its inverse.
//!
//! `L` is odd, strictly increasing and maps the real line onto `(-1, 1)`.
//! Inverting it turns a bucket-mean offset into an exponential tilt, which is
//! the only non-linear step needed to build a maximum-entropy density.
//!
//! Both `L` and `L'` switch to their Taylor series for `|x| < 1e-2`. Up to
//! `|x| = 2`, `L` comes from Lambert's continued fraction, which has no
//! cancellation; beyond that `coth x - 1/x` is accurate as written.

mod inverse;

pub use inverse::{
    Bergstrom, ExactInverse, InverseLangevin, InverseMethod, InverterRegistry, Pade,
    PolishedBergstrom, RoundedPade, TaylorSeries,
};

use crate::error::{MedError, Result};

/// Below this magnitude `L` and `L'` are evaluated by their series.
pub const SERIES_THRESHOLD: f64 = 1e-2;

/// Upper end of the continued-fraction regime of `L`.
const FRACTION_LIMIT: f64 = 2.0;

/// Bergström's switch point between the tangent and the pole branch.
pub const BERGSTROM_SWITCH: f64 = 0.84136;

/// `inv_exact` refuses inputs with `|y| >= 1 - EXACT_DOMAIN_GUARD`.
pub const EXACT_DOMAIN_GUARD: f64 = 1e-12;

/// Default order of the truncated inverse series (all printed terms).
pub const DEFAULT_TAYLOR_ORDER: u32 = 7;

/// Newton steps applied after the Bergström seed by [`inv_polished`].
pub const DEFAULT_POLISH_STEPS: u32 = 2;

/// Taylor coefficients of `L^{-1}` at zero for orders 1, 3, 5 and 7.
const INV_TAYLOR_COEFFS: [f64; 4] = [3.0, 9.0 / 5.0, 297.0 / 175.0, 1539.0 / 875.0];

/// Langevin function, checked for finite input.
pub fn langevin(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(MedError::Domain {
            what: "langevin",
            value: x,
        });
    }
    Ok(langevin_unchecked(x))
}

/// Derivative `L'(x) = 1/x^2 - 1/sinh^2(x)`, checked for finite input.
pub fn langevin_prime(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(MedError::Domain {
            what: "langevin_prime",
            value: x,
        });
    }
    Ok(langevin_prime_unchecked(x))
}

/// Langevin function without the finiteness check; NaN propagates.
#[inline]
pub fn langevin_unchecked(x: f64) -> f64 {
    let ax = x.abs();
    if ax < SERIES_THRESHOLD {
        langevin_series(x)
    } else if ax < FRACTION_LIMIT {
        langevin_fraction(x)
    } else {
        langevin_direct(x)
    }
}

/// `L'` without the finiteness check.
///
/// Three regimes: the series near zero, `1 - L^2 - 2L/x` on the middle
/// range (no cancellation since the result stays above 0.1), and the
/// defining formula for `|x| >= 2` where `1/sinh^2` is small.
#[inline]
pub fn langevin_prime_unchecked(x: f64) -> f64 {
    let ax = x.abs();
    if ax < SERIES_THRESHOLD {
        let x2 = x * x;
        1.0 / 3.0 - x2 / 15.0 + 2.0 * x2 * x2 / 189.0
    } else if ax < 2.0 {
        let l = langevin_fraction(ax);
        1.0 - l * l - 2.0 * l / ax
    } else {
        let s = ax.sinh();
        1.0 / (ax * ax) - 1.0 / (s * s)
    }
}

/// Odd series `x/3 - x^3/45 + 2x^5/945`.
#[inline]
pub(crate) fn langevin_series(x: f64) -> f64 {
    let x2 = x * x;
    x * (1.0 / 3.0 - x2 / 45.0 + 2.0 * x2 * x2 / 945.0)
}

/// `x / (3 + x^2 / (5 + x^2 / (7 + ...)))`, truncated at depth 20; the
/// truncation error is far below one ulp for `|x| < 2`.
#[inline]
fn langevin_fraction(x: f64) -> f64 {
    let x2 = x * x;
    let mut d = 43.0;
    for k in (1..=20).rev() {
        d = (2 * k + 1) as f64 + x2 / d;
    }
    x / d
}

#[inline]
pub(crate) fn langevin_direct(x: f64) -> f64 {
    1.0 / x.tanh() - 1.0 / x
}

fn check_open_unit(method: &'static str, y: f64, bound: f64) -> Result<()> {
    if y.is_finite() && y.abs() < bound {
        Ok(())
    } else {
        Err(MedError::OutOfDomain {
            method,
            value: y,
            bound,
        })
    }
}

/// Truncated inverse series `3y + 9/5 y^3 + 297/175 y^5 + 1539/875 y^7`,
/// keeping the terms up to `order` (1, 3, 5 or 7).
pub fn inv_taylor(y: f64, order: u32) -> Result<f64> {
    if !matches!(order, 1 | 3 | 5 | 7) {
        return Err(MedError::InvalidArgument(format!(
            "inverse Langevin Taylor order must be 1, 3, 5 or 7, got {order}"
        )));
    }
    check_open_unit("taylor", y, 1.0)?;
    let terms = (order as usize + 1) / 2;
    let y2 = y * y;
    // Horner in y^2 over the retained coefficients.
    let poly = INV_TAYLOR_COEFFS[..terms]
        .iter()
        .rev()
        .fold(0.0, |acc, &c| acc * y2 + c);
    Ok(y * poly)
}

/// Padé approximant `y (3 - 36/35 y^2) / (1 - 33/35 y^2)`.
///
/// Its poles sit at `±sqrt(35/33)` rather than at `±1`.
pub fn inv_pade(y: f64) -> Result<f64> {
    check_open_unit("pade", y, (35.0f64 / 33.0).sqrt())?;
    let y2 = y * y;
    Ok(y * (3.0 - 36.0 / 35.0 * y2) / (1.0 - 33.0 / 35.0 * y2))
}

/// Rounded Padé approximant `y (3 - y^2) / (1 - y^2)`.
pub fn inv_rounded_pade(y: f64) -> Result<f64> {
    check_open_unit("rounded_pade", y, 1.0)?;
    let y2 = y * y;
    Ok(y * (3.0 - y2) / (1.0 - y2))
}

/// Bergström's piecewise approximation, relative error below `6.4e-4`.
///
/// The switch point itself belongs to the pole branch.
pub fn inv_bergstrom(y: f64) -> Result<f64> {
    check_open_unit("bergstrom", y, 1.0)?;
    Ok(bergstrom_unchecked(y))
}

#[inline]
fn bergstrom_unchecked(y: f64) -> f64 {
    if y.abs() < BERGSTROM_SWITCH {
        1.31446 * (1.58986 * y).tan() + 0.91209 * y
    } else {
        1.0 / (y.signum() - y)
    }
}

/// Solves `L(x) = y` to `|L(x) - y| <= tol`.
///
/// Newton from the Bergström seed, safeguarded by a bracket that is grown
/// geometrically from the seed; a bisection step replaces any Newton step
/// that leaves the bracket or fails to shrink the residual.
pub fn inv_exact(y: f64, tol: f64, max_iter: u32) -> Result<f64> {
    if !(tol > 0.0) || max_iter == 0 {
        return Err(MedError::InvalidArgument(format!(
            "inv_exact needs tol > 0 and max_iter >= 1 (got {tol}, {max_iter})"
        )));
    }
    check_open_unit("exact", y, 1.0 - EXACT_DOMAIN_GUARD)?;
    if y == 0.0 {
        return Ok(0.0);
    }
    // Work on |y| and restore the sign; L is odd.
    let target = y.abs();
    let residual = |x: f64| langevin_unchecked(x) - target;

    let mut x = bergstrom_unchecked(target);
    let mut r = residual(x);
    if r.abs() <= tol {
        return Ok(x.copysign(y));
    }
    let (mut lo, mut hi) = if r < 0.0 { (x, x) } else { (0.0, x) };
    if r < 0.0 {
        let mut step = x.max(1.0);
        loop {
            hi = lo + step;
            if residual(hi) > 0.0 {
                break;
            }
            lo = hi;
            step *= 2.0;
            if !hi.is_finite() {
                return Err(MedError::IterationFailure {
                    last: x.copysign(y),
                    residual: r,
                });
            }
        }
    }

    for _ in 0..max_iter {
        let slope = langevin_prime_unchecked(x);
        let newton = x - r / slope;
        let mut next = None;
        if newton.is_finite() && newton > lo && newton < hi {
            let rn = residual(newton);
            if rn.abs() < r.abs() {
                next = Some((newton, rn));
            }
        }
        let (xn, rn) = next.unwrap_or_else(|| {
            let mid = 0.5 * (lo + hi);
            (mid, residual(mid))
        });
        x = xn;
        r = rn;
        if r.abs() <= tol {
            return Ok(x.copysign(y));
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Err(MedError::IterationFailure {
        last: x.copysign(y),
        residual: r,
    })
}

/// Bergström seed followed by `steps` unguarded Newton steps on `L(x) = y`.
pub fn inv_polished(y: f64, steps: u32) -> Result<f64> {
    check_open_unit("polished", y, 1.0)?;
    if y == 0.0 {
        return Ok(0.0);
    }
    let mut x = bergstrom_unchecked(y);
    for _ in 0..steps {
        let slope = langevin_prime_unchecked(x);
        if !(slope > 0.0) {
            break;
        }
        let next = x - (langevin_unchecked(x) - y) / slope;
        if !next.is_finite() {
            break;
        }
        x = next;
    }
    Ok(x)
}

/// Inverts `L` at `y` with the chosen method.
pub fn invert(y: f64, method: &InverseMethod) -> Result<f64> {
    method.invert(y)
}
