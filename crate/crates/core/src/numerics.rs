//! Standard normal functions and adaptive quadrature.

use statrs::function::erf;
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("adaptive quadrature on [{a}, {b}] did not converge to {tol:e}")]
    NoConvergence { a: f64, b: f64, tol: f64 },
    #[error("integrand is not finite on [{a}, {b}]")]
    NonFinite { a: f64, b: f64 },
}

/// Standard normal CDF `Φ(x)`.
pub fn normal_cdf<F: Scalar>(x: F) -> F {
    F::lit(phi(x.as_f64()))
}

#[inline]
fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[inline]
fn density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal density `φ(x)`.
pub fn normal_pdf<F: Scalar>(x: F) -> F {
    F::lit(density(x.as_f64()))
}

/// Standard normal quantile `Φ⁻¹(p)`; `-∞` at 0 and `+∞` at 1.
///
/// A rational initial guess is refined by Newton steps against `Φ`, working
/// in whichever tail keeps relative precision.
pub fn normal_quantile<F: Scalar>(p: F) -> F {
    let p = p.as_f64();
    if p <= 0.0 {
        return F::neg_infinity();
    }
    if p >= 1.0 {
        return F::infinity();
    }
    if p > 0.5 {
        return F::lit(-lower_quantile(1.0 - p));
    }
    F::lit(lower_quantile(p))
}

/// `Φ⁻¹(p)` for `p ≤ 1/2`.
fn lower_quantile(p: f64) -> f64 {
    let mut z = -std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * p);
    for _ in 0..3 {
        let d = density(z);
        if d <= 0.0 || !z.is_finite() {
            break;
        }
        // Halley step on Φ(z) − p.
        let err = (phi(z) - p) / d;
        let step = err / (1.0 + 0.5 * z * err);
        if !step.is_finite() {
            break;
        }
        z -= step;
        if step.abs() <= 1e-16 * z.abs().max(1.0) {
            break;
        }
    }
    z
}

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Scalar>(f: impl Fn(F) -> F, a: F, b: F, tol: F) -> Result<F, QuadratureError> {
    if a == b {
        return Ok(F::zero());
    }
    if a > b {
        return integrate(f, b, a, tol).map(|v| -v);
    }
    // Start from a fixed split so narrow features are not missed by the
    // first Simpson estimate.
    const INITIAL_PANELS: usize = 16;
    let width = (b - a) / F::lit(INITIAL_PANELS as f64);
    let mut total = F::zero();
    for i in 0..INITIAL_PANELS {
        let lo = a + width * F::lit(i as f64);
        let hi = if i + 1 == INITIAL_PANELS { b } else { lo + width };
        let (flo, fhi) = (f(lo), f(hi));
        let mid = (lo + hi) / F::lit(2.0);
        let fmid = f(mid);
        let est = simpson(lo, hi, flo, fmid, fhi);
        total = total + adapt(&f, lo, hi, flo, fmid, fhi, est, tol / F::lit(INITIAL_PANELS as f64), 48)?;
    }
    if !total.is_finite() {
        return Err(QuadratureError::NonFinite { a: a.as_f64(), b: b.as_f64() });
    }
    Ok(total)
}

#[inline]
fn simpson<F: Scalar>(a: F, b: F, fa: F, fm: F, fb: F) -> F {
    (b - a) / F::lit(6.0) * (fa + F::lit(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Scalar>(
    f: &impl Fn(F) -> F,
    a: F,
    b: F,
    fa: F,
    fm: F,
    fb: F,
    whole: F,
    tol: F,
    depth: u32,
) -> Result<F, QuadratureError> {
    let m = (a + b) / F::lit(2.0);
    let lm = (a + m) / F::lit(2.0);
    let rm = (m + b) / F::lit(2.0);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return Err(QuadratureError::NonFinite { a: a.as_f64(), b: b.as_f64() });
    }
    if delta.abs() <= F::lit(15.0) * tol || (b - a).abs() <= F::epsilon() * m.abs() {
        return Ok(left + right + delta / F::lit(15.0));
    }
    if depth == 0 {
        return Err(QuadratureError::NoConvergence { a: a.as_f64(), b: b.as_f64(), tol: tol.as_f64() });
    }
    let half = tol / F::lit(2.0);
    Ok(adapt(f, a, m, fa, flm, fm, left, half, depth - 1)? + adapt(f, m, b, fm, frm, fb, right, half, depth - 1)?)
}
