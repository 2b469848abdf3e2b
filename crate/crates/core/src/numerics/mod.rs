//! Scalar kernels shared by the rest of the crate: the Gaussian tail and
//! density, adaptive quadrature, small SPD solves and bisection.

mod cholesky;
mod quadrature;

pub use cholesky::{solve_spd, Cholesky};
pub use quadrature::{
    integrate, integrate_piecewise, integrate_piecewise_detailed, Integral, QuadratureSpec,
};

use crate::error::{invalid, Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_677_939_946_059_934_381_868_5;

/// Upper tail of the standard normal, `P(Z > x)`.
///
/// Evaluated through `erfc`, which keeps full relative precision in the
/// upper tail; the lower tail is taken as `1 - Q(-x)` implicitly by erfc.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal density.
#[inline]
pub fn std_normal_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Zero-mean normal density with the given variance.
pub fn gaussian_pdf(x: f64, variance: f64) -> Result<f64> {
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(invalid(format!(
            "variance must be positive, got {variance}"
        )));
    }
    Ok(normal_pdf_unchecked(x, variance))
}

#[inline]
pub(crate) fn normal_pdf_unchecked(x: f64, variance: f64) -> f64 {
    FRAC_1_SQRT_2PI / variance.sqrt() * (-0.5 * x * x / variance).exp()
}

/// Bisection root finder. `f(lo)` and `f(hi)` must differ in sign; returns
/// the midpoint of the final bracket once its width is at most `tol`.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(invalid(format!(
            "bisection tolerance must be positive, got {tol}"
        )));
    }
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo.signum() != f_hi.signum()) || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::Bracketing { lo, hi, f_lo, f_hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
