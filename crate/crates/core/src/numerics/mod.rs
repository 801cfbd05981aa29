//! Special functions and quadrature rules used by the analytic formulas.

mod hermite;
mod quad;
mod special;

pub use hermite::{gauss_hermite_rule, QuadratureRule, DEFAULT_HERMITE_ORDER, MAX_HERMITE_ORDER};
pub use quad::{
    integrate, normal_expectation, Integral, QuadConfig, DEFAULT_ABS_TOL, DEFAULT_MAX_INTERVALS,
    DEFAULT_REL_TOL,
};
pub use special::{
    erfc, gamma_fn, gaussian_q, gaussian_q_inv, ln_gamma, lower_incomplete_gamma, poisson_head_sum,
    regularized_lower_gamma, regularized_upper_gamma, stable_prefactor_c,
};

pub(crate) use special::{ln_gamma_unchecked, reg_upper_unchecked};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative tolerance of [`truncated_exp_moment_integral`].
pub const MOMENT_INTEGRAL_REL_TOL: f64 = 1e-12;

/// I(x, y) = ∫_0^1 (1 - t)^x e^{-y t} dt.
///
/// The substitution w = (1 - t)^{x+1} removes the endpoint singularity of
/// the integrand for fractional `x`, leaving
/// I = 1/(x+1) ∫_0^1 exp(-y (1 - w^{1/(x+1)})) dw.
pub fn truncated_exp_moment_integral<T: Real>(x: T, y: T) -> Result<T> {
    if !(x >= T::zero()) || !(y >= T::zero()) {
        return Err(Error::domain(
            "truncated_exp_moment_integral",
            format!(
                "arguments must be nonnegative, got ({}, {})",
                x.as_f64(),
                y.as_f64()
            ),
        ));
    }
    let p = T::one() / (x + T::one());
    let cfg = QuadConfig {
        abs_tol: T::zero(),
        rel_tol: T::tol(MOMENT_INTEGRAL_REL_TOL),
        ..QuadConfig::default()
    };
    let r = integrate(
        |w| (-y * (T::one() - w.powf(p))).exp(),
        T::zero(),
        T::one(),
        &cfg,
    );
    if !r.converged {
        return Err(Error::NotConverged {
            op: "truncated_exp_moment_integral",
            reason: format!(
                "error estimate {} after {} evaluations",
                r.error.as_f64(),
                r.evaluations
            ),
        });
    }
    Ok(p * r.value)
}

/// Finds a root of a monotone function on `[lo, hi]` by bisection.
///
/// `f(lo)` and `f(hi)` must have opposite signs (or one of them be zero).
pub fn bisect<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    mut lo: T,
    mut hi: T,
    tol: T,
    max_iter: usize,
) -> Result<T> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == T::zero() {
        return Ok(lo);
    }
    if fhi == T::zero() {
        return Ok(hi);
    }
    if (flo > T::zero()) == (fhi > T::zero()) {
        return Err(Error::domain("bisect", "root is not bracketed"));
    }
    for _ in 0..max_iter {
        let mid = T::lit(0.5) * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == T::zero() {
            return Ok(mid);
        }
        if (fm > T::zero()) == (flo > T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(T::lit(0.5) * (lo + hi))
}
