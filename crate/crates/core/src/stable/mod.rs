//! Totally skewed α-stable law of the aggregate interference.
//!
//! The dispersion γ is the coefficient of |w|^α in the characteristic
//! exponent, φ(w) = exp[-γ|w|^α (1 - jβ sign(w) tan(πα/2))]. The scale
//! σ = γ^{1/α} is used internally.

mod expectation;
mod law;

pub use expectation::{
    expectation_over_interference, expectation_over_interference_split,
    expectation_over_interference_with, ExpectationMethod, ExpectationOptions,
    InterferenceExpectation, DEFAULT_EXPECTATION_MC_TRIALS, EXPECTATION_LOWER_TAIL,
    EXPECTATION_PANEL_WIDTH, EXPECTATION_UPPER_TAIL,
};
pub use law::{sample_stable, stable_cdf, stable_pdf, TotallySkewedStable, CDF_ABS_TOL};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{channel_moment, DutyMomentMode, PropagationModel, Scenario, TrafficModel};
use crate::numerics::stable_prefactor_c;
use crate::scalar::Real;

/// Largest derivative order of [`stable_mgf_derivatives`].
pub const MAX_MGF_DERIVATIVE_ORDER: usize = 16;

/// Parameters (α, β, γ) of a stable law in the characteristic-exponent convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableParams<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
}

impl<T: Real> StableParams<T> {
    /// Totally skewed law (β = 1).
    pub fn skewed(alpha: T, gamma: T) -> Result<Self> {
        let p = Self {
            alpha,
            beta: T::one(),
            gamma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > T::zero() && self.alpha <= T::lit(2.0)) {
            return Err(Error::domain(
                "stable law",
                format!("alpha must lie in (0,2], got {}", self.alpha.as_f64()),
            ));
        }
        if !(self.beta >= -T::one() && self.beta <= T::one()) {
            return Err(Error::domain(
                "stable law",
                format!("beta must lie in [-1,1], got {}", self.beta.as_f64()),
            ));
        }
        if !(self.gamma >= T::zero()) || self.gamma.is_infinite() {
            return Err(Error::domain(
                "stable law",
                format!(
                    "gamma must be finite and nonnegative, got {}",
                    self.gamma.as_f64()
                ),
            ));
        }
        Ok(())
    }

    /// Scale σ = γ^{1/α}.
    pub fn scale(&self) -> T {
        self.gamma.powf(self.alpha.recip())
    }

    /// Same law with unit dispersion.
    pub fn unit_dispersion(&self) -> Self {
        Self {
            gamma: T::one(),
            ..*self
        }
    }

    fn require_positive_support(&self, op: &'static str) -> Result<()> {
        self.validate()?;
        if !(self.alpha < T::one()) || self.beta != T::one() {
            return Err(Error::Unsupported(format!(
                "{op} is implemented for totally skewed laws with alpha < 1 (got alpha = {}, beta = {})",
                self.alpha.as_f64(),
                self.beta.as_f64()
            )));
        }
        Ok(())
    }
}

/// Stable parameters of the interference seen by the probe receiver.
///
/// α = 1/b, β = 1 and γ = πλ C_{1/b}^{-1} P1^{1/b} E{Δ^{1/b}} E{Z^{1/b}}.
pub fn interference_params<T: Real>(
    scenario: &Scenario<T>,
    model: &PropagationModel<T>,
    traffic: &TrafficModel<T>,
) -> Result<StableParams<T>> {
    interference_params_with(scenario, model, traffic, DutyMomentMode::Exact)
}

/// [`interference_params`] with a chosen duty-cycle moment evaluation.
pub fn interference_params_with<T: Real>(
    scenario: &Scenario<T>,
    model: &PropagationModel<T>,
    traffic: &TrafficModel<T>,
    mode: DutyMomentMode,
) -> Result<StableParams<T>> {
    scenario.validate()?;
    scenario.require_stable_exponent()?;
    let alpha = scenario.b.recip();
    let duty = traffic.duty_cycle_moment(scenario.b, mode)?;
    let moment = channel_moment(model, scenario.b)?;
    if !moment.is_finite() {
        return Err(Error::InvalidModel(format!(
            "channel moment at 1/b must be finite, got {}",
            moment.as_f64()
        )));
    }
    let c = stable_prefactor_c(alpha)?;
    let gamma = T::PI() * scenario.lambda / c * scenario.p1.powf(alpha) * duty * moment;
    StableParams::skewed(alpha, gamma)
}

/// Characteristic function E{e^{jwX}}.
pub fn stable_cf<T: Real>(params: &StableParams<T>, w: T) -> Result<Complex<T>> {
    params.validate()?;
    if w == T::zero() {
        return Ok(Complex::new(T::one(), T::zero()));
    }
    let aw = w.abs();
    let sign = w.signum();
    let StableParams { alpha, beta, gamma } = *params;
    let exponent = if alpha == T::one() {
        let skew = beta * T::FRAC_2_PI() * sign * aw.ln();
        Complex::new(-gamma * aw, -gamma * aw * skew)
    } else {
        let mag = gamma * aw.powf(alpha);
        Complex::new(-mag, mag * beta * sign * (T::FRAC_PI_2() * alpha).tan())
    };
    Ok(exponent.exp())
}

/// Logarithm of the characteristic function of a totally skewed α < 1 law,
/// continued analytically to the closed upper half-plane: -γ(-jw)^α / cos(πα/2).
pub fn stable_log_cf_continued<T: Real>(
    params: &StableParams<T>,
    w: Complex<T>,
) -> Result<Complex<T>> {
    params.require_positive_support("analytic continuation")?;
    if w.im < T::zero() {
        return Err(Error::domain(
            "stable_log_cf_continued",
            "w must lie in the closed upper half-plane",
        ));
    }
    let z = Complex::new(w.im, -w.re);
    let scale = params.gamma / (T::FRAC_PI_2() * params.alpha).cos();
    if z == Complex::new(T::zero(), T::zero()) {
        return Ok(z);
    }
    Ok(-z.powf(params.alpha) * scale)
}

/// Laplace transform E{e^{-sX}} of a totally skewed law.
pub fn stable_mgf<T: Real>(params: &StableParams<T>, s: T) -> Result<T> {
    params.validate()?;
    if params.beta != T::one() {
        return Err(Error::Unsupported(
            "the Laplace transform is finite only for beta = 1".into(),
        ));
    }
    if !(s >= T::zero()) {
        return Err(Error::domain(
            "stable_mgf",
            format!("s must be nonnegative, got {}", s.as_f64()),
        ));
    }
    if s == T::zero() {
        return Ok(T::one());
    }
    let a = params.alpha;
    if a == T::one() {
        return Ok((T::FRAC_2_PI() * params.gamma * s * s.ln()).exp());
    }
    if a > T::one() {
        return Err(Error::Unsupported(
            "the Laplace transform is implemented for alpha <= 1".into(),
        ));
    }
    Ok((-mgf_coefficient(params) * s.powf(a)).exp())
}

/// c in φ(s) = exp(-c s^α).
fn mgf_coefficient<T: Real>(params: &StableParams<T>) -> T {
    params.gamma / (T::FRAC_PI_2() * params.alpha).cos()
}

/// φ(s), φ'(s), ..., φ^{(j)}(s) of the Laplace transform φ(s) = exp(-c s^α).
pub fn stable_mgf_derivatives<T: Real>(
    params: &StableParams<T>,
    s: T,
    max_order: usize,
) -> Result<Vec<T>> {
    params.require_positive_support("stable_mgf_derivatives")?;
    if !(s > T::zero()) {
        return Err(Error::domain(
            "stable_mgf_derivatives",
            format!("s must be positive, got {}", s.as_f64()),
        ));
    }
    if max_order > MAX_MGF_DERIVATIVE_ORDER {
        return Err(Error::domain(
            "stable_mgf_derivatives",
            format!("order must not exceed {MAX_MGF_DERIVATIVE_ORDER}, got {max_order}"),
        ));
    }
    let c = mgf_coefficient(params);
    let a = params.alpha;
    // g^{(n)}(s) = -c α(α-1)...(α-n+1) s^{α-n}
    let mut g = vec![T::zero(); max_order + 1];
    let mut falling = T::one();
    for (n, gn) in g.iter_mut().enumerate().skip(1) {
        falling *= a - T::from_count(n - 1);
        *gn = -c * falling * s.powf(a - T::from_count(n));
    }
    let mut f = Vec::with_capacity(max_order + 1);
    f.push((-c * s.powf(a)).exp());
    for n in 1..=max_order {
        let mut binom = T::one();
        let mut acc = T::zero();
        for k in 0..n {
            if k > 0 {
                binom = binom * T::from_count(n - k) / T::from_count(k);
            }
            acc += binom * g[n - k] * f[k];
        }
        f.push(acc);
    }
    Ok(f)
}
