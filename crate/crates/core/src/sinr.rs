//! SINR-based throughput: a packet succeeds when S / (I + N) ≥ θ*, with I the
//! stable aggregate interference.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{DutyMomentMode, PropagationModel, Scenario, TrafficModel};
use crate::numerics::{
    gauss_hermite_rule, gaussian_q, normal_expectation, reg_upper_unchecked, QuadConfig,
    DEFAULT_HERMITE_ORDER,
};
use crate::scalar::Real;
use crate::stable::{
    expectation_over_interference_split, interference_params_with, ExpectationOptions,
    StableParams, TotallySkewedStable, MAX_MGF_DERIVATIVE_ORDER,
};

/// Default number of gain draws of the numeric path for custom channels.
pub const DEFAULT_SINR_MC_TRIALS: usize = 20_000;
/// Absolute tolerance of the inner shadowing integral of the numeric path.
pub const SINR_INNER_TOL: f64 = 1e-10;

/// Evaluation route requested by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SinrStrategy {
    /// Closed form when one exists, numeric path otherwise.
    #[default]
    Auto,
    /// Same dispatch as `Auto`; custom channels are rejected.
    ClosedForm,
    /// Numeric expectation over the interference, for cross-validation.
    Generic,
}

/// Route that produced a success probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SinrMethod {
    /// F_I(P0 / (r0^{2b} θ*) - N).
    PathLossCdf,
    /// Expectation over the shadowing of F_I(P0 e^{2σG} / (r0^{2b} θ*) - N).
    Shadowing { outer: OuterRule },
    /// Finite series in the interference MGF derivatives, integer m.
    NakagamiSeries { m: usize },
    /// e^{-ν N} φ_I(ν) with ν = r0^{2b} θ* / P0.
    Rayleigh,
    /// Expectation over the shadowing of the Nakagami series.
    CombinedSeries { m: usize, outer: OuterRule },
    /// Expectation over the shadowing of the Rayleigh form.
    CombinedRayleigh { outer: OuterRule },
    /// Quadrature of the gain survival function against the stable density.
    Generic,
    /// As `Generic`, chosen because the fading parameter is not an integer.
    GenericNonIntegerM,
    /// Average of F_I over simulated channel gains (custom channels).
    GenericMonteCarlo { trials: usize },
}

/// P{SINR ≥ θ*} with the route that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessProb<T> {
    pub value: T,
    pub method: SinrMethod,
    /// Numeric error estimate; the standard error for Monte Carlo routes.
    pub error: T,
}

/// Per-factor view of T = p_T p_S P{SINR ≥ θ*}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrBreakdown<T> {
    pub p_t: T,
    pub p_s: T,
    pub success_prob: T,
    pub throughput: T,
    /// Dispersion of the interference law.
    pub gamma: T,
    pub method: SinrMethod,
}

/// Rule for the expectation over the shadowing variable G of the shadowed
/// closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterRule {
    /// Fixed Gauss–Hermite rule of the given order.
    GaussHermite { order: usize },
    /// Adaptive Gauss–Kronrod over the normal density, absolute tolerance
    /// [`SINR_INNER_TOL`].
    Adaptive,
}

impl Default for OuterRule {
    fn default() -> Self {
        OuterRule::GaussHermite {
            order: DEFAULT_HERMITE_ORDER,
        }
    }
}

impl OuterRule {
    /// E f(G) for standard normal G.
    fn normal_expectation<T: Real>(self, f: impl Fn(T) -> T) -> Result<T> {
        match self {
            OuterRule::GaussHermite { order } => {
                Ok(gauss_hermite_rule::<T>(order)?.normal_expectation(f))
            }
            OuterRule::Adaptive => {
                let r = normal_expectation(f, &QuadConfig::with_tolerances(SINR_INNER_TOL, 0.0));
                if !r.converged {
                    return Err(Error::NotConverged {
                        op: "sinr_success_prob",
                        reason: format!("shadowing integral error estimate {}", r.error.as_f64()),
                    });
                }
                Ok(r.value)
            }
        }
    }
}

/// Evaluation knobs for [`sinr_success_prob_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SinrOptions {
    pub outer: OuterRule,
    pub duty_mode: DutyMomentMode,
    pub mc_trials: usize,
    pub seed: u64,
}

impl Default for SinrOptions {
    fn default() -> Self {
        Self {
            outer: OuterRule::default(),
            duty_mode: DutyMomentMode::Exact,
            mc_trials: DEFAULT_SINR_MC_TRIALS,
            seed: 0,
        }
    }
}

/// Parameter varied by [`success_prob_sensitivity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sensitivity {
    Lambda,
    P1,
}

/// The probe link seen through a unit-dispersion interference law.
struct Link<T: Real> {
    /// r0^{2b} θ* / P0: the gain needed to beat unit interference-plus-noise.
    nu: T,
    noise: T,
    params: StableParams<T>,
    unit: TotallySkewedStable<T>,
}

impl<T: Real> Link<T> {
    fn new(
        scenario: &Scenario<T>,
        model: &PropagationModel<T>,
        traffic: &TrafficModel<T>,
        mode: DutyMomentMode,
    ) -> Result<Self> {
        let (theta, noise) = scenario.sinr_parameters()?;
        model.validate()?;
        let params = interference_params_with(scenario, model, traffic, mode)?;
        Ok(Self {
            nu: scenario.probe_path_loss() * theta / scenario.p0,
            noise,
            params,
            unit: TotallySkewedStable::new(params.unit_dispersion())?,
        })
    }

    fn with_gamma(&self, gamma: T) -> Self {
        Self {
            params: StableParams {
                gamma,
                ..self.params
            },
            ..*self
        }
    }

    /// F_I(x), zero for negative arguments.
    fn interference_cdf(&self, x: T) -> T {
        if x < T::zero() {
            return T::zero();
        }
        if self.params.gamma == T::zero() {
            return T::one();
        }
        if x == T::zero() {
            return T::zero();
        }
        self.unit.cdf(x / self.params.scale())
    }

    /// F_I(gain / ν - N): success probability for a fixed probe gain.
    fn success_given_gain(&self, gain: T) -> T {
        self.interference_cdf(gain / self.nu - self.noise)
    }

    /// Laplace-transform coefficient c of φ_I(s) = exp(-c s^α).
    fn mgf_coefficient(&self) -> T {
        self.params.gamma / (T::FRAC_PI_2() * self.params.alpha).cos()
    }

    /// Σ_{k<m} Σ_{j≤k} (sN)^{k-j} e^{-sN} / (k-j)! · (-s)^j φ_I^{(j)}(s) / j!
    /// evaluated at s = m ν e^{-2σg}.
    fn nakagami_series(&self, m: usize, s: T) -> T {
        if s == T::zero() {
            return T::one();
        }
        if !s.is_finite() {
            return T::zero();
        }
        let scaled = scaled_mgf_derivatives(
            self.mgf_coefficient() * s.powf(self.params.alpha),
            self.params.alpha,
            m - 1,
        );
        let sn = s * self.noise;
        // Poisson weights of the noise term, e^{-sN} (sN)^i / i!.
        let mut noise_w = Vec::with_capacity(m);
        let mut w = (-sn).exp();
        for i in 0..m {
            noise_w.push(w);
            w = w * sn / T::from_count(i + 1);
        }
        let mut total = T::zero();
        for k in 0..m {
            for j in 0..=k {
                total += noise_w[k - j] * scaled[j];
            }
        }
        total.max(T::zero()).min(T::one())
    }
}

/// Coefficients a_n = (-s)^n φ^{(n)}(s) / n! of φ(s) = exp(-c s^α), written in
/// terms of u = c s^α so that they neither overflow nor underflow with s.
///
/// With ln φ(s(1 - t)) = -u (1 - t)^α the coefficients follow from the
/// power-series exponential n a_n = Σ_{k<n} (n - k) g_{n-k} a_k.
fn scaled_mgf_derivatives<T: Real>(u: T, alpha: T, max_order: usize) -> Vec<T> {
    // g_n = -u (-1)^n binom(α, n) ≥ 0 for n ≥ 1.
    let mut g = vec![T::zero(); max_order + 1];
    let mut binom = T::one();
    for (n, gn) in g.iter_mut().enumerate().skip(1) {
        binom = binom * (alpha - T::from_count(n - 1)) / T::from_count(n);
        let sign = if n % 2 == 0 { T::one() } else { -T::one() };
        *gn = -u * sign * binom;
    }
    let mut a = Vec::with_capacity(max_order + 1);
    a.push((-u).exp());
    for n in 1..=max_order {
        let acc: T = (0..n).map(|k| T::from_count(n - k) * g[n - k] * a[k]).sum();
        a.push(acc / T::from_count(n));
    }
    a
}

fn integer_m<T: Real>(m: T) -> Option<usize> {
    if m.is_integer() {
        m.to_usize()
    } else {
        None
    }
}

fn check_series_order(m: usize) -> Result<()> {
    if m > MAX_MGF_DERIVATIVE_ORDER + 1 {
        return Err(Error::Unsupported(format!(
            "the Nakagami series needs MGF derivatives up to order m - 1 <= {MAX_MGF_DERIVATIVE_ORDER}, got m = {m}"
        )));
    }
    Ok(())
}

/// P{SINR ≥ θ*} with default options.
pub fn sinr_success_prob<T: Real>(
    scenario: &Scenario<T>,
    model: &PropagationModel<T>,
    traffic: &TrafficModel<T>,
    strategy: SinrStrategy,
) -> Result<SuccessProb<T>> {
    sinr_success_prob_with(scenario, model, traffic, strategy, &SinrOptions::default())
}

/// P{SINR ≥ θ*}.
///
/// The closed forms cover path loss only, shadowing, integer-m Nakagami fading
/// and shadowing with integer-m fading. Non-integer m and the generic strategy
/// integrate the gain survival function P{Z ≥ ν(I + N)} against the stable
/// density; custom channels average F_I over simulated gains.
pub fn sinr_success_prob_with<T: Real>(
    scenario: &Scenario<T>,
    model: &PropagationModel<T>,
    traffic: &TrafficModel<T>,
    strategy: SinrStrategy,
    opts: &SinrOptions,
) -> Result<SuccessProb<T>> {
    let link = Link::new(scenario, model, traffic, opts.duty_mode)?;
    success_for_link(&link, model, strategy, opts)
}

fn success_for_link<T: Real>(
    link: &Link<T>,
    model: &PropagationModel<T>,
    strategy: SinrStrategy,
    opts: &SinrOptions,
) -> Result<SuccessProb<T>> {
    let exact = |value: T, method| {
        Ok(SuccessProb {
            value: value.max(T::zero()).min(T::one()),
            method,
            error: T::zero(),
        })
    };
    if let PropagationModel::Custom { .. } = model {
        if strategy == SinrStrategy::ClosedForm {
            return Err(Error::Unsupported(
                "no closed-form SINR success probability exists for custom channels".into(),
            ));
        }
        return custom_monte_carlo(link, model, opts);
    }
    let m = model.fading_m();
    if strategy == SinrStrategy::Generic {
        return generic(link, model, SinrMethod::Generic);
    }
    if let Some(m) = m {
        if integer_m(m).is_none() {
            return generic(link, model, SinrMethod::GenericNonIntegerM);
        }
    }
    match *model {
        PropagationModel::PathLossOnly => {
            exact(link.success_given_gain(T::one()), SinrMethod::PathLossCdf)
        }
        PropagationModel::LogNormalShadowing { sigma } => {
            let two_sigma = T::lit(2.0) * sigma;
            let v = opts
                .outer
                .normal_expectation(|g| link.success_given_gain((two_sigma * g).exp()))?;
            exact(v, SinrMethod::Shadowing { outer: opts.outer })
        }
        PropagationModel::NakagamiFading { m } => {
            let mi = integer_m(m).unwrap_or(1);
            check_series_order(mi)?;
            let v = link.nakagami_series(mi, m * link.nu);
            let method = if mi == 1 {
                SinrMethod::Rayleigh
            } else {
                SinrMethod::NakagamiSeries { m: mi }
            };
            exact(v, method)
        }
        PropagationModel::ShadowingAndNakagami { sigma, m } => {
            let mi = integer_m(m).unwrap_or(1);
            check_series_order(mi)?;
            let two_sigma = T::lit(2.0) * sigma;
            let v = opts.outer.normal_expectation(|g| {
                link.nakagami_series(mi, m * link.nu * (-two_sigma * g).exp())
            })?;
            let method = if mi == 1 {
                SinrMethod::CombinedRayleigh { outer: opts.outer }
            } else {
                SinrMethod::CombinedSeries {
                    m: mi,
                    outer: opts.outer,
                }
            };
            exact(v, method)
        }
        PropagationModel::Custom { .. } => unreachable!("custom channels are dispatched above"),
    }
}

/// E_I{P{Z ≥ ν(I + N)}} by quadrature against the stable density.
fn generic<T: Real>(
    link: &Link<T>,
    model: &PropagationModel<T>,
    method: SinrMethod,
) -> Result<SuccessProb<T>> {
    let nu = link.nu;
    let noise = link.noise;
    let survival = gain_survival(model)?;
    // Without a continuous gain the survival function steps at I = 1/ν - N.
    let step = [nu.recip() - noise];
    let e = expectation_over_interference_split(
        |i: T| survival(nu * (i + noise)),
        &link.params,
        &ExpectationOptions::default(),
        &step,
    )?;
    Ok(SuccessProb {
        value: e.value.max(T::zero()).min(T::one()),
        method,
        error: e.error,
    })
}

/// z -> P{Z ≥ z} for the named channels.
fn gain_survival<T: Real>(model: &PropagationModel<T>) -> Result<Box<dyn Fn(T) -> T + '_>> {
    let two = T::lit(2.0);
    Ok(match *model {
        PropagationModel::PathLossOnly => {
            Box::new(|z: T| if z <= T::one() { T::one() } else { T::zero() })
        }
        PropagationModel::LogNormalShadowing { sigma } => Box::new(move |z: T| {
            if sigma == T::zero() {
                return if z <= T::one() { T::one() } else { T::zero() };
            }
            gaussian_q(z.ln() / (two * sigma))
        }),
        PropagationModel::NakagamiFading { m } => {
            Box::new(move |z: T| reg_upper_unchecked(m, m * z))
        }
        PropagationModel::ShadowingAndNakagami { sigma, m } => {
            let cfg = QuadConfig::with_tolerances(SINR_INNER_TOL, 0.0);
            Box::new(move |z: T| {
                if sigma == T::zero() {
                    return reg_upper_unchecked(m, m * z);
                }
                normal_expectation(
                    |g| reg_upper_unchecked(m, m * z * (-two * sigma * g).exp()),
                    &cfg,
                )
                .value
            })
        }
        PropagationModel::Custom { .. } => {
            return Err(Error::Unsupported(
                "gain survival functions are not available for custom channels".into(),
            ))
        }
    })
}

fn custom_monte_carlo<T: Real>(
    link: &Link<T>,
    model: &PropagationModel<T>,
    opts: &SinrOptions,
) -> Result<SuccessProb<T>> {
    let sampler = model.sampler()?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n = opts.mc_trials.max(2);
    let (mut mean, mut m2) = (0.0, 0.0);
    for i in 0..n {
        let v = link.success_given_gain(sampler.sample(&mut rng)).as_f64();
        let d = v - mean;
        mean += d / (i + 1) as f64;
        m2 += d * (v - mean);
    }
    let stderr = (m2 / (n - 1) as f64 / n as f64).sqrt();
    Ok(SuccessProb {
        value: T::lit(mean),
        method: SinrMethod::GenericMonteCarlo { trials: n },
        error: T::lit(stderr),
    })
}

/// T = p_T p_S P{SINR ≥ θ*} with default options.
pub fn sinr_throughput<T: Real>(
    scenario: &Scenario<T>,
    model: &PropagationModel<T>,
    traffic: &TrafficModel<T>,
    strategy: SinrStrategy,
) -> Result<SinrBreakdown<T>> {
    sinr_throughput_with(scenario, model, traffic, strategy, &SinrOptions::default())
}

pub fn sinr_throughput_with<T: Real>(
    scenario: &Scenario<T>,
    model: &PropagationModel<T>,
    traffic: &TrafficModel<T>,
    strategy: SinrStrategy,
    opts: &SinrOptions,
) -> Result<SinrBreakdown<T>> {
    let p_t = traffic.transmit_prob()?;
    let p_s = traffic.silent_prob()?;
    let link = Link::new(scenario, model, traffic, opts.duty_mode)?;
    let success = success_for_link(&link, model, strategy, opts)?;
    Ok(SinrBreakdown {
        p_t,
        p_s,
        success_prob: success.value,
        throughput: p_t * p_s * success.value,
        gamma: link.params.gamma,
        method: success.method,
    })
}

/// Success probability across a grid of λ or P1 values.
///
/// γ scales as λ P1^{1/b}, so every point reuses the same unit-dispersion law
/// with its own dispersion.
pub fn success_prob_sensitivity<T: Real>(
    scenario: &Scenario<T>,
    model: &PropagationModel<T>,
    traffic: &TrafficModel<T>,
    vary: Sensitivity,
    grid: &[T],
) -> Result<Vec<(T, T)>> {
    let opts = SinrOptions::default();
    let base = Link::new(scenario, model, traffic, opts.duty_mode)?;
    let g0 = base.params.gamma;
    grid.iter()
        .map(|&v| {
            if !(v > T::zero()) || v.is_infinite() {
                return Err(Error::domain(
                    "success_prob_sensitivity",
                    format!(
                        "grid values must be finite and positive, got {}",
                        v.as_f64()
                    ),
                ));
            }
            let factor = match vary {
                Sensitivity::Lambda if scenario.lambda > T::zero() => v / scenario.lambda,
                Sensitivity::P1 => (v / scenario.p1).powf(base.params.alpha),
                Sensitivity::Lambda => {
                    // γ = 0 at λ = 0: rebuild the law at the requested density.
                    let s = Scenario {
                        lambda: v,
                        ..*scenario
                    };
                    let gamma = interference_params_with(&s, model, traffic, opts.duty_mode)?.gamma;
                    let link = base.with_gamma(gamma);
                    return Ok((
                        v,
                        success_for_link(&link, model, SinrStrategy::Auto, &opts)?.value,
                    ));
                }
            };
            let link = base.with_gamma(g0 * factor);
            Ok((
                v,
                success_for_link(&link, model, SinrStrategy::Auto, &opts)?.value,
            ))
        })
        .collect()
}
