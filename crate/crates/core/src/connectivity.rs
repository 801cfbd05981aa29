//! Connectivity-based throughput: a packet succeeds when the probe is audible
//! at its receiver and no audible interferer transmits during the packet.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{channel_moment, PropagationModel, Scenario, TrafficModel};
use crate::numerics::{
    gauss_hermite_rule, gaussian_q, normal_expectation, poisson_head_sum, reg_upper_unchecked,
    QuadConfig, DEFAULT_HERMITE_ORDER,
};
use crate::scalar::Real;

/// Absolute tolerance of the quadrature evaluation of p_A.
pub const AUDIBLE_QUAD_TOL: f64 = 1e-10;
/// Default number of trials when p_A must be estimated by simulation.
pub const DEFAULT_AUDIBLE_MC_TRIALS: usize = 1_000_000;

/// How a probe-audibility value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AudibleMethod {
    /// Deterministic link: 0 or 1.
    Indicator,
    /// Gaussian tail of the shadowing exponent.
    GaussianTail,
    /// Regularized upper incomplete gamma of the fading power.
    IncompleteGamma,
    /// Gauss–Hermite series over the shadowing, Poisson sum over the fading.
    GaussHermite { order: usize },
    /// Adaptive quadrature over the shadowing variable.
    Quadrature,
    /// Monte Carlo estimate; see the reported standard error.
    MonteCarlo { trials: usize },
}

/// Probability that the probe is audible at its receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeAudibility<T> {
    pub value: T,
    pub method: AudibleMethod,
    pub stderr: Option<T>,
}

/// Evaluation knobs for [`probe_audible_prob_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AudibleOptions {
    pub gh_order: usize,
    pub mc_trials: usize,
    pub seed: u64,
}

impl Default for AudibleOptions {
    fn default() -> Self {
        Self {
            gh_order: DEFAULT_HERMITE_ORDER,
            mc_trials: DEFAULT_AUDIBLE_MC_TRIALS,
            seed: 0,
        }
    }
}

/// Per-factor view of the connectivity throughput T = p_T p_S p_A exp(-μ_A(1 - p_S)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectivityBreakdown<T> {
    pub p_t: T,
    pub p_s: T,
    pub p_a: T,
    pub mu_a: T,
    pub no_collision: T,
    pub throughput: T,
    pub p_a_method: AudibleMethod,
}

/// Mean number of nodes whose received power exceeds the audibility threshold.
pub fn mean_audible_nodes<T: Real>(
    scenario: &Scenario<T>,
    model: &PropagationModel<T>,
) -> Result<T> {
    scenario.validate()?;
    let p_star = scenario.audibility_threshold()?;
    let moment = channel_moment(model, scenario.b)?;
    if !moment.is_finite() {
        return Err(Error::InvalidModel(format!(
            "channel moment at 1/b must be finite, got {}",
            moment.as_f64()
        )));
    }
    let range = (scenario.p1 / p_star).powf(scenario.b.recip());
    Ok(T::PI() * scenario.lambda * range * moment)
}

/// μ_A divided by its path-loss-only value, i.e. the channel moment E{Z^{1/b}}.
pub fn normalized_audible_nodes<T: Real>(model: &PropagationModel<T>, b: T) -> Result<T> {
    channel_moment(model, b)
}

/// P{no audible node} = e^{-μ_A}.
pub fn node_isolation_prob<T: Real>(
    scenario: &Scenario<T>,
    model: &PropagationModel<T>,
) -> Result<T> {
    Ok((-mean_audible_nodes(scenario, model)?).exp())
}

/// p_A with default options; see [`probe_audible_prob_with`].
pub fn probe_audible_prob<T: Real>(
    scenario: &Scenario<T>,
    model: &PropagationModel<T>,
) -> Result<ProbeAudibility<T>> {
    probe_audible_prob_with(scenario, model, &AudibleOptions::default())
}

/// Probability that P0 Z / r0^{2b} ≥ P*.
///
/// Closed forms are used for the named channels. The combined channel uses a
/// Gauss–Hermite series for integer m and adaptive quadrature otherwise.
/// Custom channels are estimated by simulation.
pub fn probe_audible_prob_with<T: Real>(
    scenario: &Scenario<T>,
    model: &PropagationModel<T>,
    opts: &AudibleOptions,
) -> Result<ProbeAudibility<T>> {
    scenario.validate()?;
    model.validate()?;
    let nu = audibility_ratio(scenario)?;
    let exact = |value, method| {
        Ok(ProbeAudibility {
            value,
            method,
            stderr: None,
        })
    };
    match model {
        PropagationModel::PathLossOnly => exact(indicator(nu), AudibleMethod::Indicator),
        PropagationModel::LogNormalShadowing { sigma } => {
            exact(shadowing_tail(*sigma, nu), AudibleMethod::GaussianTail)
        }
        PropagationModel::NakagamiFading { m } => exact(
            reg_upper_unchecked(*m, *m * nu),
            AudibleMethod::IncompleteGamma,
        ),
        PropagationModel::ShadowingAndNakagami { sigma, m } => {
            if m.is_integer() {
                let order = opts.gh_order;
                let value = combined_gauss_hermite(*sigma, *m, nu, order)?;
                exact(value, AudibleMethod::GaussHermite { order })
            } else {
                exact(
                    combined_quadrature(*sigma, *m, nu)?,
                    AudibleMethod::Quadrature,
                )
            }
        }
        PropagationModel::Custom { .. } => {
            let sampler = model.sampler()?;
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let n = opts.mc_trials.max(2);
            let nu = nu.as_f64();
            let hits = (0..n)
                .filter(|_| sampler.sample_f64(&mut rng) >= nu)
                .count();
            let p = hits as f64 / n as f64;
            let se = (p * (1.0 - p) / (n - 1) as f64).sqrt();
            Ok(ProbeAudibility {
                value: T::lit(p),
                method: AudibleMethod::MonteCarlo { trials: n },
                stderr: Some(T::lit(se)),
            })
        }
    }
}

/// p_A by adaptive quadrature over the shadowing variable, for any named channel.
pub fn probe_audible_prob_quadrature<T: Real>(
    scenario: &Scenario<T>,
    model: &PropagationModel<T>,
) -> Result<T> {
    scenario.validate()?;
    model.validate()?;
    let nu = audibility_ratio(scenario)?;
    let sigma = model.sigma().unwrap_or(T::zero());
    match model {
        PropagationModel::Custom { .. } => Err(Error::Unsupported(
            "quadrature p_A needs a named channel model".into(),
        )),
        _ => match model.fading_m() {
            Some(m) => combined_quadrature(sigma, m, nu),
            None if sigma > T::zero() => {
                let two_sigma = T::lit(2.0) * sigma;
                integrate_normal(|g| indicator(nu * (-two_sigma * g).exp()))
            }
            None => Ok(indicator(nu)),
        },
    }
}

/// ν = P* r0^{2b} / P0, the gain the probe link needs to be audible.
fn audibility_ratio<T: Real>(scenario: &Scenario<T>) -> Result<T> {
    Ok(scenario.audibility_threshold()? * scenario.probe_path_loss() / scenario.p0)
}

fn indicator<T: Real>(nu: T) -> T {
    if nu <= T::one() {
        T::one()
    } else {
        T::zero()
    }
}

fn shadowing_tail<T: Real>(sigma: T, nu: T) -> T {
    if sigma == T::zero() {
        return indicator(nu);
    }
    gaussian_q(nu.ln() / (T::lit(2.0) * sigma))
}

fn combined_gauss_hermite<T: Real>(sigma: T, m: T, nu: T, order: usize) -> Result<T> {
    let rule = gauss_hermite_rule::<T>(order)?;
    let mi = m
        .to_usize()
        .ok_or_else(|| Error::domain("probe_audible_prob", "m must be a positive integer"))?;
    let two_sigma = T::lit(2.0) * sigma;
    let v = rule.normal_expectation(|g| poisson_head_sum(mi, m * nu * (two_sigma * g).exp()));
    Ok(v.max(T::zero()).min(T::one()))
}

fn combined_quadrature<T: Real>(sigma: T, m: T, nu: T) -> Result<T> {
    if sigma == T::zero() {
        return Ok(reg_upper_unchecked(m, m * nu));
    }
    let two_sigma = T::lit(2.0) * sigma;
    integrate_normal(|g| reg_upper_unchecked(m, m * nu * (-two_sigma * g).exp()))
}

fn integrate_normal<T: Real>(f: impl Fn(T) -> T) -> Result<T> {
    let cfg = QuadConfig::with_tolerances(AUDIBLE_QUAD_TOL, 0.0);
    let r = normal_expectation(f, &cfg);
    if !r.converged {
        return Err(Error::NotConverged {
            op: "probe_audible_prob",
            reason: format!(
                "error estimate {} after {} evaluations",
                r.error.as_f64(),
                r.evaluations
            ),
        });
    }
    Ok(r.value.max(T::zero()).min(T::one()))
}

/// exp(-μ_A (1 - p_S)): no audible interferer overlaps the probe packet.
pub fn no_collision_prob<T: Real>(mu_a: T, p_s: T) -> Result<T> {
    if !(mu_a >= T::zero()) {
        return Err(Error::domain(
            "no_collision_prob",
            format!("mu_a must be nonnegative, got {}", mu_a.as_f64()),
        ));
    }
    if !(p_s >= T::zero() && p_s <= T::one()) {
        return Err(Error::domain(
            "no_collision_prob",
            format!("p_s must lie in [0,1], got {}", p_s.as_f64()),
        ));
    }
    if p_s == T::one() {
        return Ok(T::one());
    }
    Ok((-mu_a * (T::one() - p_s)).exp())
}

/// Connectivity throughput with default p_A options.
pub fn connectivity_throughput<T: Real>(
    scenario: &Scenario<T>,
    model: &PropagationModel<T>,
    traffic: &TrafficModel<T>,
) -> Result<ConnectivityBreakdown<T>> {
    connectivity_throughput_with(scenario, model, traffic, &AudibleOptions::default())
}

pub fn connectivity_throughput_with<T: Real>(
    scenario: &Scenario<T>,
    model: &PropagationModel<T>,
    traffic: &TrafficModel<T>,
    opts: &AudibleOptions,
) -> Result<ConnectivityBreakdown<T>> {
    let p_t = traffic.transmit_prob()?;
    let p_s = traffic.silent_prob()?;
    let mu_a = mean_audible_nodes(scenario, model)?;
    let audible = probe_audible_prob_with(scenario, model, opts)?;
    let no_collision = no_collision_prob(mu_a, p_s)?;
    Ok(ConnectivityBreakdown {
        p_t,
        p_s,
        p_a: audible.value,
        mu_a,
        no_collision,
        throughput: p_t * p_s * audible.value * no_collision,
        p_a_method: audible.method,
    })
}
