use std::fmt;
use std::sync::Arc;

use rand::RngCore;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics::{gaussian_q_inv, ln_gamma_unchecked, reg_upper_unchecked};
use crate::scalar::Real;

/// Moment map x -> E{Z^x} of a custom channel.
pub type MomentFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
/// Draws one realization of the product of all propagation effects.
pub type GainSamplerFn<T> = Arc<dyn Fn(&mut dyn RngCore) -> T + Send + Sync>;

/// Random propagation effects multiplying the received power.
///
/// The power gain is the product Z = ∏ Z_k of independent effects. Shadowing
/// contributes e^{2σG} with G standard normal; Nakagami-m fading contributes a
/// gamma variable with shape m and unit mean.
#[derive(Clone)]
pub enum PropagationModel<T> {
    PathLossOnly,
    LogNormalShadowing {
        sigma: T,
    },
    NakagamiFading {
        m: T,
    },
    ShadowingAndNakagami {
        sigma: T,
        m: T,
    },
    Custom {
        moment_fn: MomentFn<T>,
        sampler: GainSamplerFn<T>,
    },
}

impl<T: fmt::Debug> fmt::Debug for PropagationModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PathLossOnly => f.write_str("PathLossOnly"),
            Self::LogNormalShadowing { sigma } => f
                .debug_struct("LogNormalShadowing")
                .field("sigma", sigma)
                .finish(),
            Self::NakagamiFading { m } => f.debug_struct("NakagamiFading").field("m", m).finish(),
            Self::ShadowingAndNakagami { sigma, m } => f
                .debug_struct("ShadowingAndNakagami")
                .field("sigma", sigma)
                .field("m", m)
                .finish(),
            Self::Custom { .. } => f.write_str("Custom { .. }"),
        }
    }
}

/// Converts a dB shadowing standard deviation to the coefficient σ in e^{2σG}.
pub fn sigma_from_db<T: Real>(sigma_db: T) -> Result<T> {
    if !(sigma_db >= T::zero()) || sigma_db.is_infinite() {
        return Err(Error::domain(
            "sigma_from_db",
            format!(
                "sigma_db must be finite and nonnegative, got {}",
                sigma_db.as_f64()
            ),
        ));
    }
    Ok(sigma_db * T::LN_10() / T::lit(20.0))
}

fn check_sigma<T: Real>(sigma: T) -> Result<()> {
    if !(sigma >= T::zero()) || sigma.is_infinite() {
        return Err(Error::InvalidModel(format!(
            "shadowing sigma must be finite and nonnegative, got {}",
            sigma.as_f64()
        )));
    }
    Ok(())
}

fn check_m<T: Real>(m: T) -> Result<()> {
    if !(m >= T::lit(0.5)) || m.is_infinite() {
        return Err(Error::InvalidModel(format!(
            "Nakagami m must be finite and at least 0.5, got {}",
            m.as_f64()
        )));
    }
    Ok(())
}

/// E{e^{2σG x}} = e^{2σ²x²}.
fn shadowing_moment<T: Real>(sigma: T, x: T) -> T {
    (T::lit(2.0) * sigma * sigma * x * x).exp()
}

/// E{α^{2x}} = Γ(m + x) / (m^x Γ(m)).
fn nakagami_moment<T: Real>(m: T, x: T) -> T {
    (ln_gamma_unchecked(m + x) - ln_gamma_unchecked(m) - x * m.ln()).exp()
}

impl<T: Real> PropagationModel<T> {
    pub fn shadowing_db(sigma_db: T) -> Result<Self> {
        Ok(Self::LogNormalShadowing {
            sigma: sigma_from_db(sigma_db)?,
        })
    }

    pub fn rayleigh() -> Self {
        Self::NakagamiFading { m: T::one() }
    }

    pub fn custom(
        moment_fn: impl Fn(T) -> T + Send + Sync + 'static,
        sampler: impl Fn(&mut dyn RngCore) -> T + Send + Sync + 'static,
    ) -> Self {
        Self::Custom {
            moment_fn: Arc::new(moment_fn),
            sampler: Arc::new(sampler),
        }
    }

    /// Checks parameter ranges. Custom moments are spot-checked on (0, 1).
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::PathLossOnly => Ok(()),
            Self::LogNormalShadowing { sigma } => check_sigma(*sigma),
            Self::NakagamiFading { m } => check_m(*m),
            Self::ShadowingAndNakagami { sigma, m } => {
                check_sigma(*sigma).and_then(|_| check_m(*m))
            }
            Self::Custom { moment_fn, .. } => {
                for x in [0.1, 0.25, 0.5, 0.75, 0.9] {
                    let v = moment_fn(T::lit(x));
                    if !(v >= T::zero()) || !v.is_finite() {
                        return Err(Error::InvalidModel(format!(
                            "custom moment function must be finite and nonnegative on (0,1), got {} at {x}",
                            v.as_f64()
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Shadowing coefficient, zero when the model has no shadowing.
    pub fn sigma(&self) -> Option<T> {
        match self {
            Self::LogNormalShadowing { sigma } | Self::ShadowingAndNakagami { sigma, .. } => {
                Some(*sigma)
            }
            _ => None,
        }
    }

    /// Nakagami parameter, if the model has fading.
    pub fn fading_m(&self) -> Option<T> {
        match self {
            Self::NakagamiFading { m } | Self::ShadowingAndNakagami { m, .. } => Some(*m),
            _ => None,
        }
    }

    /// E{Z^x} for x ≥ 0.
    pub fn moment(&self, x: T) -> Result<T> {
        if !(x >= T::zero()) || x.is_infinite() {
            return Err(Error::domain(
                "channel_moment",
                format!(
                    "moment order must be finite and nonnegative, got {}",
                    x.as_f64()
                ),
            ));
        }
        self.validate()?;
        Ok(match self {
            Self::PathLossOnly => T::one(),
            Self::LogNormalShadowing { sigma } => shadowing_moment(*sigma, x),
            Self::NakagamiFading { m } => nakagami_moment(*m, x),
            Self::ShadowingAndNakagami { sigma, m } => {
                shadowing_moment(*sigma, x) * nakagami_moment(*m, x)
            }
            Self::Custom { moment_fn, .. } => moment_fn(x),
        })
    }

    /// Upper quantile z with P{Z > z} = `tail`, for the named models.
    ///
    /// For the combined model the product of the two marginal quantiles at
    /// `tail / 2` each is returned, which upper-bounds the true quantile.
    pub fn gain_upper_quantile(&self, tail: T) -> Result<T> {
        if !(tail > T::zero() && tail < T::one()) {
            return Err(Error::domain(
                "gain_upper_quantile",
                format!("tail must lie in (0,1), got {}", tail.as_f64()),
            ));
        }
        self.validate()?;
        let two = T::lit(2.0);
        match self {
            Self::PathLossOnly => Ok(T::one()),
            Self::LogNormalShadowing { sigma } => Ok((two * *sigma * gaussian_q_inv(tail)?).exp()),
            Self::NakagamiFading { m } => gamma_upper_quantile(*m, tail),
            Self::ShadowingAndNakagami { sigma, m } => {
                let half = tail / two;
                Ok((two * *sigma * gaussian_q_inv(half)?).exp() * gamma_upper_quantile(*m, half)?)
            }
            Self::Custom { .. } => Err(Error::Unsupported(
                "gain quantiles are not available for custom channels".into(),
            )),
        }
    }

    /// Builds a reusable sampler for the channel gain.
    pub fn sampler(&self) -> Result<ChannelSampler<T>> {
        self.validate()?;
        let gamma = |m: T| {
            let m = m.as_f64();
            Gamma::new(m, 1.0 / m).map_err(|e| Error::InvalidModel(format!("gamma law: {e}")))
        };
        let kind = match self {
            Self::PathLossOnly => SamplerKind::Unit,
            Self::LogNormalShadowing { sigma } => SamplerKind::Shadow {
                two_sigma: 2.0 * sigma.as_f64(),
            },
            Self::NakagamiFading { m } => SamplerKind::Fading(gamma(*m)?),
            Self::ShadowingAndNakagami { sigma, m } => SamplerKind::Both {
                two_sigma: 2.0 * sigma.as_f64(),
                fading: gamma(*m)?,
            },
            Self::Custom { sampler, .. } => SamplerKind::Custom(Arc::clone(sampler)),
        };
        Ok(ChannelSampler { kind })
    }
}

/// z with Q(m, m z) = tail, i.e. the upper quantile of a unit-mean gamma law.
fn gamma_upper_quantile<T: Real>(m: T, tail: T) -> Result<T> {
    let sf = |z: T| reg_upper_unchecked(m, m * z);
    let mut hi = T::one();
    while sf(hi) > tail {
        hi *= T::lit(2.0);
        if hi > T::lit(1e12) {
            return Err(Error::NotConverged {
                op: "gain_upper_quantile",
                reason: "quantile bracket overflow".into(),
            });
        }
    }
    crate::numerics::bisect(|z| sf(z) - tail, T::zero(), hi, T::tol(1e-13) * hi, 400)
}

/// ∏ E{Z_k^{1/b}}: the moment that scales the mean number of audible nodes.
pub fn channel_moment<T: Real>(model: &PropagationModel<T>, b: T) -> Result<T> {
    if !(b > T::zero()) || b.is_infinite() {
        return Err(Error::domain(
            "channel_moment",
            format!("b must be finite and positive, got {}", b.as_f64()),
        ));
    }
    model.moment(b.recip())
}

/// One draw of the channel gain; prefer [`PropagationModel::sampler`] in loops.
pub fn sample_channel_gain<T: Real>(
    model: &PropagationModel<T>,
    rng: &mut dyn RngCore,
) -> Result<T> {
    Ok(model.sampler()?.sample(rng))
}

#[derive(Clone)]
enum SamplerKind<T> {
    Unit,
    Shadow { two_sigma: f64 },
    Fading(Gamma<f64>),
    Both { two_sigma: f64, fading: Gamma<f64> },
    Custom(GainSamplerFn<T>),
}

/// Prepared channel-gain sampler. Draws are computed in `f64`.
#[derive(Clone)]
pub struct ChannelSampler<T> {
    kind: SamplerKind<T>,
}

impl<T> fmt::Debug for ChannelSampler<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match &self.kind {
            SamplerKind::Unit => "Unit",
            SamplerKind::Shadow { .. } => "Shadow",
            SamplerKind::Fading(_) => "Fading",
            SamplerKind::Both { .. } => "Both",
            SamplerKind::Custom(_) => "Custom",
        };
        f.debug_tuple("ChannelSampler").field(&name).finish()
    }
}

impl<T: Real> ChannelSampler<T> {
    pub fn sample_f64(&self, rng: &mut dyn RngCore) -> f64 {
        match &self.kind {
            SamplerKind::Unit => 1.0,
            SamplerKind::Shadow { two_sigma } => {
                let g: f64 = StandardNormal.sample(rng);
                (two_sigma * g).exp()
            }
            SamplerKind::Fading(gamma) => gamma.sample(rng),
            SamplerKind::Both { two_sigma, fading } => {
                let g: f64 = StandardNormal.sample(rng);
                (two_sigma * g).exp() * fading.sample(rng)
            }
            SamplerKind::Custom(f) => f(rng).as_f64(),
        }
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> T {
        match &self.kind {
            SamplerKind::Custom(f) => f(rng),
            _ => T::lit(self.sample_f64(rng)),
        }
    }

    /// `true` when every draw equals one.
    pub fn is_deterministic(&self) -> bool {
        matches!(self.kind, SamplerKind::Unit)
    }
}
