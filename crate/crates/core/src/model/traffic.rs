use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::numerics::{bisect, truncated_exp_moment_integral};
use crate::scalar::Real;

/// Packet traffic pattern of every node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrafficModel<T> {
    /// Slot-aligned packets, each slot used with probability `q`.
    SlottedSync { q: T },
    /// Slotted packets with independent random slot offsets.
    SlottedAsync { q: T },
    /// Poisson arrivals at rate `lambda_p`, fixed length `packet_len`, no buffering.
    ExponentialInterarrivals { lambda_p: T, packet_len: T },
}

/// How [`duty_cycle_moment`] evaluates E{Δ^{1/b}}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DutyMomentMode {
    #[default]
    Exact,
    /// Light-load approximation 2λ_pL·b/(b+1); exponential traffic only.
    Approximate,
}

/// Probabilities of the four activity patterns of a node over a probe packet.
///
/// `p_kl` is the probability of k packets in the interval preceding the probe
/// packet and l packets within it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueEvents<T> {
    pub p00: T,
    pub p01: T,
    pub p10: T,
    pub p11: T,
}

/// Steady state (π0, π1) of the single-server loss queue with deterministic service.
pub fn queue_steady_state<T: Real>(lambda_p: T, packet_len: T) -> Result<(T, T)> {
    check_exponential(lambda_p, packet_len)?;
    let a = lambda_p * packet_len;
    let pi0 = (T::one() + a).recip();
    Ok((pi0, a * pi0))
}

/// Event probabilities as a function of the offered load a = λ_pL.
pub fn queue_event_probs<T: Real>(load: T) -> Result<QueueEvents<T>> {
    if !(load >= T::zero()) || load.is_infinite() {
        return Err(Error::domain(
            "queue_event_probs",
            format!("load must be finite and nonnegative, got {}", load.as_f64()),
        ));
    }
    let inv = (T::one() + load).recip();
    let one_minus_e = -(-load).exp_m1();
    // a + e^{-a} - 1 = a - (1 - e^{-a}); expanded for small a to avoid cancellation.
    let both = if load < T::lit(1e-3) {
        let a2 = load * load;
        a2 * (T::lit(0.5) - load / T::lit(6.0) + a2 / T::lit(24.0))
    } else {
        load - one_minus_e
    };
    Ok(QueueEvents {
        p00: (-load).exp() * inv,
        p01: one_minus_e * inv,
        p10: one_minus_e * inv,
        p11: both * inv,
    })
}

fn check_q<T: Real>(q: T) -> Result<()> {
    if !(q >= T::zero() && q <= T::one()) {
        return Err(Error::InvalidModel(format!(
            "transmit probability q must lie in [0,1], got {}",
            q.as_f64()
        )));
    }
    Ok(())
}

fn check_exponential<T: Real>(lambda_p: T, packet_len: T) -> Result<()> {
    if !(lambda_p >= T::zero()) || lambda_p.is_infinite() {
        return Err(Error::InvalidModel(format!(
            "arrival rate must be finite and nonnegative, got {}",
            lambda_p.as_f64()
        )));
    }
    if !(packet_len > T::zero()) || packet_len.is_infinite() {
        return Err(Error::InvalidModel(format!(
            "packet length must be finite and positive, got {}",
            packet_len.as_f64()
        )));
    }
    Ok(())
}

impl<T: Real> TrafficModel<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::SlottedSync { q } | Self::SlottedAsync { q } => check_q(q),
            Self::ExponentialInterarrivals {
                lambda_p,
                packet_len,
            } => check_exponential(lambda_p, packet_len),
        }
    }

    /// Exponential traffic whose transmit probability equals `p_t`.
    pub fn exponential_with_transmit_prob(p_t: T, packet_len: T) -> Result<Self> {
        if !(p_t >= T::zero() && p_t < T::one()) {
            return Err(Error::domain(
                "exponential_with_transmit_prob",
                format!("p_t must lie in [0,1), got {}", p_t.as_f64()),
            ));
        }
        let load = p_t / (T::one() - p_t);
        let model = Self::ExponentialInterarrivals {
            lambda_p: load / packet_len,
            packet_len,
        };
        model.validate()?;
        Ok(model)
    }

    /// Offered load λ_pL of exponential traffic.
    pub fn load(&self) -> Option<T> {
        match *self {
            Self::ExponentialInterarrivals {
                lambda_p,
                packet_len,
            } => Some(lambda_p * packet_len),
            _ => None,
        }
    }

    /// Probability that the probe transmits.
    pub fn transmit_prob(&self) -> Result<T> {
        self.validate()?;
        Ok(match *self {
            Self::SlottedSync { q } | Self::SlottedAsync { q } => q,
            Self::ExponentialInterarrivals {
                lambda_p,
                packet_len,
            } => queue_steady_state(lambda_p, packet_len)?.1,
        })
    }

    /// Probability that a given node stays silent for the whole probe packet.
    pub fn silent_prob(&self) -> Result<T> {
        self.validate()?;
        Ok(match *self {
            Self::SlottedSync { q } => T::one() - q,
            Self::SlottedAsync { q } => (T::one() - q) * (T::one() - q),
            Self::ExponentialInterarrivals {
                lambda_p,
                packet_len,
            } => queue_event_probs(lambda_p * packet_len)?.p00,
        })
    }

    /// E{Δ^{1/b}} for the overlap fraction Δ of an interferer with the probe packet.
    pub fn duty_cycle_moment(&self, b: T, mode: DutyMomentMode) -> Result<T> {
        self.validate()?;
        if !(b > T::one()) || b.is_infinite() {
            return Err(Error::domain(
                "duty_cycle_moment",
                format!("b must be finite and exceed 1, got {}", b.as_f64()),
            ));
        }
        let ratio = b / (b + T::one());
        let two = T::lit(2.0);
        match (*self, mode) {
            (Self::SlottedSync { q }, DutyMomentMode::Exact) => Ok(q),
            (Self::SlottedAsync { q }, DutyMomentMode::Exact) => {
                Ok(q * q + two * q * (T::one() - q) * ratio)
            }
            (
                Self::ExponentialInterarrivals {
                    lambda_p,
                    packet_len,
                },
                DutyMomentMode::Exact,
            ) => {
                let a = lambda_p * packet_len;
                if a == T::zero() {
                    return Ok(T::zero());
                }
                let x = b.recip();
                let inv = (T::one() + a).recip();
                let single = truncated_exp_moment_integral(x, a)?;
                let double = truncated_exp_moment_integral(x + T::one(), a)?;
                Ok(two * a * inv * single + a * a * inv * double)
            }
            (
                Self::ExponentialInterarrivals {
                    lambda_p,
                    packet_len,
                },
                DutyMomentMode::Approximate,
            ) => Ok(two * lambda_p * packet_len * ratio),
            (_, DutyMomentMode::Approximate) => Err(Error::Unsupported(
                "the approximate duty-cycle moment exists only for exponential interarrivals"
                    .into(),
            )),
        }
    }

    /// Builds a reusable sampler of the overlap fraction Δ.
    pub fn duty_sampler(&self) -> Result<DutySampler> {
        self.validate()?;
        Ok(match *self {
            Self::SlottedSync { q } => DutySampler::Sync { q: q.as_f64() },
            Self::SlottedAsync { q } => {
                let q = q.as_f64();
                DutySampler::Async {
                    p_zero: (1.0 - q) * (1.0 - q),
                    p_one: q * q,
                }
            }
            Self::ExponentialInterarrivals {
                lambda_p,
                packet_len,
            } => {
                let a = (lambda_p * packet_len).as_f64();
                let ev = queue_event_probs(a)?;
                DutySampler::Exponential {
                    a,
                    p00: ev.p00,
                    p_single: ev.p01 + ev.p10,
                }
            }
        })
    }

    /// One draw of Δ; prefer [`TrafficModel::duty_sampler`] in loops.
    pub fn sample_duty_cycle(&self, rng: &mut dyn RngCore) -> Result<T> {
        Ok(T::lit(self.duty_sampler()?.sample(rng)))
    }
}

/// Free-function form of [`TrafficModel::transmit_prob`].
pub fn transmit_prob<T: Real>(traffic: &TrafficModel<T>) -> Result<T> {
    traffic.transmit_prob()
}

/// Free-function form of [`TrafficModel::silent_prob`].
pub fn silent_prob<T: Real>(traffic: &TrafficModel<T>) -> Result<T> {
    traffic.silent_prob()
}

/// Free-function form of [`TrafficModel::duty_cycle_moment`].
pub fn duty_cycle_moment<T: Real>(
    traffic: &TrafficModel<T>,
    b: T,
    mode: DutyMomentMode,
) -> Result<T> {
    traffic.duty_cycle_moment(b, mode)
}

/// Free-function form of [`TrafficModel::sample_duty_cycle`].
pub fn sample_duty_cycle<T: Real>(traffic: &TrafficModel<T>, rng: &mut dyn RngCore) -> Result<T> {
    traffic.sample_duty_cycle(rng)
}

/// Prepared sampler of the overlap fraction, computed in `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DutySampler {
    Sync { q: f64 },
    Async { p_zero: f64, p_one: f64 },
    Exponential { a: f64, p00: f64, p_single: f64 },
}

/// Tolerance of the numeric inverse CDF for the two-packet overlap.
pub const OVERLAP_INVERSE_TOL: f64 = 1e-10;

impl DutySampler {
    pub fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        match *self {
            Self::Sync { q } => {
                if rng.random::<f64>() < q {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Async { p_zero, p_one } => {
                let u: f64 = rng.random();
                if u < p_zero {
                    0.0
                } else if u < p_zero + p_one {
                    1.0
                } else {
                    rng.random()
                }
            }
            Self::Exponential { a, p00, p_single } => {
                let u: f64 = rng.random();
                if u < p00 {
                    0.0
                } else if u < p00 + p_single {
                    1.0 - single_overlap_offset(a, rng.random())
                } else {
                    1.0 - double_overlap_offset(a, rng.random())
                }
            }
        }
    }

    /// Probability that Δ > 0.
    pub fn active_prob(&self) -> f64 {
        match *self {
            Self::Sync { q } => q,
            Self::Async { p_zero, .. } => 1.0 - p_zero,
            Self::Exponential { p00, .. } => 1.0 - p00,
        }
    }
}

/// Inverse CDF of the truncated exponential density a e^{-at}/(1 - e^{-a}) on [0,1].
fn single_overlap_offset(a: f64, u: f64) -> f64 {
    if a < 1e-12 {
        return u;
    }
    (-(u * (-a).exp_m1()).ln_1p() / a).clamp(0.0, 1.0)
}

/// ∫_0^x (1 - t) e^{-at} dt.
fn double_overlap_mass(a: f64, x: f64) -> f64 {
    if a <= 1.0 {
        // Σ (-a)^n/n! (x^{n+1}/(n+1) - x^{n+2}/(n+2))
        let mut coeff = 1.0;
        let mut xp = x;
        let mut sum = 0.0;
        for n in 0..60 {
            if n > 0 {
                coeff *= -a / n as f64;
            }
            let nf = n as f64;
            let term = coeff * (xp / (nf + 1.0) - xp * x / (nf + 2.0));
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
            xp *= x;
        }
        sum
    } else {
        let e = (-a * x).exp();
        -(-a * x).exp_m1() / a - (1.0 - e * (1.0 + a * x)) / (a * a)
    }
}

/// Inverse CDF of the density proportional to (1 - t) e^{-at} on [0,1].
fn double_overlap_offset(a: f64, u: f64) -> f64 {
    let total = double_overlap_mass(a, 1.0);
    let target = u * total;
    bisect(
        |x| double_overlap_mass(a, x) - target,
        0.0,
        1.0,
        OVERLAP_INVERSE_TOL,
        200,
    )
    .unwrap_or(u)
}
