use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp1};

use super::StableParams;
use crate::error::{Error, Result};
use crate::numerics::{integrate, QuadConfig};
use crate::scalar::Real;

/// Absolute accuracy target of [`TotallySkewedStable::cdf`].
pub const CDF_ABS_TOL: f64 = 1e-8;

const INNER_REL_TOL: f64 = 1e-11;
const INNER_MAX_INTERVALS: usize = 200;

/// A totally skewed stable law with 0 < α < 1, prepared for repeated evaluation.
///
/// With t = (x/σ)^{-α/(1-α)} the distribution function is
/// F(x) = (1/π) ∫_0^π exp(-t K(φ)) dφ, where
/// K(φ) = cos(πα/2)^{-1/(1-α)} [sin(αφ)^α sin((1-α)φ)^{1-α} / sin φ]^{1/(1-α)}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotallySkewedStable<T> {
    params: StableParams<T>,
    scale: T,
    /// -α/(1-α)
    t_exponent: T,
    /// ln cos(πα/2)^{-1/(1-α)}
    ln_k0: T,
    cfg: QuadConfig<T>,
}

impl<T: Real> TotallySkewedStable<T> {
    pub fn new(params: StableParams<T>) -> Result<Self> {
        params.require_positive_support("stable law numerics")?;
        let a = params.alpha;
        let one_minus = T::one() - a;
        Ok(Self {
            params,
            scale: params.scale(),
            t_exponent: -a / one_minus,
            ln_k0: -(T::FRAC_PI_2() * a).cos().ln() / one_minus,
            cfg: QuadConfig {
                abs_tol: T::min_positive_value(),
                rel_tol: T::tol(INNER_REL_TOL),
                max_intervals: INNER_MAX_INTERVALS,
            },
        })
    }

    pub fn params(&self) -> StableParams<T> {
        self.params
    }

    /// σ = γ^{1/α}.
    pub fn scale(&self) -> T {
        self.scale
    }

    fn degenerate(&self) -> bool {
        self.params.gamma == T::zero()
    }

    /// ln K at φ = π - ψ. Parametrizing by ψ keeps full precision where
    /// K blows up (φ → π).
    fn ln_k(&self, psi: T) -> T {
        let a = self.params.alpha;
        let one_minus = T::one() - a;
        let phi = T::PI() - psi;
        self.ln_k0
            + (a * (a * phi).sin().ln() + one_minus * (one_minus * phi).sin().ln() - psi.sin().ln())
                / one_minus
    }

    /// lim_{φ→0} ln K = ln K0 + (α ln α + (1-α) ln(1-α)) / (1-α).
    fn ln_k_min(&self) -> T {
        let a = self.params.alpha;
        let one_minus = T::one() - a;
        self.ln_k0 + (a * a.ln() + one_minus * one_minus.ln()) / one_minus
    }

    fn ln_t(&self, x: T) -> T {
        self.t_exponent * (x / self.scale).ln()
    }

    /// ψ in (0, π) where ln t + ln K(ψ) = level, if the level is crossed.
    fn crossing(&self, ln_t: T, level: T) -> Option<T> {
        let g = |u: T| ln_t + self.ln_k(u.exp()) - level;
        let lo = T::lit(-690.0).max(T::min_positive_value().ln() + T::lit(10.0));
        let hi = T::PI().ln() - T::epsilon();
        // g decreases in ln ψ.
        if g(lo) <= T::zero() || g(hi) >= T::zero() {
            return None;
        }
        crate::numerics::bisect(g, lo, hi, T::tol(1e-12), 200)
            .ok()
            .map(|u| u.exp())
    }

    /// (1/π) ∫_0^π h(ln tK) dφ, split where the integrand changes fastest.
    ///
    /// Beyond the first cut the integral runs over ln ψ, which resolves the
    /// algebraic decay of 1 - e^{-tK} away from the pole of K.
    fn zolotarev(&self, x: T, h: impl Fn(T) -> T) -> T {
        let ln_t = self.ln_t(x);
        let mut cuts: Vec<T> = Vec::with_capacity(2);
        cuts.extend(self.crossing(ln_t, T::zero()));
        let ln_tk_min = ln_t + self.ln_k_min();
        cuts.extend(self.crossing(ln_t, ln_tk_min.exp().ln_1p()));
        cuts.sort_by(|p, q| p.partial_cmp(q).unwrap_or(std::cmp::Ordering::Equal));
        cuts.dedup();
        let integrand = |psi: T| h(ln_t + self.ln_k(psi));
        let Some(&first) = cuts.first() else {
            return integrate(&integrand, T::zero(), T::PI(), &self.cfg).value / T::PI();
        };
        let mut total = integrate(&integrand, T::zero(), first, &self.cfg).value;
        let log_integrand = |v: T| {
            let psi = v.exp();
            integrand(psi) * psi
        };
        let mut edges: Vec<T> = cuts.iter().map(|c| c.ln()).collect();
        edges.push(T::PI().ln());
        for w in edges.windows(2) {
            total += integrate(&log_integrand, w[0], w[1], &self.cfg).value;
        }
        total / T::PI()
    }

    /// P{X ≤ x}.
    pub fn cdf(&self, x: T) -> T {
        if self.degenerate() {
            return if x >= T::zero() { T::one() } else { T::zero() };
        }
        if !(x > T::zero()) {
            return T::zero();
        }
        if x.is_infinite() {
            return T::one();
        }
        let v = self.zolotarev(x, |ln_tk| (-ln_tk.exp()).exp());
        v.max(T::zero()).min(T::one())
    }

    /// P{X > x}, accurate in the upper tail.
    pub fn sf(&self, x: T) -> T {
        if self.degenerate() {
            return if x >= T::zero() { T::zero() } else { T::one() };
        }
        if !(x > T::zero()) {
            return T::one();
        }
        if x.is_infinite() {
            return T::zero();
        }
        let v = self.zolotarev(x, |ln_tk| -(-ln_tk.exp()).exp_m1());
        v.max(T::zero()).min(T::one())
    }

    /// Density; zero for x ≤ 0.
    pub fn pdf(&self, x: T) -> T {
        if self.degenerate() || !(x > T::zero()) || x.is_infinite() {
            return T::zero();
        }
        let a = self.params.alpha;
        // tK e^{-tK} in log form so large tK underflows to 0 instead of NaN.
        let v = self.zolotarev(x, |ln_tk| (ln_tk - ln_tk.exp()).exp());
        (a / ((T::one() - a) * x) * v).max(T::zero())
    }

    /// Smallest x with F(x) ≥ p, by bisection in ln x.
    pub fn quantile(&self, p: T) -> Result<T> {
        if !(p > T::zero() && p < T::one()) {
            return Err(Error::domain(
                "stable quantile",
                format!("p must lie in (0,1), got {}", p.as_f64()),
            ));
        }
        if self.degenerate() {
            return Ok(T::zero());
        }
        let upper = p > T::lit(0.5);
        let tail = T::one() - p;
        // g is increasing in ln x with its root at the quantile.
        let g = |u: T| {
            let x = u.exp();
            if upper {
                tail - self.sf(x)
            } else {
                self.cdf(x) - p
            }
        };
        let step = T::lit(2.0);
        let (mut lo, mut hi) = (self.scale.ln() - step, self.scale.ln() + step);
        let limit = T::lit(1500.0);
        while g(lo) > T::zero() {
            lo -= step;
            if lo < self.scale.ln() - limit {
                return Err(Error::NotConverged {
                    op: "stable quantile",
                    reason: "lower bracket not found".into(),
                });
            }
        }
        while g(hi) < T::zero() {
            hi += step;
            if hi > self.scale.ln() + limit {
                return Err(Error::NotConverged {
                    op: "stable quantile",
                    reason: "upper bracket not found".into(),
                });
            }
        }
        let u = crate::numerics::bisect(g, lo, hi, T::tol(1e-13), 300)?;
        Ok(u.exp())
    }

    /// One draw, computed in `f64`.
    ///
    /// Chambers–Mallows–Stuck for β = 1, α < 1: with U uniform on (0, π) and
    /// E standard exponential, sin(αU)/sin(U)^{1/α} · [sin((1-α)U)/E]^{(1-α)/α}
    /// has Laplace transform exp(-s^α).
    pub fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        if self.degenerate() {
            return 0.0;
        }
        let a = self.params.alpha.as_f64();
        let scale = self.scale.as_f64() * (std::f64::consts::FRAC_PI_2 * a).cos().powf(-1.0 / a);
        let u = std::f64::consts::PI * rng.random::<f64>();
        let u = if u > 0.0 { u } else { f64::MIN_POSITIVE };
        let e: f64 = Exp1.sample(rng);
        let y =
            (a * u).sin() / u.sin().powf(1.0 / a) * (((1.0 - a) * u).sin() / e).powf((1.0 - a) / a);
        scale * y
    }
}

/// F_I(x) of a totally skewed law with α < 1.
pub fn stable_cdf<T: Real>(params: &StableParams<T>, x: T) -> Result<T> {
    Ok(TotallySkewedStable::new(*params)?.cdf(x))
}

/// Density of a totally skewed law with α < 1; zero for x ≤ 0.
pub fn stable_pdf<T: Real>(params: &StableParams<T>, x: T) -> Result<T> {
    Ok(TotallySkewedStable::new(*params)?.pdf(x))
}

/// One draw of a totally skewed law with α < 1.
pub fn sample_stable<T: Real>(params: &StableParams<T>, rng: &mut dyn RngCore) -> Result<T> {
    Ok(T::lit(TotallySkewedStable::new(*params)?.sample(rng)))
}
