use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{StableParams, TotallySkewedStable};
use crate::error::Result;
use crate::numerics::{integrate, QuadConfig};
use crate::scalar::Real;

/// Lower truncation point of the quadrature, as a CDF level.
pub const EXPECTATION_LOWER_TAIL: f64 = 1e-14;
/// Upper truncation point of the quadrature, as a survival level.
pub const EXPECTATION_UPPER_TAIL: f64 = 1e-9;
/// Trials of the Monte Carlo path.
pub const DEFAULT_EXPECTATION_MC_TRIALS: usize = 1_000_000;

const OUTER_ABS_TOL: f64 = 1e-10;
/// Widest quadrature panel, in ln x.
pub const EXPECTATION_PANEL_WIDTH: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExpectationMethod {
    #[default]
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationOptions {
    pub method: ExpectationMethod,
    pub mc_trials: usize,
    pub seed: u64,
    pub abs_tol: f64,
}

impl Default for ExpectationOptions {
    fn default() -> Self {
        Self {
            method: ExpectationMethod::Quadrature,
            mc_trials: DEFAULT_EXPECTATION_MC_TRIALS,
            seed: 0,
            abs_tol: OUTER_ABS_TOL,
        }
    }
}

/// E_I{f(I)} with its error estimate.
///
/// `error` is the quadrature error bound or, for Monte Carlo, the standard error.
/// `fell_back` is set when quadrature did not converge and the value was
/// recomputed by simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceExpectation<T> {
    pub value: T,
    pub error: T,
    pub method: ExpectationMethod,
    pub fell_back: bool,
}

/// E_I{f(I)} by quadrature against the stable density.
pub fn expectation_over_interference<T: Real>(
    f: impl Fn(T) -> T,
    params: &StableParams<T>,
) -> Result<InterferenceExpectation<T>> {
    expectation_over_interference_with(f, params, &ExpectationOptions::default())
}

/// E_I{f(I)} for bounded `f`.
///
/// Quadrature integrates f(x) p(x) x over u = ln x between the quantiles at
/// [`EXPECTATION_LOWER_TAIL`] and 1 - [`EXPECTATION_UPPER_TAIL`]; the tail
/// masses are charged at the endpoint values of `f`.
pub fn expectation_over_interference_with<T: Real>(
    f: impl Fn(T) -> T,
    params: &StableParams<T>,
    opts: &ExpectationOptions,
) -> Result<InterferenceExpectation<T>> {
    expectation_over_interference_split(f, params, opts, &[])
}

/// [`expectation_over_interference_with`] with known discontinuities of `f`.
///
/// The integration range is split at every positive entry of `breaks` and
/// into panels at most [`EXPECTATION_PANEL_WIDTH`] wide in ln x.
pub fn expectation_over_interference_split<T: Real>(
    f: impl Fn(T) -> T,
    params: &StableParams<T>,
    opts: &ExpectationOptions,
    breaks: &[T],
) -> Result<InterferenceExpectation<T>> {
    let law = TotallySkewedStable::new(*params)?;
    if params.gamma == T::zero() {
        return Ok(InterferenceExpectation {
            value: f(T::zero()),
            error: T::zero(),
            method: opts.method,
            fell_back: false,
        });
    }
    if opts.method == ExpectationMethod::MonteCarlo {
        return Ok(monte_carlo(&f, &law, opts, false));
    }
    let lo = law.quantile(T::lit(EXPECTATION_LOWER_TAIL))?;
    let hi = law.quantile(T::one() - T::lit(EXPECTATION_UPPER_TAIL))?;
    let edges = panel_edges(lo.ln(), hi.ln(), breaks);
    let cfg = QuadConfig::with_tolerances(opts.abs_tol / (edges.len() - 1) as f64, 0.0);
    let integrand = |u: T| {
        let x = u.exp();
        f(x) * law.pdf(x) * x
    };
    let (mut value, mut error) = (T::zero(), T::zero());
    for w in edges.windows(2) {
        let r = integrate(integrand, w[0], w[1], &cfg);
        if !r.converged {
            return Ok(monte_carlo(&f, &law, opts, true));
        }
        value += r.value;
        error += r.error;
    }
    let (f_lo, f_hi) = (f(lo), f(hi));
    let lower_mass = T::lit(EXPECTATION_LOWER_TAIL);
    let upper_mass = T::lit(EXPECTATION_UPPER_TAIL);
    value += f_lo * lower_mass + f_hi * upper_mass;
    error += f_lo.abs() * lower_mass + f_hi.abs() * upper_mass;
    Ok(InterferenceExpectation {
        value,
        error,
        method: ExpectationMethod::Quadrature,
        fell_back: false,
    })
}

/// Sorted panel edges in ln x covering [a, b].
fn panel_edges<T: Real>(a: T, b: T, breaks: &[T]) -> Vec<T> {
    let mut edges: Vec<T> = breaks
        .iter()
        .filter(|x| **x > T::zero())
        .map(|x| x.ln())
        .filter(|u| *u > a && *u < b)
        .collect();
    let width = T::lit(EXPECTATION_PANEL_WIDTH);
    let panels = ((b - a) / width).ceil().to_usize().unwrap_or(1).max(1);
    let step = (b - a) / T::from_count(panels);
    edges.extend((0..=panels).map(|k| {
        if k == panels {
            b
        } else {
            a + step * T::from_count(k)
        }
    }));
    edges.sort_by(|p, q| p.partial_cmp(q).unwrap_or(std::cmp::Ordering::Equal));
    edges.dedup();
    edges
}

fn monte_carlo<T: Real>(
    f: &impl Fn(T) -> T,
    law: &TotallySkewedStable<T>,
    opts: &ExpectationOptions,
    fell_back: bool,
) -> InterferenceExpectation<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n = opts.mc_trials.max(2);
    let (mut mean, mut m2) = (0.0, 0.0);
    for i in 0..n {
        let v = f(T::lit(law.sample(&mut rng))).as_f64();
        let d = v - mean;
        mean += d / (i + 1) as f64;
        m2 += d * (v - mean);
    }
    let stderr = (m2 / (n - 1) as f64 / n as f64).sqrt();
    InterferenceExpectation {
        value: T::lit(mean),
        error: T::lit(stderr),
        method: ExpectationMethod::MonteCarlo,
        fell_back,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_laplace() {
        let p = StableParams::<f64>::skewed(0.5, 1.0).unwrap();
        let one = expectation_over_interference(|_| 1.0, &p).unwrap();
        assert!((one.value - 1.0).abs() < 1e-9, "{one:?}");
        let e = expectation_over_interference(|x: f64| (-x).exp(), &p).unwrap();
        assert!((e.value - 0.243_116_734_434_214_2).abs() < 1e-9, "{e:?}");
        assert!(!e.fell_back);
    }

    #[test]
    fn breakpoint_resolves_a_step() {
        let p = StableParams::<f64>::skewed(1.0 / 3.0, 3.968_627_466_273_31).unwrap();
        let step = |x: f64| if x <= 99.0 { 1.0 } else { 0.0 };
        let e =
            expectation_over_interference_split(step, &p, &ExpectationOptions::default(), &[99.0])
                .unwrap();
        assert!((e.value - 0.443_652_747_321_405_5).abs() < 1e-9, "{e:?}");
    }

    #[test]
    fn indicator_gives_cdf() {
        let p = StableParams::<f64>::skewed(0.5, 1.0).unwrap();
        let x0 = 2.198_109_338_317_732_4;
        let e =
            expectation_over_interference(|x: f64| if x <= x0 { 1.0 } else { 0.0 }, &p).unwrap();
        assert!((e.value - 0.5).abs() < 1e-8, "{e:?}");
    }

    #[test]
    fn monte_carlo_path() {
        let p = StableParams::<f64>::skewed(0.5, 1.0).unwrap();
        let opts = ExpectationOptions {
            method: ExpectationMethod::MonteCarlo,
            mc_trials: 200_000,
            ..Default::default()
        };
        let e = expectation_over_interference_with(|x: f64| (-x).exp(), &p, &opts).unwrap();
        assert!(
            (e.value - 0.243_116_734_434_214_2).abs() < 4.0 * e.error,
            "{e:?}"
        );
    }

    #[test]
    fn degenerate_law_evaluates_at_zero() {
        let p = StableParams::<f64>::skewed(0.5, 0.0).unwrap();
        let e = expectation_over_interference(|x: f64| (-x).exp() + 1.0, &p).unwrap();
        assert_eq!(e.value, 2.0);
    }
}
