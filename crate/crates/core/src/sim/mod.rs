//! Monte Carlo oracle: Poisson fields, channel gains and traffic timelines
//! simulated from first principles, independently of the analytic formulas.
//!
//! Every trial draws from its own ChaCha stream selected by the trial index,
//! so results do not depend on scheduling and are bit-reproducible for a
//! fixed master seed.

mod timeline;

use std::collections::BTreeMap;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ChannelSampler, PropagationModel, Scenario, TrafficModel};
use crate::scalar::Real;
use timeline::Timeline;

/// Upper tail of the gain quantile that sets the automatic radius.
pub const AUTO_RADIUS_TAIL: f64 = 1e-6;
/// Gain draws used to estimate the quantile of a custom channel.
pub const CUSTOM_QUANTILE_DRAWS: usize = 100_000;
/// Largest number of radius doublings tried by the automatic radius.
pub const MAX_RADIUS_DOUBLINGS: usize = 8;
/// Floor of the truncation-convergence tolerance.
pub const TRUNCATION_FLOOR: f64 = 1e-4;
/// Quantile levels reported by [`simulate_interference`].
pub const INTERFERENCE_LEVELS: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

const BATCH: usize = 10_000;

/// Truncation radius of the simulated field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RMax {
    /// Chosen from the channel and checked by doubling.
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Number of trials; an upper bound when `target_stderr` is set.
    pub trials: usize,
    pub r_max: RMax,
    pub master_seed: u64,
    /// Stop early, in batches of 10^4 trials, once the standard error is below this.
    pub target_stderr: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            trials: 100_000,
            r_max: RMax::Auto,
            master_seed: 0,
            target_stderr: None,
        }
    }
}

impl SimConfig {
    pub fn new(trials: usize, master_seed: u64) -> Self {
        Self {
            trials,
            master_seed,
            ..Default::default()
        }
    }

    pub fn with_r_max(mut self, r_max: RMax) -> Self {
        self.r_max = r_max;
        self
    }

    pub fn validate<T: Real>(&self, scenario: &Scenario<T>) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::domain("sim", "trials must be at least 1"));
        }
        if let RMax::Fixed(r) = self.r_max {
            if !(r > scenario.r0.as_f64()) || r.is_infinite() {
                return Err(Error::domain(
                    "sim",
                    format!("r_max must be finite and exceed r0, got {r}"),
                ));
            }
        }
        if let Some(t) = self.target_stderr {
            if !(t > 0.0) {
                return Err(Error::domain(
                    "sim",
                    format!("target_stderr must be positive, got {t}"),
                ));
            }
        }
        Ok(())
    }
}

/// How the truncation radius was settled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    Fixed,
    /// Doubling the radius moved the estimate by less than the tolerance.
    Converged {
        doublings: usize,
    },
    /// The doubling cap was reached first.
    NotConverged,
}

/// Result of a simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimEstimate {
    pub mean: f64,
    /// Sample standard deviation over √trials.
    pub stderr: f64,
    pub trials: usize,
    pub r_max: f64,
    pub truncation: Truncation,
    /// Named auxiliary statistics.
    pub extras: BTreeMap<String, f64>,
    /// Counts per value of a simulated count, when one is simulated.
    pub histogram: Vec<u64>,
    /// (level, empirical quantile) pairs, when reported.
    pub quantiles: Vec<(f64, f64)>,
}

impl SimEstimate {
    fn from_samples(samples: &[f64], r_max: f64, truncation: Truncation) -> Self {
        let s = Moments::of(samples.iter().copied());
        Self {
            mean: s.mean,
            stderr: s.stderr(),
            trials: samples.len(),
            r_max,
            truncation,
            extras: BTreeMap::from([("variance".to_string(), s.variance())]),
            histogram: Vec::new(),
            quantiles: Vec::new(),
        }
    }
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn of(xs: impl Iterator<Item = f64>) -> Self {
        let mut s = Self::default();
        for x in xs {
            s.n += 1;
            let d = x - s.mean;
            s.mean += d / s.n as f64;
            s.m2 += d * (x - s.mean);
        }
        s
    }

    fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    fn stderr(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// Independent stream of trial `index`.
fn trial_rng(master_seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index as u64);
    rng
}

/// Runs trials in parallel; the output is ordered by trial index.
fn run_trials<const K: usize>(
    cfg: &SimConfig,
    f: impl Fn(&mut ChaCha8Rng) -> [f64; K] + Sync,
    stderr_of: impl Fn(&[[f64; K]]) -> f64,
) -> Vec<[f64; K]> {
    let mut out: Vec<[f64; K]> = Vec::with_capacity(cfg.trials);
    while out.len() < cfg.trials {
        let start = out.len();
        let end = match cfg.target_stderr {
            Some(_) => (start + BATCH).min(cfg.trials),
            None => cfg.trials,
        };
        let batch: Vec<[f64; K]> = (start..end)
            .into_par_iter()
            .map(|i| f(&mut trial_rng(cfg.master_seed, i)))
            .collect();
        out.extend(batch);
        if let Some(target) = cfg.target_stderr {
            if out.len() >= 2 && stderr_of(&out) <= target {
                break;
            }
        }
    }
    out
}

fn column<const K: usize>(rows: &[[f64; K]], k: usize) -> Vec<f64> {
    rows.iter().map(|r| r[k]).collect()
}

fn outer_stderr(rows: &[[f64; 2]]) -> f64 {
    Moments::of(rows.iter().map(|r| r[1])).stderr()
}

/// Node distances of a Poisson field of density `lambda` in a disc of radius
/// `r_max`, sorted ascending.
pub fn generate_field(lambda: f64, r_max: f64, rng: &mut dyn RngCore) -> Vec<f64> {
    let mut r = field_squared(lambda, r_max, rng);
    r.iter_mut().for_each(|x| *x = x.sqrt());
    r.sort_by(|a, b| a.total_cmp(b));
    r
}

/// Squared distances, unsorted.
fn field_squared(lambda: f64, r_max: f64, rng: &mut dyn RngCore) -> Vec<f64> {
    let n = node_count(lambda, r_max, rng);
    let r2 = r_max * r_max;
    (0..n).map(|_| r2 * rng.random::<f64>()).collect()
}

fn node_count(lambda: f64, r_max: f64, rng: &mut dyn RngCore) -> usize {
    let mean = lambda * std::f64::consts::PI * r_max * r_max;
    if !(mean > 0.0) {
        return 0;
    }
    match Poisson::new(mean) {
        Ok(p) => p.sample(rng) as usize,
        Err(_) => 0,
    }
}

/// d^b, with repeated multiplication for small integer b.
#[derive(Debug, Clone, Copy)]
struct PathLoss {
    b: f64,
    int_b: Option<i32>,
}

impl PathLoss {
    fn new(b: f64) -> Self {
        let int_b = (b.fract() == 0.0 && b.abs() <= 16.0).then_some(b as i32);
        Self { b, int_b }
    }

    /// (R²)^b = R^{2b}.
    fn of_squared(&self, r2: f64) -> f64 {
        match self.int_b {
            Some(k) => r2.powi(k),
            None => r2.powf(self.b),
        }
    }
}

/// Plain `f64` view of the inputs.
struct Setup<T: Real> {
    lambda: f64,
    p0: f64,
    p1: f64,
    probe_loss: f64,
    loss: PathLoss,
    gain: ChannelSampler<T>,
    traffic: Timeline,
}

impl<T: Real> Setup<T> {
    fn new(
        scenario: &Scenario<T>,
        model: &PropagationModel<T>,
        traffic: &TrafficModel<T>,
    ) -> Result<Self> {
        scenario.validate()?;
        model.validate()?;
        let b = scenario.b.as_f64();
        Ok(Self {
            lambda: scenario.lambda.as_f64(),
            p0: scenario.p0.as_f64(),
            p1: scenario.p1.as_f64(),
            probe_loss: scenario.r0.as_f64().powf(2.0 * b),
            loss: PathLoss::new(b),
            gain: model.sampler()?,
            traffic: Timeline::new(traffic)?,
        })
    }
}

/// Radius beyond which a node reaches `power` with probability below
/// [`AUTO_RADIUS_TAIL`].
fn reach_radius<T: Real>(
    scenario: &Scenario<T>,
    model: &PropagationModel<T>,
    power: f64,
    seed: u64,
) -> Result<f64> {
    let z = match model {
        PropagationModel::Custom { .. } => {
            let s = model.sampler()?;
            let mut rng = trial_rng(seed, usize::MAX);
            (0..CUSTOM_QUANTILE_DRAWS)
                .map(|_| s.sample_f64(&mut rng))
                .fold(0.0, f64::max)
        }
        _ => model
            .gain_upper_quantile(T::lit(AUTO_RADIUS_TAIL))?
            .as_f64(),
    };
    let b = scenario.b.as_f64();
    let r = (scenario.p1.as_f64() * z / power).powf(0.5 / b);
    Ok(r.max(scenario.r0.as_f64()))
}

/// Starting radius of the interference simulations: where a single node with
/// a gain at the [`AUTO_RADIUS_TAIL`] quantile is received at the noise floor
/// θ*N, or at P* when no noise floor is set.
fn interference_start_radius<T: Real>(
    scenario: &Scenario<T>,
    model: &PropagationModel<T>,
    seed: u64,
) -> Result<f64> {
    let floor = match (scenario.theta_star, scenario.noise) {
        (Some(t), Some(n)) if n > T::zero() => Some((t * n).as_f64()),
        _ => scenario.p_star.map(|p| p.as_f64()),
    };
    let r0 = scenario.r0.as_f64();
    match floor {
        Some(p) if p > 0.0 => Ok(reach_radius(scenario, model, p, seed)?.max(2.0 * r0)),
        _ => Ok(4.0 * r0),
    }
}

/// Runs `trial(rng, r_inner, r_outer)` at a fixed radius or doubles an
/// automatic radius until the inner and outer estimates agree.
///
/// `gap` returns the largest change between the two columns and the
/// tolerance it must stay below.
fn with_radius(
    cfg: &SimConfig,
    start: f64,
    trial: impl Fn(&mut ChaCha8Rng, f64, f64) -> [f64; 2] + Sync,
    gap: impl Fn(&[[f64; 2]]) -> (f64, f64),
) -> (Vec<[f64; 2]>, f64, Truncation) {
    match cfg.r_max {
        RMax::Fixed(r) => (
            run_trials(cfg, |rng| trial(rng, r, r), outer_stderr),
            r,
            Truncation::Fixed,
        ),
        RMax::Auto => {
            let mut r = start;
            for doublings in 1..=MAX_RADIUS_DOUBLINGS {
                let rows = run_trials(cfg, |rng| trial(rng, r, 2.0 * r), outer_stderr);
                let (change, tol) = gap(&rows);
                if change < tol || doublings == MAX_RADIUS_DOUBLINGS {
                    let t = if change < tol {
                        Truncation::Converged { doublings }
                    } else {
                        Truncation::NotConverged
                    };
                    return (rows, 2.0 * r, t);
                }
                r *= 2.0;
            }
            unreachable!("the loop returns on its last iteration")
        }
    }
}

/// Change of the mean between radius r and 2r against max(stderr, 1e-4).
fn mean_gap(rows: &[[f64; 2]]) -> (f64, f64) {
    let inner = Moments::of(rows.iter().map(|r| r[0]));
    let outer = Moments::of(rows.iter().map(|r| r[1]));
    (
        (inner.mean - outer.mean).abs(),
        outer.stderr().max(TRUNCATION_FLOOR),
    )
}

/// Number of audible nodes N_A per field: nodes with P1 Z / R^{2b} ≥ P*.
///
/// The automatic radius is the one beyond which a node is audible with
/// probability below [`AUTO_RADIUS_TAIL`]. Extras: `variance`,
/// `dispersion_index` and its null standard deviation `dispersion_stderr`.
pub fn simulate_audible_count<T: Real>(
    scenario: &Scenario<T>,
    model: &PropagationModel<T>,
    sim: &SimConfig,
) -> Result<SimEstimate> {
    sim.validate(scenario)?;
    let p_star = scenario.audibility_threshold()?.as_f64();
    let setup = Setup::new(scenario, model, &TrafficModel::SlottedSync { q: T::one() })?;
    let (r_max, truncation) = match sim.r_max {
        RMax::Fixed(r) => (r, Truncation::Fixed),
        RMax::Auto => (
            reach_radius(scenario, model, p_star, sim.master_seed)?,
            Truncation::Converged { doublings: 0 },
        ),
    };
    let rows = run_trials(
        sim,
        |rng| {
            let field = field_squared(setup.lambda, r_max, rng);
            let n = field
                .iter()
                .filter(|&&r2| {
                    setup.p1 * setup.gain.sample_f64(rng) >= p_star * setup.loss.of_squared(r2)
                })
                .count();
            [n as f64]
        },
        |rows| Moments::of(rows.iter().map(|r| r[0])).stderr(),
    );
    let counts = column(&rows, 0);
    let mut est = SimEstimate::from_samples(&counts, r_max, truncation);
    let n = counts.len();
    let var = est.extras["variance"];
    let index = if est.mean > 0.0 { var / est.mean } else { 0.0 };
    est.extras.insert("dispersion_index".into(), index);
    est.extras.insert(
        "dispersion_stderr".into(),
        if n > 1 {
            (2.0 / (n - 1) as f64).sqrt()
        } else {
            0.0
        },
    );
    let max = counts.iter().fold(0.0_f64, |m, &c| m.max(c)) as usize;
    let mut hist = vec![0u64; max + 1];
    for c in counts {
        hist[c as usize] += 1;
    }
    est.histogram = hist;
    Ok(est)
}

/// Connectivity-based success indicator averaged over trials.
///
/// Each trial samples whether the probe transmits, whether its receiver is
/// silent, whether the probe is audible under a fresh gain, and the activity
/// of every audible interferer over the probe packet.
pub fn simulate_connectivity_throughput<T: Real>(
    scenario: &Scenario<T>,
    model: &PropagationModel<T>,
    traffic: &TrafficModel<T>,
    sim: &SimConfig,
) -> Result<SimEstimate> {
    sim.validate(scenario)?;
    let p_star = scenario.audibility_threshold()?.as_f64();
    let setup = Setup::new(scenario, model, traffic)?;
    let start = reach_radius(scenario, model, p_star, sim.master_seed)?;
    let trial = |rng: &mut ChaCha8Rng, r_in: f64, r_out: f64| -> [f64; 2] {
        let tx = setup.traffic.transmits(rng);
        let rx_silent = setup.traffic.silent(rng);
        let audible = setup.p0 * setup.gain.sample_f64(rng) >= p_star * setup.probe_loss;
        if !(tx && rx_silent && audible) {
            return [0.0, 0.0];
        }
        let r_in2 = r_in * r_in;
        let mut outer_ok = true;
        for r2 in field_squared(setup.lambda, r_out, rng) {
            let heard = setup.p1 * setup.gain.sample_f64(rng) >= p_star * setup.loss.of_squared(r2);
            if heard && !setup.traffic.silent(rng) {
                if r2 <= r_in2 {
                    return [0.0, 0.0];
                }
                outer_ok = false;
            }
        }
        [1.0, if outer_ok { 1.0 } else { 0.0 }]
    };
    let (rows, r_max, truncation) = with_radius(sim, start, trial, mean_gap);
    Ok(estimate_from_pairs(&rows, r_max, truncation))
}

fn estimate_from_pairs(rows: &[[f64; 2]], r_max: f64, truncation: Truncation) -> SimEstimate {
    let mut est = SimEstimate::from_samples(&column(rows, 1), r_max, truncation);
    if !matches!(truncation, Truncation::Fixed) {
        est.extras.insert(
            "half_radius_mean".into(),
            Moments::of(rows.iter().map(|r| r[0])).mean,
        );
    }
    est
}

/// Aggregate interference I = Σ P1 Δ_i Z_i / R_i^{2b} at the probe receiver.
///
/// The stable law of I has no finite mean for b > 1, so `mean` and `stderr`
/// are descriptive only; compare `quantiles` with theory. The automatic
/// radius doubles until P{I ≤ x} at each reported quantile changes by less
/// than max(binomial stderr, 1e-4).
pub fn simulate_interference<T: Real>(
    scenario: &Scenario<T>,
    model: &PropagationModel<T>,
    traffic: &TrafficModel<T>,
    sim: &SimConfig,
) -> Result<SimEstimate> {
    sim.validate(scenario)?;
    scenario.require_stable_exponent()?;
    let setup = Setup::new(scenario, model, traffic)?;
    let start = interference_start_radius(scenario, model, sim.master_seed)?;
    let trial =
        |rng: &mut ChaCha8Rng, r_in: f64, r_out: f64| interference_pair(&setup, rng, r_in, r_out);
    let gap = |rows: &[[f64; 2]]| {
        let outer = sorted(column(rows, 1));
        let n = rows.len() as f64;
        let mut worst = (0.0, 1.0);
        for &q in &INTERFERENCE_LEVELS {
            let x = quantile(&outer, q);
            let below_in = rows.iter().filter(|r| r[0] <= x).count() as f64 / n;
            let below_out = rows.iter().filter(|r| r[1] <= x).count() as f64 / n;
            let tol = (q * (1.0 - q) / n).sqrt().max(TRUNCATION_FLOOR);
            let change = (below_in - below_out).abs();
            if change / tol > worst.0 / worst.1 {
                worst = (change, tol);
            }
        }
        worst
    };
    let (rows, r_max, truncation) = with_radius(sim, start, trial, gap);
    let mut est = SimEstimate::from_samples(&column(&rows, 1), r_max, truncation);
    est.extras.insert("mean_is_finite".into(), 0.0);
    let outer = sorted(column(&rows, 1));
    est.quantiles = INTERFERENCE_LEVELS
        .iter()
        .map(|&q| (q, quantile(&outer, q)))
        .collect();
    Ok(est)
}

/// Interference from the nodes within `r_in` and within `r_out`.
fn interference_pair<T: Real>(
    setup: &Setup<T>,
    rng: &mut ChaCha8Rng,
    r_in: f64,
    r_out: f64,
) -> [f64; 2] {
    let r_in2 = r_in * r_in;
    let (mut inner, mut outer) = (0.0, 0.0);
    let n = node_count(setup.lambda, r_out, rng);
    let r_out2 = r_out * r_out;
    for _ in 0..n {
        let delta = setup.traffic.overlap(rng);
        if delta == 0.0 {
            continue;
        }
        let r2 = r_out2 * rng.random::<f64>();
        let p = setup.p1 * delta * setup.gain.sample_f64(rng) / setup.loss.of_squared(r2);
        outer += p;
        if r2 <= r_in2 {
            inner += p;
        }
    }
    [inner, outer]
}

fn sorted(mut xs: Vec<f64>) -> Vec<f64> {
    xs.sort_by(|a, b| a.total_cmp(b));
    xs
}

/// Lower empirical quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let k = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[k - 1]
}

/// SINR success indicator 1{probe transmits} 1{receiver silent} 1{S/(I+N) ≥ θ*}
/// averaged over trials.
pub fn simulate_sinr_throughput<T: Real>(
    scenario: &Scenario<T>,
    model: &PropagationModel<T>,
    traffic: &TrafficModel<T>,
    sim: &SimConfig,
) -> Result<SimEstimate> {
    sim.validate(scenario)?;
    let (theta, noise) = scenario.sinr_parameters()?;
    let (theta, noise) = (theta.as_f64(), noise.as_f64());
    let setup = Setup::new(scenario, model, traffic)?;
    let start = interference_start_radius(scenario, model, sim.master_seed)?;
    let trial = |rng: &mut ChaCha8Rng, r_in: f64, r_out: f64| -> [f64; 2] {
        let tx = setup.traffic.transmits(rng);
        let rx_silent = setup.traffic.silent(rng);
        if !(tx && rx_silent) {
            return [0.0, 0.0];
        }
        let signal = setup.p0 * setup.gain.sample_f64(rng) / setup.probe_loss;
        let [inner, outer] = interference_pair(&setup, rng, r_in, r_out);
        let ok = |i: f64| {
            if signal >= theta * (i + noise) {
                1.0
            } else {
                0.0
            }
        };
        [ok(inner), ok(outer)]
    };
    let (rows, r_max, truncation) = with_radius(sim, start, trial, mean_gap);
    Ok(estimate_from_pairs(&rows, r_max, truncation))
}
