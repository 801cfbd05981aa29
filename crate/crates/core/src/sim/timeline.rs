use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp1};

use crate::error::Result;
use crate::model::TrafficModel;
use crate::scalar::Real;

/// Activity of one node over the probe packet interval [0, 1), in units of
/// the packet length, simulated from the traffic mechanism itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Timeline {
    /// Slots aligned with the probe packet.
    Sync { q: f64 },
    /// Slots offset by a uniform fraction of a packet; two slots overlap.
    Async { q: f64 },
    /// Loss queue in steady state at time 0, Poisson arrivals of rate `a`.
    Queue { a: f64 },
}

impl Timeline {
    pub(crate) fn new<T: Real>(traffic: &TrafficModel<T>) -> Result<Self> {
        traffic.validate()?;
        Ok(match *traffic {
            TrafficModel::SlottedSync { q } => Timeline::Sync { q: q.as_f64() },
            TrafficModel::SlottedAsync { q } => Timeline::Async { q: q.as_f64() },
            TrafficModel::ExponentialInterarrivals { .. } => Timeline::Queue {
                a: traffic.load().map_or(0.0, |a| a.as_f64()),
            },
        })
    }

    /// Whether the probe transmitter has a packet to send.
    pub(crate) fn transmits(&self, rng: &mut dyn RngCore) -> bool {
        match *self {
            Timeline::Sync { q } | Timeline::Async { q } => rng.random::<f64>() < q,
            Timeline::Queue { a } => rng.random::<f64>() * (1.0 + a) < a,
        }
    }

    /// Fraction of the probe packet during which the node transmits.
    pub(crate) fn overlap(&self, rng: &mut dyn RngCore) -> f64 {
        match *self {
            Timeline::Sync { q } => {
                if rng.random::<f64>() < q {
                    1.0
                } else {
                    0.0
                }
            }
            Timeline::Async { q } => {
                let offset: f64 = rng.random();
                let first = rng.random::<f64>() < q;
                let second = rng.random::<f64>() < q;
                let mut d = 0.0;
                if first {
                    d += 1.0 - offset;
                }
                if second {
                    d += offset;
                }
                d
            }
            Timeline::Queue { a } => {
                if a == 0.0 {
                    return 0.0;
                }
                let busy = rng.random::<f64>() * (1.0 + a) < a;
                // Idle time before the next arrival, once the server frees up.
                let wait = |rng: &mut dyn RngCore| -> f64 {
                    let e: f64 = Exp1.sample(rng);
                    e / a
                };
                if busy {
                    // The packet in service started uniformly within the last packet length.
                    let remaining: f64 = rng.random();
                    let next = remaining + wait(rng);
                    remaining + if next < 1.0 { 1.0 - next } else { 0.0 }
                } else {
                    let next = wait(rng);
                    if next < 1.0 {
                        1.0 - next
                    } else {
                        0.0
                    }
                }
            }
        }
    }

    /// Whether the node stays silent for the whole probe packet.
    pub(crate) fn silent(&self, rng: &mut dyn RngCore) -> bool {
        self.overlap(rng) == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn freq(t: Timeline, n: usize, f: impl Fn(&Timeline, &mut ChaCha8Rng) -> bool) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        (0..n).filter(|_| f(&t, &mut rng)).count() as f64 / n as f64
    }

    #[test]
    fn silence_matches_event_probabilities() {
        let n = 400_000;
        let tol = 4.0 * (0.25 / n as f64).sqrt();
        let s = freq(Timeline::Async { q: 0.3 }, n, |t, r| t.silent(r));
        assert!((s - 0.49).abs() < tol);
        let a = 0.7_f64;
        let s = freq(Timeline::Queue { a }, n, |t, r| t.silent(r));
        assert!((s - (-a).exp() / (1.0 + a)).abs() < tol);
        let p = freq(Timeline::Queue { a }, n, |t, r| t.transmits(r));
        assert!((p - a / (1.0 + a)).abs() < tol);
    }

    #[test]
    fn queue_overlap_moment() {
        // E{Δ^{1/2}} against the analytic exact moment.
        let traffic = TrafficModel::ExponentialInterarrivals {
            lambda_p: 0.8,
            packet_len: 1.0,
        };
        let want = traffic
            .duty_cycle_moment(2.0, crate::model::DutyMomentMode::Exact)
            .unwrap();
        let t = Timeline::new(&traffic).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 400_000;
        let mean = (0..n).map(|_| t.overlap(&mut rng).sqrt()).sum::<f64>() / n as f64;
        assert!((mean - want).abs() < 3e-3, "{mean} vs {want}");
    }
}
