use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use throughput_core::model::{
    channel_moment, queue_event_probs, DutyMomentMode, PropagationModel, TrafficModel,
};

const DRAWS: usize = 1_000_000;

fn mean_and_stderr(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut n, mut mean, mut m2) = (0.0, 0.0, 0.0);
    for v in values {
        n += 1.0;
        let d = v - mean;
        mean += d / n;
        m2 += d * (v - mean);
    }
    (mean, (m2 / (n - 1.0)).sqrt() / n.sqrt())
}

#[test]
fn rayleigh_gain_has_unit_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let s = PropagationModel::<f64>::rayleigh().sampler().unwrap();
    let (mean, se) = mean_and_stderr((0..DRAWS).map(|_| s.sample(&mut rng)));
    assert!((mean - 1.0).abs() < 3.0 * se, "{mean} ± {se}");
}

#[test]
fn sampled_moments_match_channel_moment() {
    let b = 2.0_f64;
    let models: [PropagationModel<f64>; 3] = [
        PropagationModel::shadowing_db(10.0).unwrap(),
        PropagationModel::NakagamiFading { m: 2.5 },
        PropagationModel::ShadowingAndNakagami { sigma: 0.5, m: 3.0 },
    ];
    for (i, model) in models.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + i as u64);
        let s = model.sampler().unwrap();
        let (mean, se) = mean_and_stderr((0..DRAWS).map(|_| s.sample(&mut rng).powf(1.0 / b)));
        let want = channel_moment(model, b).unwrap();
        assert!(
            (mean - want).abs() < 3.0 * se,
            "{model:?}: {mean} ± {se} vs {want}"
        );
    }
}

#[test]
fn combined_moment_is_product() {
    for &b in &[1.5_f64, 2.0, 3.0] {
        for &sigma in &[0.0_f64, 0.4, 1.2] {
            for &m in &[0.5, 1.0, 2.7] {
                let both = channel_moment(&PropagationModel::ShadowingAndNakagami { sigma, m }, b)
                    .unwrap();
                let sh =
                    channel_moment(&PropagationModel::LogNormalShadowing { sigma }, b).unwrap();
                let nk = channel_moment(&PropagationModel::NakagamiFading { m }, b).unwrap();
                assert!((both - sh * nk).abs() <= 1e-14 * both);
            }
        }
    }
}

#[test]
fn sampled_duty_moments_match_exact() {
    let cases = [
        (TrafficModel::SlottedSync { q: 0.3 }, 2.0),
        (TrafficModel::SlottedAsync { q: 0.5 }, 2.0),
        (TrafficModel::SlottedAsync { q: 0.2 }, 1.5),
        (
            TrafficModel::ExponentialInterarrivals {
                lambda_p: 0.5,
                packet_len: 1.0,
            },
            2.0,
        ),
        (
            TrafficModel::ExponentialInterarrivals {
                lambda_p: 2.0,
                packet_len: 1.5,
            },
            3.0,
        ),
        (
            TrafficModel::ExponentialInterarrivals {
                lambda_p: 0.0128,
                packet_len: 1.0,
            },
            2.0,
        ),
    ];
    for (i, (traffic, b)) in cases.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(200 + i as u64);
        let s = traffic.duty_sampler().unwrap();
        let (mean, se) = mean_and_stderr((0..DRAWS).map(|_| s.sample(&mut rng).powf(1.0 / b)));
        let want = traffic
            .duty_cycle_moment(*b, DutyMomentMode::Exact)
            .unwrap();
        assert!(
            (mean - want).abs() < 3.0 * se,
            "{traffic:?} b={b}: {mean} ± {se} vs {want}"
        );
    }
}

#[test]
fn event_probabilities_form_a_distribution() {
    for i in 0..=200 {
        let a = 10f64.powf(-6.0 + 8.0 * i as f64 / 200.0);
        let ev = queue_event_probs(a).unwrap();
        assert!(ev.p00 >= 0.0 && ev.p01 >= 0.0 && ev.p11 >= 0.0);
        assert_eq!(ev.p01, ev.p10);
        assert!(
            (ev.p00 + 2.0 * ev.p01 + ev.p11 - 1.0).abs() < 1e-14,
            "a={a}"
        );
    }
}

proptest! {
    #[test]
    fn probabilities_in_unit_interval(q in 0.0..=1.0f64, lp in 0.0..100.0f64, len in 1e-3..10.0f64) {
        for t in [
            TrafficModel::SlottedSync { q },
            TrafficModel::SlottedAsync { q },
            TrafficModel::ExponentialInterarrivals { lambda_p: lp, packet_len: len },
        ] {
            let pt = t.transmit_prob().unwrap();
            let ps = t.silent_prob().unwrap();
            prop_assert!((0.0..=1.0).contains(&pt));
            prop_assert!((0.0..=1.0).contains(&ps));
        }
    }

    #[test]
    fn sync_moment_never_exceeds_async(q in 0.0..=1.0f64, b in 1.0001..20.0f64) {
        let s = TrafficModel::SlottedSync { q }.duty_cycle_moment(b, DutyMomentMode::Exact).unwrap();
        let a = TrafficModel::SlottedAsync { q }.duty_cycle_moment(b, DutyMomentMode::Exact).unwrap();
        prop_assert!(s <= a + 1e-15);
        if q > 1e-9 && q < 1.0 - 1e-9 {
            prop_assert!(s < a);
        }
    }

    #[test]
    fn exponential_moment_bounded(lp in 0.0..50.0f64, b in 1.01..10.0f64) {
        let t = TrafficModel::ExponentialInterarrivals { lambda_p: lp, packet_len: 1.0 };
        let m = t.duty_cycle_moment(b, DutyMomentMode::Exact).unwrap();
        // Δ ≤ 1 and Δ > 0 only when the node is not silent.
        prop_assert!(m >= 0.0);
        prop_assert!(m <= 1.0 - t.silent_prob().unwrap() + 1e-12);
    }
}
