use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use throughput_core::connectivity::connectivity_throughput;
use throughput_core::model::{PropagationModel, Scenario, TrafficModel};
use throughput_core::sim::{
    generate_field, simulate_audible_count, simulate_connectivity_throughput,
    simulate_interference, simulate_sinr_throughput, RMax, SimConfig, Truncation,
};
use throughput_core::sinr::{sinr_throughput, SinrStrategy};
use throughput_core::stable::{interference_params, TotallySkewedStable};

fn fig6() -> Scenario<f64> {
    Scenario::new(1.0, 2.0, 10.0, 10.0, 1.0).with_audibility(1.0)
}

fn fig8() -> Scenario<f64> {
    Scenario::new(1.0, 2.0, 10.0, 10.0, 1.0).with_sinr(1.0, 1.0)
}

fn sync(q: f64) -> TrafficModel<f64> {
    TrafficModel::SlottedSync { q }
}

#[test]
fn field_counts_and_nearest_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 10_000;
    let fields: Vec<Vec<f64>> = (0..n)
        .map(|_| generate_field(1.0, 10.0, &mut rng))
        .collect();
    let counts: Vec<f64> = fields.iter().map(|f| f.len() as f64).collect();
    let mean = counts.iter().sum::<f64>() / n as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let want = 100.0 * std::f64::consts::PI;
    assert!(
        (mean - want).abs() < 3.0 * (var / n as f64).sqrt(),
        "{mean}"
    );

    let mut nearest: Vec<f64> = fields.iter().map(|f| f[0]).collect();
    nearest.sort_by(|a, b| a.total_cmp(b));
    let ks = nearest
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let f = 1.0 - (-std::f64::consts::PI * r * r).exp();
            (f - i as f64 / n as f64)
                .abs()
                .max((f - (i + 1) as f64 / n as f64).abs())
        })
        .fold(0.0, f64::max);
    assert!(ks < 0.02, "KS {ks}");
}

#[test]
fn audible_count_is_poisson() {
    let est = simulate_audible_count(
        &fig6(),
        &PropagationModel::PathLossOnly,
        &SimConfig::new(20_000, 1),
    )
    .unwrap();
    assert!(
        (est.mean - 9.934_588_265_796_101).abs() < 3.0 * est.stderr,
        "{est:?}"
    );
    let d = est.extras["dispersion_index"];
    assert!(
        (d - 1.0).abs() < 3.0 * est.extras["dispersion_stderr"],
        "{d}"
    );
    assert_eq!(est.histogram.iter().sum::<u64>(), 20_000);
}

#[test]
fn deaf_receiver_hears_nobody() {
    let s = Scenario::new(1.0, 2.0, 10.0, 10.0, 1.0).with_audibility(1e300);
    let est = simulate_audible_count(&s, &PropagationModel::rayleigh(), &SimConfig::new(1_000, 1))
        .unwrap();
    assert_eq!(est.mean, 0.0);
    assert_eq!(est.histogram, vec![1_000]);
}

#[test]
fn connectivity_matches_analysis() {
    let model = PropagationModel::rayleigh();
    let want = connectivity_throughput(&fig6(), &model, &sync(0.5))
        .unwrap()
        .throughput;
    let est =
        simulate_connectivity_throughput(&fig6(), &model, &sync(0.5), &SimConfig::new(200_000, 2))
            .unwrap();
    assert!(
        (est.mean - want).abs() < 3.0 * est.stderr,
        "{est:?} vs {want}"
    );
    assert!(matches!(est.truncation, Truncation::Converged { .. }));

    let silent =
        simulate_connectivity_throughput(&fig6(), &model, &sync(0.0), &SimConfig::new(1_000, 2))
            .unwrap();
    assert_eq!(silent.mean, 0.0);
}

#[test]
fn empty_network_has_no_collisions() {
    let s = Scenario {
        lambda: 0.0,
        ..fig6()
    };
    let model = PropagationModel::shadowing_db(6.0).unwrap();
    let traffic = TrafficModel::ExponentialInterarrivals {
        lambda_p: 0.5,
        packet_len: 2.0,
    };
    let b = connectivity_throughput(&s, &model, &traffic).unwrap();
    assert_eq!(b.no_collision, 1.0);
    let est = simulate_connectivity_throughput(&s, &model, &traffic, &SimConfig::new(100_000, 3))
        .unwrap();
    assert!(
        (est.mean - b.throughput).abs() < 3.0 * est.stderr,
        "{est:?} vs {b:?}"
    );
}

#[test]
fn interference_quantiles_follow_the_stable_law() {
    let model = PropagationModel::PathLossOnly;
    let est =
        simulate_interference(&fig8(), &model, &sync(0.5), &SimConfig::new(50_000, 4)).unwrap();
    assert!(
        matches!(est.truncation, Truncation::Converged { .. }),
        "{est:?}"
    );
    let law = TotallySkewedStable::new(interference_params(&fig8(), &model, &sync(0.5)).unwrap())
        .unwrap();
    let median = est.quantiles.iter().find(|(q, _)| *q == 0.5).unwrap().1;
    let want = law.quantile(0.5).unwrap();
    assert!((median / want - 1.0).abs() < 0.02, "{median} vs {want}");
    for &(q, x) in &est.quantiles {
        let f = law.cdf(x);
        assert!(
            (f - q).abs() < 3.0 * (q * (1.0 - q) / 50_000.0).sqrt() + 1e-4,
            "level {q}: F = {f}"
        );
    }
}

#[test]
fn silent_network_has_no_interference() {
    let s = Scenario {
        lambda: 0.0,
        ..fig8()
    };
    let est = simulate_interference(
        &s,
        &PropagationModel::rayleigh(),
        &sync(0.5),
        &SimConfig::new(500, 4),
    )
    .unwrap();
    assert_eq!(est.mean, 0.0);
    assert!(est.quantiles.iter().all(|&(_, x)| x == 0.0));
}

#[test]
fn sinr_matches_analysis() {
    let model = PropagationModel::rayleigh();
    let want = sinr_throughput(&fig8(), &model, &sync(0.5), SinrStrategy::Auto)
        .unwrap()
        .throughput;
    let est =
        simulate_sinr_throughput(&fig8(), &model, &sync(0.5), &SimConfig::new(100_000, 5)).unwrap();
    assert!(
        (est.mean - want).abs() < 3.0 * est.stderr,
        "{est:?} vs {want}"
    );
}

#[test]
fn sinr_limits() {
    let cfg = SimConfig::new(2_000, 6).with_r_max(RMax::Fixed(10.0));
    let model = PropagationModel::rayleigh();
    let strict = Scenario {
        theta_star: Some(1e300),
        ..fig8()
    };
    assert_eq!(
        simulate_sinr_throughput(&strict, &model, &sync(0.5), &cfg)
            .unwrap()
            .mean,
        0.0
    );
    let noisy = Scenario {
        noise: Some(1e300),
        ..fig8()
    };
    assert_eq!(
        simulate_sinr_throughput(&noisy, &model, &sync(0.5), &cfg)
            .unwrap()
            .mean,
        0.0
    );
    let bad = Scenario { b: 1.0, ..fig8() };
    assert!(simulate_sinr_throughput(&bad, &model, &sync(0.5), &cfg).is_err());
}

#[test]
fn runs_are_reproducible() {
    let model = PropagationModel::NakagamiFading { m: 2.0 };
    let traffic = TrafficModel::SlottedAsync { q: 0.3 };
    let cfg = SimConfig::new(20_000, 42);
    let a = simulate_connectivity_throughput(&fig6(), &model, &traffic, &cfg).unwrap();
    let b = simulate_connectivity_throughput(&fig6(), &model, &traffic, &cfg).unwrap();
    assert_eq!(a, b);
    let c = simulate_connectivity_throughput(
        &fig6(),
        &model,
        &traffic,
        &SimConfig {
            master_seed: 43,
            ..cfg
        },
    )
    .unwrap();
    assert_ne!(a.mean, c.mean);
}

#[test]
fn target_stderr_stops_early() {
    let cfg = SimConfig {
        target_stderr: Some(0.05),
        ..SimConfig::new(1_000_000, 7)
    }
    .with_r_max(RMax::Fixed(5.0));
    let est = simulate_audible_count(&fig6(), &PropagationModel::PathLossOnly, &cfg).unwrap();
    assert_eq!(est.trials, 10_000);
    assert!(est.stderr <= 0.05);
}
