use intent_ran::sim::traffic::{class_stream, generate_arrivals};
use intent_ran::sim::{TrafficClass, TrafficKind};
use proptest::prelude::*;

/// Mean gap over the first `n` gaps drawn for `kind`.
fn mean_gap(kind: TrafficKind, n: usize, seed: u64) -> f64 {
    let class = TrafficClass::default_for(kind);
    let mut rng = class_stream(seed, kind);
    let sampler = class.gap_sampler().unwrap();
    (0..n).map(|_| sampler.sample(&mut rng)).sum::<f64>() / n as f64
}

#[test]
fn voice_over_two_thousand_seconds() {
    let class = TrafficClass::default_for(TrafficKind::Voice);
    let ts = generate_arrivals(&class, 2000.0, &mut class_stream(1, TrafficKind::Voice)).unwrap();
    assert!(ts.len() >= 100_000 - 1000, "{} arrivals", ts.len());
    let mean = (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64;
    assert!((mean / 0.020 - 1.0).abs() < 0.05, "mean {mean}");
}

#[test]
fn light_tailed_classes_within_five_percent() {
    for (kind, mean) in [(TrafficKind::Gaming, 0.040), (TrafficKind::Voice, 0.020), (TrafficKind::Urllc, 0.0005)] {
        let (tol, n) = TrafficClass::default_for(kind).distribution.mean_tolerance();
        assert_eq!((tol, n), (0.05, 100_000));
        let m = mean_gap(kind, n, 9);
        assert!((m / mean - 1.0).abs() < tol, "{kind}: {m}");
    }
}

#[test]
fn pareto_video_within_ten_percent() {
    // closed-form Pareto mean: scale * shape / (shape - 1), shape 1.5
    let shape: f64 = 1.5;
    let scale = 0.0125 * (shape - 1.0) / shape;
    let closed = scale * shape / (shape - 1.0);
    assert!((closed - 0.0125).abs() < 1e-15);
    let (tol, n) = TrafficClass::default_for(TrafficKind::Video).distribution.mean_tolerance();
    let m = mean_gap(TrafficKind::Video, n, 3);
    assert!((m / closed - 1.0).abs() < tol, "video mean {m}");
}

#[test]
fn zero_horizon_rejected_for_every_class() {
    for kind in TrafficKind::ALL {
        let class = TrafficClass::default_for(kind);
        assert!(generate_arrivals(&class, 0.0, &mut class_stream(1, kind)).is_err());
    }
}

proptest! {
    #[test]
    fn arrivals_strictly_increase(seed in any::<u64>(), k in 0usize..4, horizon in 0.01f64..2.0) {
        let kind = TrafficKind::ALL[k];
        let class = TrafficClass::default_for(kind);
        let ts = generate_arrivals(&class, horizon, &mut class_stream(seed, kind)).unwrap();
        prop_assert!(ts.first().is_none_or(|&t| t > 0.0));
        prop_assert!(ts.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(ts.last().is_none_or(|&t| t <= horizon));
    }

    #[test]
    fn gaps_are_positive(seed in any::<u64>(), k in 0usize..4) {
        let kind = TrafficKind::ALL[k];
        let sampler = TrafficClass::default_for(kind).gap_sampler().unwrap();
        let mut rng = class_stream(seed, kind);
        for _ in 0..200 {
            prop_assert!(sampler.sample(&mut rng) > 0.0);
        }
    }
}
