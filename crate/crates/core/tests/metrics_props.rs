mod common;

use std::f64::consts::PI;

use common::*;
use primed_pca::data::counterexample_dataset;
use primed_pca::metrics::{
    angle_between, angular_error, captured_variance, default_thresholds, steps_to_streak,
    streak_from_angles, threshold_label, MetricRecord, MetricSeries, SeriesMeta, Variant,
};
use primed_pca::truth::GroundTruth;
use proptest::prelude::*;

fn series(streaks: &[usize]) -> MetricSeries {
    let mut s = MetricSeries::new(SeriesMeta {
        config_hash: "h".into(),
        seed: 0,
        algorithm: "oja".into(),
    });
    for (i, st) in streaks.iter().enumerate() {
        s.push(MetricRecord {
            step: 10 * (i + 1),
            wall_ms: i as f64,
            angles: vec![],
            streaks: vec![(PI / 8.0, *st)],
            captured_variance: vec![],
            variant: Variant::Priming,
            l: 0,
        })
        .unwrap();
    }
    s
}

#[test]
fn thresholds_and_labels() {
    let t = default_thresholds();
    assert_eq!(t.len(), 8);
    assert_eq!(t[0], PI / 8.0);
    assert_eq!(t[7], PI / 1024.0);
    assert_eq!(threshold_label(PI / 32.0), "piDiv32");
}

#[test]
fn angle_examples() {
    let e = [0.6, 0.8];
    assert_eq!(angular_error(&e, &e).unwrap(), 0.0);
    assert_eq!(angular_error(&[-0.6, -0.8], &e).unwrap(), 0.0);
    assert!((angular_error(&[0.8, -0.6], &e).unwrap() - PI / 2.0).abs() < 1e-15);
    assert!(angular_error(&[1.0, 1.0], &e).is_err());
}

#[test]
fn captured_variance_examples() {
    let ds = counterexample_dataset();
    assert_eq!(captured_variance(&[1.0, 0.0, 0.0], &ds).unwrap(), 18.0);
    assert_eq!(captured_variance(&[-1.0, 0.0, 0.0], &ds).unwrap(), 18.0);
    let mut r = rng(3);
    let ds = gaussian_dataset(30, 5, &mut r);
    let truth = GroundTruth::compute(&ds).unwrap();
    for (i, v) in truth.vectors.iter().enumerate() {
        let got = captured_variance(v, &ds).unwrap();
        assert!((got - truth.values[i]).abs() <= 1e-9 * truth.values[0]);
    }
}

#[test]
fn steps_to_streak_examples() {
    let s = series(&[3, 10, 16, 12]);
    assert_eq!(steps_to_streak(&s, 16, PI / 8.0), Some((30, 2.0)));
    assert_eq!(steps_to_streak(&s, 17, PI / 8.0), None);
    assert_eq!(steps_to_streak(&s, 0, PI / 8.0), Some((10, 0.0)));
}

#[test]
fn series_steps_strictly_increase() {
    let mut s = series(&[1]);
    let again = s.records()[0].clone();
    assert!(s.push(again).is_err());
}

#[test]
fn tiny_angles_are_resolved() {
    let t: f64 = 3e-10;
    let v = [t.cos(), t.sin()];
    let got = angle_between(&v, &[1.0, 0.0]);
    assert!((got - t).abs() < 1e-20);
}

fn unit_vec(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, d)
        .prop_filter("nonzero", |v| norm(v) > 1e-3)
        .prop_map(|v| unit(&v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn streak_monotone_in_threshold(angles in prop::collection::vec(0.0f64..PI / 2.0, 0..16), a in 1e-4f64..1.5, b in 1e-4f64..1.5) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(streak_from_angles(&angles, lo) <= streak_from_angles(&angles, hi));
        prop_assert!(streak_from_angles(&angles, hi) <= angles.len());
    }

    #[test]
    fn angle_symmetric_and_bounded(v in unit_vec(6), e in unit_vec(6)) {
        let a = angular_error(&v, &e).unwrap();
        prop_assert_eq!(a, angular_error(&e, &v).unwrap());
        prop_assert!((0.0..=PI / 2.0).contains(&a));
        prop_assert!((a - oracle_angle(&v, &e)).abs() < 1e-12);
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        prop_assert!((a - angular_error(&neg, &e).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn rayleigh_bound(seed in 0u64..300, v in unit_vec(6)) {
        let mut r = rng(seed);
        let ds = gaussian_dataset(25, 6, &mut r);
        let truth = GroundTruth::compute(&ds).unwrap();
        prop_assert!(captured_variance(&v, &ds).unwrap() <= truth.values[0] * (1.0 + 1e-12));
    }
}
