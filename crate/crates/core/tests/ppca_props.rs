mod common;

use common::*;
use primed_pca::data::{counterexample_dataset, generate_synthetic, Decay, SpectrumSpec};
use primed_pca::metrics::{captured_variance, default_thresholds, eigenvector_streak};
use primed_pca::ppca::{check_prop3, ppca, projected_covariance, ComponentSet};
use primed_pca::priming::{Algorithm, PrimingConfig, PrimingState};
use primed_pca::truth::GroundTruth;
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn exponential(seed: u64) -> primed_pca::data::Dataset {
    generate_synthetic(&SpectrumSpec {
        dim: 20,
        n_points: 2000,
        decay: Decay::Exponential,
        top: 1000.0,
        bottom: 1.0,
        seed,
    })
    .unwrap()
}

#[test]
fn counterexample_projected_covariance_by_hand() {
    let eps: f64 = 0.3;
    let ds = counterexample_dataset();
    let primed = ComponentSet::new(
        3,
        vec![
            vec![eps, 0.0, (1.0 - eps * eps).sqrt()],
            vec![0.0, 1.0, 0.0],
        ],
    )
    .unwrap();
    let c = projected_covariance(&ds, &primed).unwrap().matrix;
    // Coordinates of the six points: ±3 eps, ±2, ±sqrt(1 - eps^2).
    let first = 2.0 * 9.0 * eps * eps + 2.0 * (1.0 - eps * eps);
    assert!((c.get(0, 0) - first).abs() < 1e-12);
    assert!((c.get(1, 1) - 8.0).abs() < 1e-12);
    assert!(c.get(0, 1).abs() < 1e-12);
}

#[test]
fn rotated_top_k_span_is_recovered() {
    let ds = exponential(4);
    let truth = GroundTruth::compute(&ds).unwrap();
    let k = 5;
    let top = truth.top(k).unwrap();
    let mut r = rng(1);
    let primed = ComponentSet::new(20, rotate_within(top.vectors(), &mut r)).unwrap();
    let out = ppca(&ds, &primed, k).unwrap();
    for (i, (v, e)) in out
        .components
        .vectors()
        .iter()
        .zip(top.vectors())
        .enumerate()
    {
        assert!(oracle_angle(v, e) < 1e-6, "component {i}");
    }
    let estimates = out.components.eigenvalue_estimates().unwrap();
    for (a, b) in estimates.iter().zip(&truth.values) {
        assert!((a - b).abs() <= 1e-9 * b);
    }
    assert!(check_prop3(&ds, &primed, &top, k)
        .unwrap()
        .iter()
        .all(|f| *f));
}

#[test]
fn oja_full_batch_reaches_the_guaranteed_regime() {
    let ds = exponential(6);
    let truth = GroundTruth::compute(&ds).unwrap().top(3).unwrap();
    let config = PrimingConfig {
        num_components: 3,
        learning_rate: 1e-4,
        momentum: 0.9,
        batch_size: ds.rows(),
        power_epsilon: 1e-6,
        max_steps: 100_000,
        init_seed: 2,
    };
    let mut s = PrimingState::init(Algorithm::Oja, config, 20).unwrap();
    let mut steps = 0;
    loop {
        s.oja_step(ds.matrix()).unwrap();
        steps += 1;
        let primed = s.current_components().unwrap();
        if check_prop3(&ds, &primed, &truth, 3)
            .unwrap()
            .iter()
            .all(|f| *f)
        {
            break;
        }
        assert!(steps < 20_000, "conditions never held");
    }
}

#[test]
fn full_basis_reproduces_exact_pca() {
    let mut r = rng(12);
    for _ in 0..5 {
        let d = 9;
        let ds = gaussian_dataset(60, d, &mut r);
        let truth = GroundTruth::compute(&ds).unwrap().top(d).unwrap();
        let primed = ComponentSet::new(d, random_orthogonal(d, &mut r)).unwrap();
        let out = ppca(&ds, &primed, d).unwrap();
        for (v, e) in out.components.vectors().iter().zip(truth.vectors()) {
            assert!(oracle_angle(v, e) < 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn invariant_under_permutation_and_sign(seed in 0u64..500, m in 3usize..7) {
        let mut r = rng(seed);
        let d = 10;
        let ds = gaussian_dataset(50, d, &mut r);
        let truth = GroundTruth::compute(&ds).unwrap().top(3).unwrap();
        let primed: Vec<Vec<f64>> = (0..m).map(|_| unit(&gaussian_vec(d, &mut r))).collect();
        let mut shuffled = primed.clone();
        shuffled.shuffle(&mut r);
        for v in shuffled.iter_mut().step_by(2) {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        let a = ppca(&ds, &ComponentSet::new(d, primed).unwrap(), 3).unwrap();
        let b = ppca(&ds, &ComponentSet::new(d, shuffled).unwrap(), 3).unwrap();
        for ((u, v), e) in a.components.vectors().iter().zip(b.components.vectors()).zip(truth.vectors()) {
            prop_assert!((oracle_angle(u, e) - oracle_angle(v, e)).abs() < 1e-9);
        }
    }

    #[test]
    fn first_component_captures_the_most_variance(seed in 0u64..500, m in 1usize..6) {
        let mut r = rng(seed);
        let d = 8;
        let ds = gaussian_dataset(40, d, &mut r);
        let truth = GroundTruth::compute(&ds).unwrap();
        let primed: Vec<Vec<f64>> = (0..m).map(|_| unit(&gaussian_vec(d, &mut r))).collect();
        let out = ppca(&ds, &ComponentSet::new(d, primed.clone()).unwrap(), 1).unwrap();
        let best = captured_variance(&out.components.vectors()[0], &ds).unwrap();
        for v in &primed {
            prop_assert!(best >= captured_variance(v, &ds).unwrap() * (1.0 - 1e-12));
        }
        prop_assert!(best <= truth.values[0] * (1.0 + 1e-12));
    }

    #[test]
    fn streak_never_drops_when_conditions_hold(seed in 0u64..500, k in 1usize..5, l in 0usize..3) {
        let mut r = rng(seed);
        let d = 12;
        let ds = gaussian_dataset(80, d, &mut r);
        let truth_all = GroundTruth::compute(&ds).unwrap().top(d).unwrap();
        let truth = truth_all.truncated(k);
        // True top-k directions plus extra ones, then mixed inside the span.
        let mut span: Vec<Vec<f64>> = truth.vectors().to_vec();
        span.extend((0..l).map(|_| unit(&gaussian_vec(d, &mut r))));
        let mixed: Vec<Vec<f64>> = rotate_within(&span, &mut r).iter().map(|v| unit(v)).collect();
        let primed = ComponentSet::new(d, mixed).unwrap();
        let flags = check_prop3(&ds, &primed, &truth, k).unwrap();
        prop_assert!(flags.iter().all(|f| *f));
        let refined = ppca(&ds, &primed, k).unwrap().components;
        for v in default_thresholds() {
            prop_assert!(eigenvector_streak(&refined, &truth, v) >= eigenvector_streak(&primed.truncated(k), &truth, v));
        }
    }
}
