mod common;

use common::{example_b, example_model};
use lingam::datagen::generate;
use lingam::{
    bootstrap_prune, discover, regress_on_predecessors, CausalOrder, DataMatrix, IcaConfig, PruneConfig, Verdict,
};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn example_data(m: usize, seed: u64) -> DataMatrix {
    generate(&example_model(), m, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

#[test]
fn example_model_matches_its_matrix() {
    let model = example_model();
    assert_eq!(model.observed_b().matrix(), &example_b());
    assert_eq!(model.true_order().order, vec![3, 0, 1, 2]);
}

#[test]
fn discover_recovers_the_example() {
    let data = example_data(10_000, 11);
    let result = discover(&data, &IcaConfig::default().with_seed(5)).unwrap();
    let err = (result.b_hat.matrix() - example_b()).amax();
    assert!(err < 0.15, "max error {err}\n{}", result.b_hat.matrix());
    let order = &result.causal_order.order;
    assert_eq!(order[0], 3, "{order:?}");
    assert_eq!(order[3], 2, "{order:?}");
    assert!(!result.diagnostics.has_warnings(), "{:?}", result.diagnostics.warnings);
}

#[test]
fn discover_recovers_constants() {
    let data = example_data(20_000, 12);
    let result = discover(&data, &IcaConfig::default()).unwrap();
    let truth = example_model().observed_constants();
    for (c, t) in result.constants.iter().zip(&truth) {
        assert!((c - t).abs() < 0.1, "{:?} vs {truth:?}", result.constants);
    }
}

#[test]
fn discover_is_deterministic() {
    let data = example_data(3000, 13);
    let cfg = IcaConfig::default().with_seed(77);
    assert_eq!(discover(&data, &cfg).unwrap(), discover(&data, &cfg).unwrap());
}

/// Ordinary least squares with an intercept, solved through the SVD.
fn ols(data: &DataMatrix, target: usize, predictors: &[usize]) -> Vec<f64> {
    let x = data.values();
    let m = x.ncols();
    let design = DMatrix::from_fn(m, predictors.len() + 1, |t, k| {
        if k == 0 {
            1.0
        } else {
            x[(predictors[k - 1], t)]
        }
    });
    let y = x.row(target).transpose();
    let beta = design.svd(true, true).solve(&y, 1e-12).unwrap();
    beta.iter().skip(1).copied().collect()
}

#[test]
fn regression_matches_ols_and_truth() {
    let data = example_data(100_000, 14);
    let order = CausalOrder::from_order(vec![3, 0, 1, 2], &example_b()).unwrap();
    let b = regress_on_predecessors(&data, &order).unwrap();
    assert!((b.matrix() - example_b()).amax() < 0.05, "{}", b.matrix());
    for p in 1..4 {
        let target = order.order[p];
        let preds = &order.order[..p];
        for (k, coef) in ols(&data, target, preds).into_iter().enumerate() {
            assert!((b.get(target, preds[k]) - coef).abs() < 1e-8);
        }
    }
}

#[test]
fn independence_score_falls_with_sample_size() {
    let worst = |m: usize| {
        (0..4)
            .map(|s| {
                let r = discover(&example_data(m, 100 + s), &IcaConfig::default().with_seed(s)).unwrap();
                let n = r.diagnostics.independence_matrix.len();
                (0..n)
                    .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                    .map(|(i, j)| r.diagnostics.independence_matrix[i][j])
                    .fold(0.0, f64::max)
            })
            .sum::<f64>()
            / 4.0
    };
    let scores = [worst(500), worst(5000), worst(50_000)];
    assert!(scores[0] > scores[1] && scores[1] > scores[2], "{scores:?}");
}

#[test]
fn pruning_keeps_true_edges_of_the_example() {
    let data = example_data(10_000, 15);
    let result = discover(&data, &IcaConfig::default()).unwrap();
    let report = bootstrap_prune(&data, &result.causal_order, &PruneConfig::default()).unwrap();
    let b = example_b();
    for i in 0..4 {
        for j in 0..4 {
            let v = report.verdicts[(i, j)];
            if b[(i, j)] != 0.0 {
                assert_eq!(v, Verdict::Kept, "edge {j} -> {i}");
            } else {
                assert_ne!(v, Verdict::Kept, "zero {j} -> {i}: {}", report.edge_means[(i, j)]);
            }
        }
    }
    assert_eq!(report.kept_count(), 4);
}

#[test]
fn zero_threshold_prunes_nothing() {
    let data = example_data(2000, 16);
    let result = discover(&data, &IcaConfig::default()).unwrap();
    let cfg = PruneConfig {
        z_threshold: 0.0,
        resamples: 20,
        ..PruneConfig::default()
    };
    let report = bootstrap_prune(&data, &result.causal_order, &cfg).unwrap();
    assert!(report.verdicts.iter().all(|v| *v != Verdict::Pruned));
    assert_eq!(report.kept_count(), 6);
}

#[test]
fn shuffled_random_models_get_a_consistent_order() {
    use lingam::datagen::random_model;
    use lingam::GeneratorConfig;
    for seed in 0..5 {
        let model = random_model(&GeneratorConfig {
            n: 5,
            seed,
            ..GeneratorConfig::default()
        })
        .unwrap();
        let data = generate(&model, 10_000, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let result = discover(&data, &IcaConfig::default().with_seed(seed)).unwrap();
        assert!(model.order_is_consistent(&result.causal_order.order), "seed {seed}");
    }
}
