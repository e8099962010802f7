use proptest::prelude::*;

use uforest::forest::{finite_sample_correct, TreePosterior};
use uforest::sim::sample;
use uforest::{
    EvalMode, EvalSource, ForestConfig, LabeledDataset, SettingKind, SimSetting, UncertaintyForest,
};

fn spherical(mu: f64, d: usize, n: usize, seed: u64) -> LabeledDataset {
    sample(
        &SimSetting::new(SettingKind::Spherical, mu, 0.5, d).unwrap(),
        n,
        seed,
    )
    .unwrap()
}

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
}

#[test]
fn per_tree_split_sizes() {
    let data = spherical(1.0, 1, 100, 0);
    let config = ForestConfig {
        n_trees: 1,
        ..ForestConfig::default()
    };
    let sizes = config.split_sizes(100).unwrap();
    assert_eq!((sizes.partition, sizes.vote, sizes.eval), (40, 30, 30));
    let forest = UncertaintyForest::fit(&data, &config, 3).unwrap();
    let tree = &forest.trees()[0];
    assert_eq!(tree.eval_rows().len(), 30);
    assert_eq!(tree.posterior.leaf_sizes().iter().sum::<usize>(), 30);
}

#[test]
fn forests_do_not_depend_on_thread_count() {
    let data = spherical(1.0, 3, 400, 2);
    for mode in [EvalMode::TreeLevel, EvalMode::ForestLevel] {
        let config = ForestConfig {
            n_trees: 8,
            eval_mode: mode,
            ..ForestConfig::default()
        };
        let one = pool(1).install(|| UncertaintyForest::fit(&data, &config, 11).unwrap());
        let eight = pool(8).install(|| UncertaintyForest::fit(&data, &config, 11).unwrap());
        assert_eq!(one, eight);
        let a = pool(1).install(|| {
            one.estimate_conditional_entropy(EvalSource::HeldOut(&data))
                .unwrap()
        });
        let b = pool(8).install(|| {
            eight
                .estimate_conditional_entropy(EvalSource::HeldOut(&data))
                .unwrap()
        });
        assert_eq!(a.h_y_given_x.to_bits(), b.h_y_given_x.to_bits());
    }
}

#[test]
fn single_leaf_vote_frequencies() {
    // Constant feature: every tree is a single leaf holding the voting labels.
    let data = LabeledDataset::new(
        vec![0.0; 10],
        vec!["x".into()],
        vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1],
        vec!["a".into(), "b".into()],
    )
    .unwrap();
    let config = ForestConfig {
        n_trees: 1,
        correction: false,
        frac_partition: 0.2,
        frac_vote: 0.4,
        frac_eval: 0.4,
        ..ForestConfig::default()
    };
    let forest = UncertaintyForest::fit(&data, &config, 0).unwrap();
    assert_eq!(forest.trees()[0].partition.n_leaves(), 1);
    let p = forest.posterior(&[0.0]).unwrap();
    let votes = forest.trees()[0].posterior.leaf_sizes()[0] as f64;
    assert_eq!(votes, 4.0);
    assert!((p[0] + p[1] - 1.0).abs() < 1e-15);
    assert_eq!(p[0] * votes, (p[0] * votes).round());
}

#[test]
fn posterior_tracks_the_logistic_curve() {
    let config = ForestConfig {
        n_trees: 100,
        ..ForestConfig::default()
    };
    let (mut at0, mut at3) = (0.0, 0.0);
    for t in 0..10 {
        let forest = UncertaintyForest::fit(&spherical(1.0, 1, 6000, 100 + t), &config, t).unwrap();
        at0 += forest.posterior(&[0.0]).unwrap()[1] / 10.0;
        let p3 = forest.posterior(&[3.0]).unwrap()[1];
        assert!(p3 >= 0.95, "p(1 | 3) = {p3}");
        at3 += p3 / 10.0;
    }
    let logistic = 1.0 / (1.0 + (-6.0f64).exp());
    assert!((at0 - 0.5).abs() <= 0.05, "{at0}");
    assert!((at3 - logistic).abs() <= 0.05, "{at3}");
}

#[test]
fn dishonest_posteriors_vary_more_near_the_boundary() {
    let honest = ForestConfig {
        n_trees: 100,
        ..ForestConfig::default()
    };
    let cart = ForestConfig {
        honest: false,
        correction: false,
        ..honest.clone()
    };
    let grid: Vec<f64> = (0..=8).map(|i| -1.0 + 0.25 * i as f64).collect();
    let trials = 20;
    let curves = |config: &ForestConfig| -> Vec<Vec<f64>> {
        (0..trials)
            .map(|t| {
                let f =
                    UncertaintyForest::fit(&spherical(1.0, 1, 6000, 500 + t), config, t).unwrap();
                grid.iter()
                    .map(|&x| f.posterior(&[x]).unwrap()[1])
                    .collect()
            })
            .collect()
    };
    let variance = |c: &[Vec<f64>], g: usize| {
        let m = c.iter().map(|r| r[g]).sum::<f64>() / c.len() as f64;
        c.iter().map(|r| (r[g] - m).powi(2)).sum::<f64>() / (c.len() - 1) as f64
    };
    let (h, d) = (curves(&honest), curves(&cart));
    for g in 0..grid.len() {
        assert!(variance(&d, g) > variance(&h, g), "x = {}", grid[g]);
    }
}

#[test]
fn external_rows_may_be_unlabeled() {
    let data = spherical(1.0, 2, 500, 7);
    let forest = UncertaintyForest::fit(
        &data,
        &ForestConfig {
            n_trees: 10,
            ..ForestConfig::default()
        },
        1,
    )
    .unwrap();
    let rows = LabeledDataset::unlabeled(
        data.features()[..40].to_vec(),
        vec!["x1".into(), "x2".into()],
    )
    .unwrap();
    let r = forest
        .estimate_conditional_entropy(EvalSource::Rows(&rows))
        .unwrap();
    assert!(r.h_y_given_x > 0.0 && r.h_y_given_x <= 2f64.ln());
    let narrow = LabeledDataset::unlabeled(vec![0.0; 5], vec!["x1".into()]).unwrap();
    assert!(forest
        .estimate_conditional_entropy(EvalSource::Rows(&narrow))
        .is_err());
}

#[test]
fn saved_forests_reload_identically() {
    let data = spherical(1.0, 2, 300, 4);
    let forest = UncertaintyForest::fit(
        &data,
        &ForestConfig {
            n_trees: 5,
            ..ForestConfig::default()
        },
        2,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("forest.json");
    forest.save(&path).unwrap();
    assert_eq!(UncertaintyForest::load(&path).unwrap(), forest);
    std::fs::write(&path, "{}").unwrap();
    assert!(UncertaintyForest::load(&path).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn correction_respects_the_bound(
        k in 2usize..=10,
        n in 1usize..=100,
        kappa in 0.1f64..10.0,
        seed in any::<u64>(),
    ) {
        // Random counts summing to n, with a random subset of classes zeroed.
        let mut counts = vec![0usize; k];
        let mut s = seed;
        for _ in 0..n {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let c = ((s >> 33) as usize) % k;
            counts[c.min((s >> 20) as usize % k)] += 1;
        }
        let raw = TreePosterior::from_counts(&counts, k).unwrap();
        let corrected = finite_sample_correct(&raw, kappa).unwrap();
        let bound = k as f64 / (kappa * n as f64);
        let change = raw.row(0).iter().zip(corrected.row(0)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(change <= bound + 1e-15);
        prop_assert!((corrected.row(0).iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn large_kappa_n_makes_the_correction_vanish() {
    let raw = TreePosterior::from_counts(&[100, 0, 0], 3).unwrap();
    let c = finite_sample_correct(&raw, 1e7).unwrap();
    let change = raw
        .row(0)
        .iter()
        .zip(c.row(0))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(change < 1e-6);
}
