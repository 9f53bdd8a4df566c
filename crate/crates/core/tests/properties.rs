use proptest::prelude::*;
use subsel_core::bandit::{run_bandit, ArmPosterior, BanditConfig, Policy};
use subsel_core::dataset::{split_target_source, Dataset, MetaColumn, RangeBound, SplitSpec};
use subsel_core::diagnostics::{composition_weights, occurrence_table, summary_stat, summary_stat_max};
use subsel_core::ensemble::{allocate_counts, run_ensemble, sample_dirichlet, EnsembleConfig, WeightVector};
use subsel_core::learner::{evaluate, fit, LearnerSpec};
use subsel_core::linalg::Matrix;
use subsel_core::partition::{kmeans_with, partition_by_metadata, partition_random, KMeansOptions, Partition};
use subsel_core::rng::SeedStream;
use subsel_core::simgen::{generate, SimConfig, Variant};

fn random_dataset(seed: u64, n: usize, p: usize) -> Dataset {
    let mut rng = SeedStream::new(seed);
    let x = Matrix::from_vec(n, p, (0..n * p).map(|_| rng.standard_normal()).collect()).unwrap();
    let y = (0..n).map(|_| rng.standard_normal()).collect();
    Dataset::new(x, y).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn allocation_sums_to_budget(seed in any::<u64>(), k in 1usize..12, n in 0usize..5000) {
        let mut rng = SeedStream::new(seed);
        let w = sample_dirichlet(k, &mut rng).unwrap();
        let counts = allocate_counts(&w, n);
        prop_assert_eq!(counts.iter().sum::<usize>(), n);
        for (c, wk) in counts.iter().zip(w.as_slice()) {
            prop_assert!((*c as f64 - n as f64 * wk).abs() < 1.0 + 1e-9);
        }
    }

    #[test]
    fn posterior_conserves_pulls(
        rewards in prop::collection::vec((0usize..5, any::<bool>()), 0..200),
        a0 in 0.01f64..10.0,
        b0 in 0.01f64..10.0,
    ) {
        let mut posterior = ArmPosterior::new(5, a0, b0).unwrap();
        let mut wins = [0.0; 5];
        let mut losses = [0.0; 5];
        for &(arm, r) in &rewards {
            posterior.record(arm, r);
            if r { wins[arm] += 1.0 } else { losses[arm] += 1.0 }
        }
        for arm in 0..5 {
            prop_assert_eq!(posterior.alpha[arm], a0 + wins[arm]);
            prop_assert_eq!(posterior.beta[arm], b0 + losses[arm]);
        }
        let total: f64 = (0..5).map(|a| posterior.pulls(a)).sum();
        prop_assert_eq!(total, rewards.len() as f64);
    }

    #[test]
    fn summary_stat_is_bounded_and_permutation_invariant(seed in any::<u64>(), k in 1usize..10) {
        let mut rng = SeedStream::new(seed);
        let w = sample_dirichlet(k, &mut rng).unwrap();
        let d = summary_stat(&w);
        prop_assert!(d >= 0.0 && d <= summary_stat_max(k) + 1e-12);
        let mut reversed = w.as_slice().to_vec();
        reversed.reverse();
        let r = summary_stat(&WeightVector::new(reversed).unwrap());
        prop_assert!((d - r).abs() < 1e-15);
    }

    #[test]
    fn composition_is_a_weight_vector(counts in prop::collection::vec(0usize..1000, 1..8)) {
        prop_assume!(counts.iter().sum::<usize>() > 0);
        let w = composition_weights(&counts).unwrap();
        prop_assert!((w.as_slice().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn random_partitions_are_surjective(seed in any::<u64>(), n in 1usize..200, k in 1usize..20) {
        prop_assume!(k <= n);
        let p = partition_random(n, k, seed).unwrap();
        let sizes = p.sizes();
        prop_assert_eq!(sizes.len(), k);
        prop_assert!(sizes.iter().all(|&s| s > 0));
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn range_split_is_a_disjoint_cover(cut in 0.0f64..11.0, n in 2usize..40) {
        let data = random_dataset(n as u64, n, 2)
            .with_meta(MetaColumn::numeric("z", (0..n).map(|i| (i % 11) as f64).collect()))
            .unwrap();
        let spec = SplitSpec::MetadataRange(vec![RangeBound { column: "z".into(), lower: Some(cut), upper: None }]);
        if let Ok(split) = split_target_source(&data, &spec) {
            let mut all: Vec<usize> = split.target_rows.iter().chain(&split.source_rows).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            prop_assert!(split.target.numeric_meta("z").unwrap().iter().all(|&z| z > cut));
            prop_assert!(split.source.numeric_meta("z").unwrap().iter().all(|&z| z <= cut));
        }
    }

    #[test]
    fn least_squares_ignores_row_order(seed in any::<u64>()) {
        let data = random_dataset(seed, 25, 3);
        let mut order: Vec<usize> = (0..25).collect();
        SeedStream::new(seed ^ 1).shuffle(&mut order);
        let shuffled = data.subset(&order);
        let spec = LearnerSpec::least_squares();
        let a = fit(&spec, data.features(), data.response()).unwrap();
        let b = fit(&spec, shuffled.features(), shuffled.response()).unwrap();
        for (x, y) in a.coefficients.iter().zip(&b.coefficients) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn kmeans_objective_never_increases(seed in any::<u64>(), k in 1usize..6) {
        let data = random_dataset(seed, 60, 3);
        let fit = kmeans_with(data.features(), k, seed, &KMeansOptions::default()).unwrap();
        for w in fit.inertia_trace.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        prop_assert!(fit.partition.sizes().iter().all(|&s| s > 0));
    }
}

#[test]
fn exhaustive_small_splits() {
    // every threshold on every small dataset
    for n in 2..8 {
        let data = random_dataset(1, n, 1)
            .with_meta(MetaColumn::numeric("z", (1..=n).map(|z| z as f64).collect()))
            .unwrap();
        for cut in 0..=n {
            let spec = SplitSpec::MetadataRange(vec![RangeBound {
                column: "z".into(),
                lower: Some(cut as f64),
                upper: None,
            }]);
            match split_target_source(&data, &spec) {
                Ok(s) => {
                    assert_eq!(s.target.n_rows() + s.source.n_rows(), n);
                    assert!(s.target_rows.iter().all(|r| !s.source_rows.contains(r)));
                }
                Err(_) => assert!(cut == 0 || cut == n),
            }
        }
    }
}

fn sim_protocol(seed: u64, variant: Variant) -> (Dataset, Dataset, Partition) {
    let data = generate(&SimConfig {
        seed,
        variant,
        ..SimConfig::default()
    })
    .unwrap();
    let spec = SplitSpec::MetadataRange(vec![RangeBound {
        column: "z".into(),
        lower: Some(9.0),
        upper: None,
    }]);
    let split = split_target_source(&data, &spec).unwrap();
    let partition = partition_by_metadata(&split.source, "z", &[3.0, 5.0]).unwrap();
    (split.target, split.source, partition)
}

#[test]
fn bandit_invariants_and_reproducibility() {
    let (target, source, partition) = sim_protocol(3, Variant::TimeVarying);
    for policy in [Policy::Thompson, Policy::Random] {
        let config = BanditConfig::new(30, 10, 11, policy);
        let t = run_bandit(&target, &source, &partition, &LearnerSpec::least_squares(), &config).unwrap();
        let again = run_bandit(&target, &source, &partition, &LearnerSpec::least_squares(), &config).unwrap();
        assert_eq!(t, again);
        assert_eq!(t.records.len(), 30);
        assert_eq!(t.training_rows.len(), 300);
        let mut previous = t.initial_metric.value;
        for r in &t.records {
            assert_eq!(r.counts.iter().sum::<usize>(), r.iteration * 10);
            assert_eq!(r.reward, r.metric.value < previous);
            previous = r.metric.value;
        }
        let pulls: f64 = (0..3).map(|a| t.posterior.pulls(a)).sum();
        assert_eq!(pulls, 30.0);
        let occurrences = occurrence_table(&t);
        assert_eq!(occurrences.iter().sum::<usize>(), 30);
        for arm in 0..3 {
            assert_eq!(occurrences[arm] * 10, t.final_counts()[arm]);
        }
        // training rows really come from the recorded arms
        for (h, r) in t.records.iter().enumerate() {
            for &row in &t.training_rows[h * 10..(h + 1) * 10] {
                assert_eq!(partition.labels()[row], r.arm);
            }
        }
    }
}

#[test]
fn ensemble_composition_matches_allocation() {
    let (target, source, partition) = sim_protocol(4, Variant::TimeVarying);
    let result = run_ensemble(
        &target,
        &source,
        &partition,
        &LearnerSpec::least_squares(),
        &EnsembleConfig::new(50, 300, 8),
    )
    .unwrap();
    for trial in &result.trials {
        assert_eq!(trial.counts, allocate_counts(&trial.weights, 300));
    }
    let best = result.best_loss().value;
    assert!(result.trials.iter().all(|t| best <= t.loss().unwrap().value));
    let k1 = Partition::new(vec![0; source.n_rows()], 1, partition.method()).unwrap();
    let single = run_ensemble(&target, &source, &k1, &LearnerSpec::least_squares(), &EnsembleConfig::new(5, 50, 1)).unwrap();
    assert!(single.trials.iter().all(|t| t.weights.as_slice() == [1.0]));
}

#[test]
fn invariant_simulation_without_noise_is_exactly_linear() {
    let config = SimConfig {
        variant: Variant::TimeInvariant,
        noise_sd: 0.0,
        coef_noise_sd: vec![0.0; 4],
        seed: 5,
        ..SimConfig::default()
    };
    let data = generate(&config).unwrap();
    let spec = LearnerSpec {
        intercept: false,
        ..LearnerSpec::least_squares()
    };
    let model = fit(&spec, data.features(), data.response()).unwrap();
    for (c, b) in model.coefficients.iter().zip(&config.beta) {
        assert!((c - b).abs() < 1e-8);
    }
    let partition = partition_by_metadata(&data, "z", &[3.0, 5.0]).unwrap();
    for k in 0..3 {
        let subset = data.subset(partition.members(k));
        assert!(evaluate(&model, &subset).unwrap().value < 1e-20);
    }
}

#[test]
fn time_varying_regimes_are_heterogeneous() {
    let mut early_worse = 0;
    for seed in 0..20 {
        let data = generate(&SimConfig {
            seed,
            ..SimConfig::default()
        })
        .unwrap();
        let partition = partition_by_metadata(&data, "z", &[3.0, 5.0]).unwrap();
        let early = data.subset(partition.members(0));
        let late = data.subset(partition.members(2));
        let spec = LearnerSpec::least_squares();
        let early_model = fit(&spec, early.features(), early.response()).unwrap();
        let late_model = fit(&spec, late.features(), late.response()).unwrap();
        if evaluate(&early_model, &late).unwrap().value > evaluate(&late_model, &late).unwrap().value {
            early_worse += 1;
        }
    }
    assert!(early_worse > 10, "{early_worse}/20");
}
