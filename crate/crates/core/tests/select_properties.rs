mod common;

use common::{normal, oracle, rng};
use ifecf::select::{self, Method, Reason, SelectionConfig, SelectionError};
use ifecf::Dataset;
use proptest::prelude::*;
use rand::Rng;

/// Columns: constant, class-independent noise, informative, exact copy of
/// the informative column.
fn four_feature_set() -> Dataset {
    let noise = [1.0, 4.0, 2.0, 5.0, 3.0, 6.0, 7.0, 2.0, 4.0, 6.0];
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for class in 0..2 {
        for (i, &n) in noise.iter().enumerate() {
            let informative = 5.0 + 2.0 * class as f64 + 0.1 * (i % 3) as f64;
            rows.push(vec![3.0, n, informative, informative]);
            labels.push(class);
        }
    }
    Dataset::from_rows(&rows, &labels).unwrap()
}

#[test]
fn four_feature_example_keeps_one_informative_feature() {
    let d = four_feature_set();
    let cfg = SelectionConfig { delta: 0.01, tau_c: 0.1, tau_f: 0.9, ..SelectionConfig::default() };
    let cols = d.columns();
    let y = d.labels_as_f64();

    // each pass checked against the references
    assert!(oracle::dispersion(&cols[0]) < 0.01);
    assert!(cols[1..].iter().all(|c| oracle::dispersion(c) >= 0.01));
    assert!(oracle::correlation(&cols[1], &y).unwrap().abs() < 0.1);
    assert!(oracle::correlation(&cols[2], &y).unwrap().abs() >= 0.1);
    assert!((oracle::correlation(&cols[2], &cols[3]).unwrap() - 1.0).abs() < 1e-12);

    let r = select::ife_cf(&d, &cfg).unwrap();
    assert_eq!(r.kept, vec![2]);
    let reason = |f: usize| r.eliminated.iter().find(|e| e.feature == f).map(|e| e.reason);
    assert_eq!(reason(0), Some(Reason::LowDispersion));
    assert_eq!(reason(1), Some(Reason::LowCCorrelation));
    assert_eq!(reason(3), Some(Reason::RedundantWith { feature: 2 }));
}

#[test]
fn disabled_thresholds_keep_everything() {
    let d = common::mixed_features(3, 50, 6);
    let cfg = SelectionConfig { delta: 0.0, tau_c: 0.0, tau_f: 1.0, ..SelectionConfig::default() };
    let r = select::ife_cf(&d, &cfg).unwrap();
    assert_eq!(r.kept, (0..6).collect::<Vec<_>>());
    assert!(r.eliminated.is_empty());
}

#[test]
fn everything_eliminated_is_an_error() {
    let d = common::mixed_features(3, 50, 4);
    let cfg = SelectionConfig { delta: 1e6, ..SelectionConfig::default() };
    assert!(matches!(select::ife_cf(&d, &cfg), Err(SelectionError::AllEliminated)));
}

#[test]
fn ife_cf_is_deterministic() {
    let d = common::lung_like(9);
    let cfg = SelectionConfig::default();
    let a = select::ife_cf(&d, &cfg).unwrap();
    let b = select::ife_cf(&d, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_json(), b.to_json());
}

#[test]
fn strong_feature_beats_redundant_weak_pairs() {
    let mut r = rng(17);
    let m = 200;
    let labels: Vec<usize> = (0..m).map(|i| i % 2).collect();
    let rows: Vec<Vec<f64>> = labels
        .iter()
        .map(|&c| {
            let shared = normal(&mut r);
            let weak = 0.3 * c as f64 + shared;
            vec![
                4.0 * c as f64 + 0.5 * normal(&mut r) + 10.0,
                weak + 0.05 * normal(&mut r) + 10.0,
                weak + 0.05 * normal(&mut r) + 10.0,
                weak + 0.05 * normal(&mut r) + 10.0,
            ]
        })
        .collect();
    let d = Dataset::from_rows(&rows, &labels).unwrap();
    let cfg = SelectionConfig::default();
    let exh = select::exhaustive_search(&d, 20, &cfg).unwrap();
    assert_eq!(exh.kept, vec![0]);
    let bffs = select::cfs_search(&d, &cfg).unwrap();
    assert_eq!(bffs.kept, vec![0]);
    assert_eq!(bffs.merit, exh.merit);
}

#[test]
fn single_feature_search() {
    let d = common::mixed_features(5, 40, 1);
    let cfg = SelectionConfig::default();
    let table = select::CorrelationTable::new(&d, &cfg).unwrap();
    for r in [select::cfs_search(&d, &cfg).unwrap(), select::exhaustive_search(&d, 20, &cfg).unwrap()] {
        assert_eq!(r.kept, vec![0]);
        assert_eq!(r.merit, Some(table.relevance()[0]));
    }
}

#[test]
fn exhaustive_counts_subsets_and_respects_cap() {
    let d = common::mixed_features(5, 40, 3);
    let cfg = SelectionConfig::default();
    assert_eq!(select::exhaustive_search(&d, 20, &cfg).unwrap().subsets_evaluated, 7);
    assert!(matches!(
        select::exhaustive_search(&d, 2, &cfg),
        Err(SelectionError::TooManyFeatures { n: 3, cap: 2 })
    ));
}

#[test]
fn exhaustive_merit_dominates_search_on_random_sets() {
    let cfg = SelectionConfig::default();
    for seed in 0..20 {
        let d = common::mixed_features(500 + seed, 60, 8);
        let e = select::exhaustive_search(&d, 20, &cfg).unwrap().merit.unwrap();
        let b = select::cfs_search(&d, &cfg).unwrap().merit.unwrap();
        assert!(e >= b - 1e-12, "seed {seed}: {e} < {b}");
    }
}

#[test]
fn relief_twins_get_equal_weights() {
    let mut r = rng(4);
    let m = 60;
    let labels: Vec<usize> = (0..m).map(|i| i % 2).collect();
    let rows: Vec<Vec<f64>> = labels
        .iter()
        .map(|&c| {
            let x = c as f64 + 0.3 * normal(&mut r);
            vec![x, x, r.gen()]
        })
        .collect();
    let d = Dataset::from_rows(&rows, &labels).unwrap();
    let w = select::relief(&d, &SelectionConfig::default()).unwrap().weights;
    assert!((w[0] - w[1]).abs() <= 1e-9, "{w:?}");
}

#[test]
fn relief_constant_feature_weighs_zero_and_is_repeatable() {
    let mut r = rng(8);
    let labels: Vec<usize> = (0..30).map(|i| i % 3).collect();
    let rows: Vec<Vec<f64>> = labels.iter().map(|&c| vec![7.0, c as f64 + r.gen::<f64>()]).collect();
    let d = Dataset::from_rows(&rows, &labels).unwrap();
    let cfg = SelectionConfig { relief_samples: Some(30), ..SelectionConfig::default() };
    let a = select::relief(&d, &cfg).unwrap();
    assert_eq!(a.weights[0], 0.0);
    assert_eq!(a, select::relief(&d, &cfg).unwrap());
}

#[test]
fn relief_needs_two_instances_per_class() {
    let d = Dataset::from_rows(&[vec![0.0], vec![1.0], vec![2.0]], &[0, 0, 1]).unwrap();
    assert!(matches!(select::relief(&d, &SelectionConfig::default()), Err(SelectionError::SingletonClass(_))));
}

#[test]
fn apply_selection_projects_in_kept_order() {
    let d = Dataset::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]], &[0, 1]).unwrap();
    let cfg = SelectionConfig { delta: 0.0, tau_c: 0.0, tau_f: 1.0, ..SelectionConfig::default() };
    let mut r = select::select(&d, Method::Ifecf, &cfg).unwrap();
    assert_eq!(select::apply_selection(&d, &r).unwrap(), d);
    r.kept = vec![2, 0];
    let p = select::apply_selection(&d, &r).unwrap();
    assert_eq!(p.values(), &[3.0, 1.0, 6.0, 4.0]);
    assert_eq!(p.labels(), d.labels());

    let other = Dataset::from_rows(&[vec![1.0, 2.0], vec![4.0, 5.0]], &[0, 1]).unwrap();
    assert!(select::apply_selection(&other, &r).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dispersion_pass_is_scale_invariant(seed in 0u64..1000, c in 0.01f64..100.0) {
        let d = common::lung_like(seed);
        let cols = d.columns();
        let scaled: Vec<Vec<f64>> = cols.iter().map(|col| col.iter().map(|v| v * c).collect()).collect();
        let a = select::dispersion_pass(&cols, 0.05);
        let b = select::dispersion_pass(&scaled, 0.05);
        prop_assert_eq!(a.survivors, b.survivors);
        prop_assert_eq!(a.zero_mean, b.zero_mean);
    }

    #[test]
    fn single_feature_merit_is_its_relevance(seed in 0u64..1000, n in 1usize..8) {
        let d = common::mixed_features(seed, 30, n);
        let table = select::CorrelationTable::new(&d, &SelectionConfig::default()).unwrap();
        for f in 0..n {
            prop_assert_eq!(select::cfs_merit(&d, &[f]).unwrap().value, table.relevance()[f]);
        }
    }
}
