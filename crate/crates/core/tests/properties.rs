use cpci_core::cpci::{
    adjust_beta, classification_threshold, effective_level, zero_score, CalibrationScores, CpciCalibration,
};
use cpci_core::data::partition;
use cpci_core::models::{Classifier, ClassifierKind, ConstantRegressor, Regressor};
use cpci_core::quantile::order_rank;
use cpci_core::{CpciConfig, DataSplits, Dataset, PredictionSet, Purpose, SeedSpec, SplitScheme, VciCalibration};
use proptest::prelude::*;
use rand::seq::SliceRandom;

/// First feature is the probability.
#[derive(Debug, Clone)]
struct FeatureProb;
impl Classifier for FeatureProb {
    fn predict_proba(&self, x: &[f64]) -> f64 {
        x[0]
    }
}

fn rows() -> impl Strategy<Value = Vec<(Vec<f64>, f64)>> {
    // Probabilities on a coarse grid so ties are common; the second feature
    // keeps points distinct.
    prop::collection::vec(
        (0u8..=4, -3.0f64..3.0, prop::bool::weighted(0.6), 0.01f64..5.0)
            .prop_map(|(p, z, zero, y)| (vec![f64::from(p) / 4.0, z], if zero { 0.0 } else { y })),
        4..40,
    )
}

fn splits_of(rows: &[(Vec<f64>, f64)]) -> DataSplits {
    let d = Dataset::from_rows(2, rows.iter().cloned()).unwrap();
    DataSplits { train: d.clone(), val: d.clone(), cal1: d.clone(), cal2: d, test: Dataset::empty(2) }
}

proptest! {
    #[test]
    fn gamma_is_clamped(level in 0.01f64..0.99, r in 0.0f64..0.99, beta in -5.0f64..2.0) {
        let g = effective_level(level, r, beta);
        prop_assert!((0.0..=1.0).contains(&g));
    }

    #[test]
    fn adjusted_beta_never_exceeds_raw(beta in 0.0f64..=1.0, r in 0.01f64..0.99, n in 3usize..100_000, c in 2.01f64..10.0) {
        prop_assert!(adjust_beta(beta, r, n, c).unwrap() <= beta);
    }

    #[test]
    fn tie_breaking_admits_exactly_the_quantile_rank(rows in rows(), r in 0.01f64..0.99) {
        let cal1 = Dataset::from_rows(2, rows.iter().cloned()).unwrap();
        let t = classification_threshold(&cal1, &FeatureProb, r, true).unwrap();
        let admitted = cal1.iter().filter(|s| t.admits(zero_score(&FeatureProb, &s.features, true))).count();
        prop_assert_eq!(admitted, order_rank(cal1.len() + 1, r).min(cal1.len()));
    }

    #[test]
    fn two_step_sets_are_connected(rows in rows(), center in 0.0f64..3.0, xs in prop::collection::vec((0.0f64..=1.0, -3.0f64..3.0), 1..30)) {
        let s = splits_of(&rows);
        let cal = CpciCalibration::select_r(&s, FeatureProb, ConstantRegressor { value: center }, &CpciConfig::new(0.9)).unwrap();
        for (p, z) in xs {
            let set = cal.predict(&[p, z]);
            let shape_ok = matches!(set, PredictionSet::ZeroSingleton | PredictionSet::Interval { .. } | PredictionSet::Unbounded);
            prop_assert!(shape_ok, "{:?}", set);
            prop_assert!(!set.is_disconnected());
        }
        let best = cal.grid.iter().map(|g| g.objective).fold(f64::INFINITY, f64::min);
        let at_zero = cal.grid[0].objective;
        prop_assert!(best <= at_zero);
    }

    #[test]
    fn calibration_ignores_order_within_splits(rows in rows(), seed in any::<u64>()) {
        let s = splits_of(&rows);
        let mut rng = SeedSpec::new(seed).stream(0, Purpose::Custom(1));
        let mut shuffled = s.clone();
        for part in [&mut shuffled.val, &mut shuffled.cal1, &mut shuffled.cal2] {
            let mut samples = part.clone().into_samples();
            samples.shuffle(&mut rng);
            *part = Dataset::new(2, samples).unwrap();
        }
        let config = CpciConfig::new(0.9);
        let f = ConstantRegressor { value: 1.0 };
        let a = CalibrationScores::compute(&s, &FeatureProb, &f, true).unwrap();
        let b = CalibrationScores::compute(&shuffled, &FeatureProb, &f, true).unwrap();
        for &r in &config.grid {
            prop_assert_eq!(a.evaluate(r, &config).unwrap(), b.evaluate(r, &config).unwrap());
        }
    }

    #[test]
    fn vci_length_does_not_depend_on_location(scores in prop::collection::vec(0.0f64..10.0, 1..40), center in -5.0f64..5.0, x in -5.0f64..5.0) {
        let cal = Dataset::from_rows(1, scores.iter().map(|&s| (vec![0.0], s))).unwrap();
        let vci = VciCalibration::calibrate(&cal, ConstantRegressor { value: center }, 0.8).unwrap();
        let set = vci.predict(&[x]);
        if vci.threshold.is_finite() {
            prop_assert!((set.length() - 2.0 * vci.threshold).abs() <= 1e-9 * (1.0 + center.abs() + vci.threshold));
        } else {
            prop_assert_eq!(set, PredictionSet::Unbounded);
        }
    }

    #[test]
    fn disconnected_means_zero_outside_interval(lo in -3.0f64..3.0, width in 0.0f64..3.0, with_zero in any::<bool>()) {
        let base = PredictionSet::Interval { lo, hi: lo + width };
        let set = PredictionSet::with_zero_membership(base, with_zero);
        let zero_outside = !(lo <= 0.0 && 0.0 <= lo + width);
        prop_assert_eq!(set.is_disconnected(), with_zero && zero_outside);
        prop_assert_eq!(set.contains_zero(), with_zero);
        prop_assert_eq!(set.length(), base.length());
    }

    #[test]
    fn partition_sizes_follow_the_scheme(n in 5usize..300, seed in any::<u64>()) {
        let d = Dataset::from_rows(1, (0..n).map(|i| (vec![i as f64], 0.0))).unwrap();
        let scheme = SplitScheme::equal_five_way();
        let s = partition(&d, &scheme, &mut SeedSpec::new(seed).stream(0, Purpose::Partition)).unwrap();
        let sizes = [s.train.len(), s.val.len(), s.cal1.len(), s.cal2.len(), s.test.len()];
        prop_assert_eq!(sizes, scheme.sizes(n).unwrap());
        let mut seen: Vec<f64> = [&s.train, &s.val, &s.cal1, &s.cal2, &s.test].iter().flat_map(|p| p.iter().map(|x| x.features[0])).collect();
        seen.sort_by(f64::total_cmp);
        prop_assert_eq!(seen, (0..n).map(|i| i as f64).collect::<Vec<_>>());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn built_in_probabilities_stay_in_unit_interval(
        data in prop::collection::vec((-4.0f64..4.0, -4.0f64..4.0, any::<bool>()), 20..60),
        probes in prop::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 1..20),
    ) {
        let mut rows: Vec<(Vec<f64>, f64)> = data.iter().map(|&(a, b, z)| (vec![a, b], if z { 0.0 } else { 1.0 + a.abs() })).collect();
        rows.push((vec![0.0, 0.0], 0.0));
        rows.push((vec![1.0, 1.0], 2.0));
        let train = Dataset::from_rows(2, rows).unwrap();
        for kind in [ClassifierKind::Logistic, ClassifierKind::Knn { k: None }, ClassifierKind::Random { seed: 3 }] {
            let model = kind.fit(&train).unwrap();
            for &(a, b) in &probes {
                let p = model.predict_proba(&[a, b]);
                prop_assert!((0.0..=1.0).contains(&p), "{kind:?} gave {p}");
            }
        }
        let f = ConstantRegressor::mean_of(&train).unwrap();
        prop_assert!(f.predict(&[0.0, 0.0]).is_finite());
    }
}
