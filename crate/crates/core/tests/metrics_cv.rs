use jointsel::cv::{stratified_folds, Metric, CSV_HEADER};
use jointsel::metrics::{auc, confusion_metrics, pearson_cc, rmse};
use jointsel::{generate_synthetic, repeated_kfold_cv, CvConfig, Hyperparams, SynthConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn labels_scores() -> impl Strategy<Value = (Vec<i8>, Vec<f64>)> {
    (2usize..25).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::bool::ANY.prop_map(|b| if b { 1i8 } else { -1 }), n),
            prop::collection::vec((-20i32..20).prop_map(|v| f64::from(v) * 0.25), n),
        )
    })
}

proptest! {
    #[test]
    fn auc_ignores_monotone_transforms((y, s) in labels_scores()) {
        let t: Vec<f64> = s.iter().map(|v| v.exp() * 3.0 - 1.0).collect();
        let cube: Vec<f64> = s.iter().map(|v| v * v * v + v).collect();
        prop_assert_eq!(auc(&y, &s), auc(&y, &t));
        prop_assert_eq!(auc(&y, &s), auc(&y, &cube));
    }

    #[test]
    fn cc_ignores_positive_affine_maps(
        a in prop::collection::vec(-10.0f64..10.0, 3..30),
        scale in 0.1f64..10.0,
        shift in -50.0f64..50.0,
        seed in any::<u64>(),
    ) {
        let b: Vec<f64> = a.iter().enumerate().map(|(i, x)| x.sin() + (i as f64 + seed as f64 % 7.0).cos()).collect();
        let mapped: Vec<f64> = a.iter().map(|x| scale * x + shift).collect();
        match (pearson_cc(&a, &b), pearson_cc(&mapped, &b)) {
            (Some(p), Some(q)) => prop_assert!((p - q).abs() < 1e-9, "{} vs {}", p, q),
            (p, q) => prop_assert_eq!(p.is_none(), q.is_none()),
        }
    }

    #[test]
    fn folds_partition_samples(y in prop::collection::vec(prop::bool::ANY.prop_map(|b| if b { 1i8 } else { -1 }), 2..60), folds in 2usize..8, seed in any::<u64>()) {
        prop_assume!(folds <= y.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = stratified_folds(&y, folds, &mut rng);
        prop_assert_eq!(a.len(), y.len());
        prop_assert!(a.iter().all(|&f| f < folds));
        for label in [-1i8, 1] {
            let class: Vec<usize> = (0..y.len()).filter(|&j| y[j] == label).collect();
            let mut per = vec![0usize; folds];
            for &j in &class {
                per[a[j]] += 1;
            }
            let (lo, hi) = (per.iter().min().unwrap(), per.iter().max().unwrap());
            prop_assert!(hi - lo <= 1, "class {} counts {:?}", label, per);
        }
    }
}

#[test]
fn undefined_metrics_are_none() {
    assert_eq!(auc(&[1, 1], &[0.2, 0.3]), None);
    assert_eq!(pearson_cc(&[0.0; 4], &[1.0; 4]), None);
    assert_eq!(rmse(&[0.0; 4], &[1.0; 4]), Some(1.0));
    assert_eq!(pearson_cc(&[1.0, 2.0, 3.0], &[-1.0, -2.0, -3.0]), Some(-1.0));
    let c = confusion_metrics(&[-1, -1], &[1, -1]).unwrap();
    assert_eq!((c.accuracy, c.sensitivity, c.specificity), (0.5, None, Some(0.5)));
}

#[test]
fn leave_one_out_shape() {
    let cfg = SynthConfig {
        n_negative: 4,
        n_positive: 2,
        d: 3,
        support_size: 1,
        use_radiomics_structure: false,
        seed: 1,
        ..Default::default()
    };
    let (data, _) = generate_synthetic(&cfg).unwrap();
    let hp = Hyperparams { k: 2, ..Default::default() };
    let r = repeated_kfold_cv(&data, &hp, &[0.1, 1.0], &CvConfig { folds: 6, repeats: 1, seed: 0, jobs: 1 }).unwrap();
    assert_eq!(r.cells.len(), 12);
    let mut folds = r.fold_assignments[0].clone();
    folds.sort_unstable();
    assert_eq!(folds, vec![0, 1, 2, 3, 4, 5]);
    // one test sample per cell: AUC is undefined, accuracy is 0 or 1
    for c in &r.cells {
        assert_eq!(c.auc, None);
        assert!(matches!(c.accuracy, Some(a) if a == 0.0 || a == 1.0));
    }
    assert_eq!(r.best_lambda, None);
    assert!(r.to_csv_string().starts_with(CSV_HEADER));
}

#[test]
fn report_aggregates_cells() {
    let cfg = SynthConfig {
        n_negative: 40,
        n_positive: 15,
        d: 8,
        support_size: 2,
        use_radiomics_structure: false,
        seed: 3,
        ..Default::default()
    };
    let (data, _) = generate_synthetic(&cfg).unwrap();
    let r = repeated_kfold_cv(&data, &Hyperparams::default(), &[0.1, 10.0], &CvConfig { folds: 3, repeats: 2, seed: 5, jobs: 1 }).unwrap();
    assert_eq!(r.cells.len(), 12);
    assert_ne!(r.fold_assignments[0], r.fold_assignments[1]);
    for s in &r.summaries {
        let vals: Vec<f64> = r.cells.iter().filter(|c| c.lambda == s.lambda).filter_map(|c| c.auc).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let agg = s.get(Metric::Auc).unwrap();
        assert_eq!(agg.count, vals.len());
        assert!((agg.mean - mean).abs() < 1e-15);
    }
    let best = r.best_summary().unwrap();
    assert!(r.summaries.iter().all(|s| s.get(Metric::Auc).unwrap().mean <= best.get(Metric::Auc).unwrap().mean));
}
