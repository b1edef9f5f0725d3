use std::path::Path;

use jointsel::io::{model_to_string, parse_csv, parse_model, write_csv_to};
use jointsel::{fit, generate_synthetic, Dataset, Error, Hyperparams, SynthConfig};
use nalgebra::DMatrix;
use proptest::prelude::*;

#[test]
fn default_cohort_matches_targets() {
    let (data, planted) = generate_synthetic(&SynthConfig::default()).unwrap();
    assert_eq!((data.class_count(-1), data.class_count(1)), (322, 86));
    assert_eq!(data.n_features(), 390);
    let converted: Vec<f64> = (0..data.n_samples())
        .filter(|&j| data.labels[j] > 0 && data.times[j] > 0.0)
        .map(|j| data.times[j])
        .collect();
    let mean = converted.iter().sum::<f64>() / converted.len() as f64;
    assert!((mean - 5.64).abs() < 0.5, "mean {mean}");
    let at_admission = (0..data.n_samples())
        .filter(|&j| data.labels[j] > 0 && data.times[j] == 0.0)
        .count();
    assert!(at_admission >= 34);

    let nonzero: Vec<usize> = (0..390)
        .filter(|&i| planted.w[i].hypot(planted.v[i]) > 0.0)
        .collect();
    assert_eq!(nonzero, planted.support);
    assert_eq!(nonzero.len(), 10);
}

#[test]
fn noiseless_labels_are_learnable() {
    let cfg = SynthConfig {
        noise_sd_class: 0.0,
        n_negative: 160,
        n_positive: 40,
        d: 30,
        support_size: 5,
        use_radiomics_structure: false,
        seed: 8,
        ..Default::default()
    };
    let (data, _) = generate_synthetic(&cfg).unwrap();
    let hp = Hyperparams {
        lambda: 1e-3,
        sample_selection_enabled: false,
        fit_intercept: true,
        ..Default::default()
    };
    let m = fit(&data, &hp).unwrap().model;
    let preds = m.predict_dataset(&data).unwrap();
    let correct = preds.iter().zip(&data.labels).filter(|(p, &y)| p.label == y).count();
    let acc = correct as f64 / data.n_samples() as f64;
    assert!(acc >= 0.99, "accuracy {acc}");
}

#[test]
fn seeds_are_reproducible() {
    let cfg = SynthConfig { n_negative: 30, n_positive: 9, d: 15, support_size: 3, seed: 42, ..Default::default() };
    assert_eq!(generate_synthetic(&cfg).unwrap(), generate_synthetic(&cfg).unwrap());
    let other = SynthConfig { seed: 43, ..cfg.clone() };
    assert_ne!(generate_synthetic(&cfg).unwrap().0, generate_synthetic(&other).unwrap().0);
}

fn datasets() -> impl Strategy<Value = Dataset> {
    (1usize..6, 2usize..12).prop_flat_map(|(d, n)| {
        (
            prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, d * n),
            prop::collection::vec(prop::bool::ANY, n),
            prop::collection::vec(prop::option::of(0.0f64..1e6), n),
            prop::bool::ANY,
        )
            .prop_map(move |(xs, pos, times, named)| {
                let mut labels: Vec<i8> = pos.iter().map(|&p| if p { 1 } else { -1 }).collect();
                labels[0] = 1;
                labels[1] = -1;
                Dataset {
                    features: DMatrix::from_vec(d, n, xs),
                    labels,
                    times: times.iter().map(|t| t.unwrap_or(0.0)).collect(),
                    time_present: times.iter().map(Option::is_some).collect(),
                    feature_names: named.then(|| (0..d).map(|i| format!("roi {i}")).collect()),
                    sample_ids: named.then(|| (0..n).map(|j| format!("case-{j}")).collect()),
                }
            })
    })
}

proptest! {
    #[test]
    fn csv_round_trip(ds in datasets()) {
        let mut buf = Vec::new();
        write_csv_to(&ds, &mut buf).unwrap();
        let back = parse_csv(std::str::from_utf8(&buf).unwrap(), Path::new("mem")).unwrap();
        prop_assert_eq!(back, ds);
    }
}

#[test]
fn model_round_trip_is_bitwise() {
    let cfg = SynthConfig { n_negative: 40, n_positive: 12, d: 9, support_size: 3, seed: 2, ..Default::default() };
    let (data, _) = generate_synthetic(&cfg).unwrap();
    let hp = Hyperparams { lambda: 0.37, fit_intercept: true, k: 7, ..Default::default() };
    let m = fit(&data, &hp).unwrap().model;
    let text = model_to_string(&m);
    let back = parse_model(&text, Path::new("m")).unwrap();
    assert_eq!(back, m);
    assert_eq!(model_to_string(&back), text);
    assert_eq!(back.feature_names.last().map(String::as_str), Some("(intercept)"));
    let truncated = &text[..text.len() / 2];
    assert!(matches!(parse_model(truncated, Path::new("m")), Err(Error::Parse { .. })));
}
