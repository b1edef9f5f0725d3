//! Fit the joint classifier/regressor once and inspect the result.

use jointsel::metrics::{auc, confusion_metrics};
use jointsel::{fit, generate_synthetic, Hyperparams, SynthConfig};

fn main() -> jointsel::Result<()> {
    let cfg = SynthConfig {
        n_negative: 160,
        n_positive: 40,
        d: 60,
        support_size: 6,
        use_radiomics_structure: false,
        seed: 1,
        ..Default::default()
    };
    let (data, _) = generate_synthetic(&cfg)?;
    let hp = Hyperparams { lambda: 1.0, k: 30, ..Default::default() };
    let report = fit(&data, &hp)?;

    println!(
        "{} sweeps after warm start, converged: {}",
        report.iterations, report.converged
    );
    let trace = &report.objective_trace;
    println!("objective {:.4} -> {:.4}", trace[0], trace[trace.len() - 1]);
    for w in &report.warnings {
        println!("warning: {w}");
    }

    let model = &report.model;
    println!("{} of {} features kept", model.selected_features().len(), data.n_features());
    let preds = model.predict_dataset(&data)?;
    let labels: Vec<i8> = preds.iter().map(|p| p.label).collect();
    let scores: Vec<f64> = preds.iter().map(|p| p.score).collect();
    let c = confusion_metrics(&data.labels, &labels).expect("non-empty");
    println!(
        "training accuracy {:.3}, sensitivity {:.3}, AUC {:.3}",
        c.accuracy,
        c.sensitivity.unwrap_or(f64::NAN),
        auc(&data.labels, &scores).unwrap_or(f64::NAN)
    );
    Ok(())
}
