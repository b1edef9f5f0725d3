//! Repeated stratified k-fold CV over a lambda grid; prints the summary table.

use jointsel::{generate_synthetic, repeated_kfold_cv, CvConfig, Hyperparams, SynthConfig};

fn main() -> jointsel::Result<()> {
    let cfg = SynthConfig {
        n_negative: 120,
        n_positive: 30,
        d: 24,
        support_size: 4,
        use_radiomics_structure: false,
        seed: 3,
        ..Default::default()
    };
    let (data, _) = generate_synthetic(&cfg)?;
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let cv = CvConfig { folds: 5, repeats: 3, seed: 11, jobs };
    let report = repeated_kfold_cv(&data, &Hyperparams::default(), &[0.01, 0.1, 1.0, 10.0], &cv)?;

    print!("{}", report.summary_text());
    if let Some(best) = report.best_lambda {
        let freq = report.selection_frequency_csv(best).unwrap_or_default();
        println!("\nselection counts at lambda={best}:");
        for line in freq.lines().take(6) {
            println!("  {line}");
        }
    }
    Ok(())
}
