//! Rank features by the joint row norm and compare with the planted support.

use jointsel::{fit, generate_synthetic, Hyperparams, SynthConfig};

fn main() -> jointsel::Result<()> {
    let cfg = SynthConfig {
        n_negative: 200,
        n_positive: 100,
        d: 45,
        support_size: 5,
        seed: 5,
        ..Default::default()
    };
    let (data, planted) = generate_synthetic(&cfg)?;
    let hp = Hyperparams { lambda: 5.0, sample_selection_enabled: false, ..Default::default() };
    let model = fit(&data, &hp)?.model;

    println!("rank  feature        row norm  planted");
    for (r, f) in model.feature_ranking().iter().take(10).enumerate() {
        let mark = if planted.support.contains(&f.index) { "*" } else { "" };
        println!("{:>4}  {:<13} {:>9.4}  {mark}", r + 1, f.name, f.norm);
    }
    Ok(())
}
