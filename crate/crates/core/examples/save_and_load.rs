//! Persist a fitted model and reuse it for prediction.

use jointsel::{fit, generate_synthetic, load_model, save_model, Hyperparams, SynthConfig};

fn main() -> jointsel::Result<()> {
    let cfg = SynthConfig {
        n_negative: 80,
        n_positive: 20,
        d: 12,
        support_size: 3,
        seed: 2,
        ..Default::default()
    };
    let (data, _) = generate_synthetic(&cfg)?;
    let model = fit(&data, &Hyperparams { lambda: 0.5, ..Default::default() })?.model;

    let dir = std::env::temp_dir().join(format!("jointsel-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|source| jointsel::Error::Io { path: dir.clone(), source })?;
    let path = dir.join("model.txt");
    save_model(&model, &path)?;
    let loaded = load_model(&path)?;
    assert_eq!(loaded, model);

    println!("id,label_pred,score,time_pred");
    for (j, p) in loaded.predict_dataset(&data)?.iter().enumerate().take(5) {
        println!("{},{},{:.4},{:.2}", data.sample_id(j), p.label, p.score, p.time);
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}
