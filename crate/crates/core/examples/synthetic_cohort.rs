//! Generate a radiomics-shaped cohort and write it as CSV.
//!
//! cargo run --example synthetic_cohort -- /tmp/cohort.csv

use jointsel::{generate_synthetic, write_csv, SynthConfig};

fn main() -> jointsel::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "cohort.csv".into());
    let cfg = SynthConfig { seed: 7, ..Default::default() };
    let (data, planted) = generate_synthetic(&cfg)?;

    let converted: Vec<f64> = (0..data.n_samples())
        .filter(|&j| data.labels[j] > 0 && data.times[j] > 0.0)
        .map(|j| data.times[j])
        .collect();
    println!(
        "{} non-severe, {} severe ({} converted, mean {:.2} days), {} features",
        data.class_count(-1),
        data.class_count(1),
        converted.len(),
        converted.iter().sum::<f64>() / converted.len() as f64,
        data.n_features()
    );
    let names: Vec<String> = planted.support.iter().map(|&i| data.feature_name(i)).collect();
    println!("planted support: {}", names.join(", "));

    write_csv(&data, &out)?;
    println!("wrote {out}");
    Ok(())
}
