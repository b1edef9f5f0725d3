//! Seeded synthetic cohorts shaped like a chest-CT radiomics table: an
//! imbalanced severe/non-severe split, a sparse planted classifier and
//! regressor sharing one support, and conversion times in days.
//!
//! Planted coefficients act on standardized features (the generated table's
//! own per-feature mean and population standard deviation), which is the same
//! transform a default fit applies to the full table.
//!
//! Severe-at-admission cases carry a conversion time of exactly 0 days.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::dataset::{Dataset, Standardizer};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub n_negative: usize,
    pub n_positive: usize,
    pub d: usize,
    /// Number of informative features shared by both planted models.
    pub support_size: usize,
    /// Standard deviation of the logit noise added before labelling.
    pub noise_sd_class: f64,
    /// Standard deviation of the time noise, in days.
    pub noise_sd_time: f64,
    /// Target mean conversion time over converted (not at-admission) positives.
    pub mean_conversion_days: f64,
    /// Spread (standard deviation, days) of the noiseless time signal.
    pub time_spread_days: f64,
    pub frac_severe_at_admission: f64,
    /// Build density/volume/mass triplets per region part instead of plain
    /// Gaussian features; `d` must then be a multiple of 3.
    pub use_radiomics_structure: bool,
    /// Give negatives synthetic conversion times too (stress-tests the
    /// regression path over both classes).
    pub negatives_have_times: bool,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_negative: 322,
            n_positive: 86,
            d: 390,
            support_size: 10,
            noise_sd_class: 1.0,
            noise_sd_time: 1.0,
            mean_conversion_days: 5.64,
            time_spread_days: 2.5,
            frac_severe_at_admission: 34.0 / 86.0,
            use_radiomics_structure: true,
            negatives_have_times: false,
            seed: 0,
        }
    }
}

/// Ground truth behind a generated dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct Planted {
    /// Classifier coefficients, ±1 on the support.
    pub w: DVector<f64>,
    /// Regressor direction, ±1 on the support.
    pub v: DVector<f64>,
    /// Sorted support indices.
    pub support: Vec<usize>,
    /// Noiseless time in days is `time_scale·vᵀx_std + time_offset`
    /// (clamped at zero).
    pub time_scale: f64,
    pub time_offset: f64,
    pub standardizer: Standardizer,
}

impl Planted {
    /// Noiseless, unclamped time signal for a raw sample.
    pub fn linear_time(&self, x: &[f64]) -> f64 {
        let z = self.standardizer.transform_vector(x);
        self.time_scale * z.iter().zip(self.v.iter()).map(|(a, b)| a * b).sum::<f64>()
            + self.time_offset
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Infeasible(m));
        if self.n_negative == 0 || self.n_positive == 0 {
            return bad("both class counts must be positive".into());
        }
        if self.d == 0 {
            return bad("d must be positive".into());
        }
        if self.support_size == 0 || self.support_size > self.d {
            return bad(format!(
                "support_size must be in 1..={}, got {}",
                self.d, self.support_size
            ));
        }
        if !(0.0..=1.0).contains(&self.frac_severe_at_admission) {
            return bad("frac_severe_at_admission must lie in [0, 1]".into());
        }
        for (name, v) in [
            ("noise_sd_class", self.noise_sd_class),
            ("noise_sd_time", self.noise_sd_time),
            ("time_spread_days", self.time_spread_days),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be finite and non-negative"));
            }
        }
        if !(self.mean_conversion_days > 0.0 && self.mean_conversion_days.is_finite()) {
            return bad("mean_conversion_days must be positive".into());
        }
        if self.use_radiomics_structure && self.d % 3 != 0 {
            return bad(format!(
                "radiomics structure needs d divisible by 3 (parts × density/volume/mass), got {}",
                self.d
            ));
        }
        Ok(())
    }
}

fn radiomics_names(parts: usize) -> Vec<String> {
    ["density", "volume", "mass"]
        .iter()
        .flat_map(|kind| (1..=parts).map(move |p| format!("{kind}_p{p:03}")))
        .collect()
}

/// Composite radiomic quantity combining attenuation (HU) and volume (mL).
pub fn mass_feature(density_hu: f64, volume_ml: f64) -> f64 {
    (density_hu + 1000.0) * volume_ml * 0.001
}

/// Mean of `max(0, base + offset)` as a function of `offset`.
fn clamped_mean(base: &[f64], offset: f64) -> f64 {
    base.iter().map(|b| (b + offset).max(0.0)).sum::<f64>() / base.len() as f64
}

pub fn generate_synthetic(cfg: &SynthConfig) -> Result<(Dataset, Planted)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n_negative + cfg.n_positive;
    let d = cfg.d;

    let (features, feature_names) = if cfg.use_radiomics_structure {
        let parts = d / 3;
        let density = Normal::new(-500.0, 150.0).expect("valid normal");
        let mut x = DMatrix::zeros(d, n);
        for j in 0..n {
            for p in 0..parts {
                let dens: f64 = density.sample(&mut rng);
                let z: f64 = rng.sample(StandardNormal);
                let vol = z.abs() * 10.0;
                x[(p, j)] = dens;
                x[(parts + p, j)] = vol;
                x[(2 * parts + p, j)] = mass_feature(dens, vol);
            }
        }
        (x, Some(radiomics_names(parts)))
    } else {
        (DMatrix::from_fn(d, n, |_, _| rng.sample::<f64, _>(StandardNormal)), None)
    };

    let standardizer = Standardizer::fit(&features);
    let xs = standardizer.transform_matrix(&features);

    let mut support = sample(&mut rng, d, cfg.support_size).into_vec();
    support.sort_unstable();
    let mut w = DVector::zeros(d);
    let mut v = DVector::zeros(d);
    for &i in &support {
        w[i] = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        v[i] = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    }

    // Labels: the n_positive highest noisy scores are severe. This is sign
    // labelling followed by relabelling the highest-scoring negatives (or
    // lowest-scoring positives) until the class counts match.
    let scores: Vec<f64> = (0..n)
        .map(|j| {
            let e: f64 = rng.sample(StandardNormal);
            xs.column(j).dot(&w) + cfg.noise_sd_class * e
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut labels = vec![-1i8; n];
    for &j in order.iter().take(cfg.n_positive) {
        labels[j] = 1;
    }

    let signal: Vec<f64> = (0..n).map(|j| xs.column(j).dot(&v)).collect();
    let time_noise: Vec<f64> = (0..n)
        .map(|_| cfg.noise_sd_time * rng.sample::<f64, _>(StandardNormal))
        .collect();

    let positives: Vec<usize> = (0..n).filter(|&j| labels[j] > 0).collect();
    let n_admission = (cfg.frac_severe_at_admission * cfg.n_positive as f64).round() as usize;
    let mut admission = vec![false; n];
    for k in sample(&mut rng, positives.len(), n_admission.min(positives.len())).into_iter() {
        admission[positives[k]] = true;
    }
    let converted: Vec<usize> = positives.iter().copied().filter(|&j| !admission[j]).collect();

    // Scale the signal to the requested spread over converted cases, then
    // find the offset that hits the requested mean after clamping at zero.
    let sd = {
        let vals: Vec<f64> = if converted.len() >= 2 {
            converted.iter().map(|&j| signal[j]).collect()
        } else {
            signal.clone()
        };
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        (vals.iter().map(|s| (s - m) * (s - m)).sum::<f64>() / vals.len() as f64).sqrt()
    };
    let time_scale = if sd > 0.0 { cfg.time_spread_days / sd } else { 0.0 };
    let time_offset = if converted.is_empty() {
        cfg.mean_conversion_days
    } else {
        let base: Vec<f64> = converted
            .iter()
            .map(|&j| time_scale * signal[j] + time_noise[j])
            .collect();
        let target = cfg.mean_conversion_days;
        let (mut lo, mut hi) = (-1.0, 1.0);
        while clamped_mean(&base, lo) > target {
            lo *= 2.0;
        }
        while clamped_mean(&base, hi) < target {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if clamped_mean(&base, mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };

    let mut times = vec![0.0; n];
    let mut time_present = vec![false; n];
    for j in 0..n {
        let timed = labels[j] > 0 || cfg.negatives_have_times;
        if !timed {
            continue;
        }
        time_present[j] = true;
        times[j] = if admission[j] {
            0.0
        } else {
            (time_scale * signal[j] + time_offset + time_noise[j]).max(0.0)
        };
    }

    let dataset = Dataset {
        features,
        labels,
        times,
        time_present,
        feature_names,
        sample_ids: None,
    }
    .validate()?;
    Ok((
        dataset,
        Planted {
            w,
            v,
            support,
            time_scale,
            time_offset,
            standardizer,
        },
    ))
}
