//! Repeated stratified k-fold cross-validation over a λ grid.
//!
//! Every (repeat, fold, λ) cell fits on the training portion only (including
//! the standardization statistics) and scores the held-out portion. Folds are
//! redrawn for each repeat from the run seed. Regression metrics only use
//! held-out samples whose conversion time is known.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::{Dataset, Hyperparams};
use crate::error::{Error, Result};
use crate::metrics::{auc, confusion_metrics, mean_abs_error, mean_sd, pearson_cc, rmse};
use crate::optimizer::fit;

/// The λ values searched by default: 1e-3, 1e-2, …, 1e3.
pub const DEFAULT_LAMBDA_GRID: [f64; 7] = [1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3];

pub const CSV_HEADER: &str =
    "lambda,repeat,fold,accuracy,sensitivity,specificity,auc,cc,rmse,time_mae_severe,n_selected_features";

#[derive(Clone, Debug, PartialEq)]
pub struct CvConfig {
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    /// Worker threads; 1 runs every cell on the calling thread.
    pub jobs: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            folds: 5,
            repeats: 20,
            seed: 0,
            jobs: 1,
        }
    }
}

/// Metrics of one fitted cell on its held-out fold.
#[derive(Clone, Debug, PartialEq)]
pub struct CellRecord {
    pub lambda: f64,
    pub repeat: usize,
    pub fold: usize,
    pub accuracy: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub auc: Option<f64>,
    pub cc: Option<f64>,
    pub rmse: Option<f64>,
    pub time_mae_severe: Option<f64>,
    pub selected_features: Vec<usize>,
}

impl CellRecord {
    fn metric(&self, m: Metric) -> Option<f64> {
        match m {
            Metric::Accuracy => self.accuracy,
            Metric::Sensitivity => self.sensitivity,
            Metric::Specificity => self.specificity,
            Metric::Auc => self.auc,
            Metric::Cc => self.cc,
            Metric::Rmse => self.rmse,
            Metric::TimeMaeSevere => self.time_mae_severe,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Accuracy,
    Sensitivity,
    Specificity,
    Auc,
    Cc,
    Rmse,
    TimeMaeSevere,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::Accuracy,
        Metric::Sensitivity,
        Metric::Specificity,
        Metric::Auc,
        Metric::Cc,
        Metric::Rmse,
        Metric::TimeMaeSevere,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::Sensitivity => "sensitivity",
            Metric::Specificity => "specificity",
            Metric::Auc => "auc",
            Metric::Cc => "cc",
            Metric::Rmse => "rmse",
            Metric::TimeMaeSevere => "time_mae_severe",
        }
    }
}

/// Mean ± sample standard deviation of one metric across the cells of a λ,
/// ignoring cells where the metric is undefined.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aggregate {
    pub mean: f64,
    pub sd: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LambdaSummary {
    pub lambda: f64,
    /// Indexed like [`Metric::ALL`].
    pub metrics: Vec<Option<Aggregate>>,
    /// Per feature, the number of cells whose fit kept that feature.
    pub selection_counts: Vec<usize>,
}

impl LambdaSummary {
    pub fn get(&self, m: Metric) -> Option<Aggregate> {
        self.metrics[Metric::ALL.iter().position(|&x| x == m).unwrap()]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvReport {
    pub lambda_grid: Vec<f64>,
    pub config: CvConfig,
    /// Ordered by λ (grid order), then repeat, then fold.
    pub cells: Vec<CellRecord>,
    pub summaries: Vec<LambdaSummary>,
    /// Fold index of every sample, one vector per repeat.
    pub fold_assignments: Vec<Vec<usize>>,
    pub feature_names: Vec<String>,
    /// Highest mean AUC; ties go to the smaller λ.
    pub best_lambda: Option<f64>,
}

/// Assigns each sample a fold in `0..folds`, shuffling within each class and
/// dealing round-robin so every fold receives its share of both classes. The
/// dealing position carries over from the negative to the positive class, so
/// remainders spread across folds.
pub fn stratified_folds(labels: &[i8], folds: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut assignment = vec![0; labels.len()];
    let mut slot = 0;
    for class in [-1i8, 1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(rng);
        for i in idx {
            assignment[i] = slot % folds;
            slot += 1;
        }
    }
    assignment
}

fn nan_free(values: impl Iterator<Item = Option<f64>>) -> Vec<f64> {
    values.flatten().filter(|v| v.is_finite()).collect()
}

fn evaluate_cell(
    dataset: &Dataset,
    hp: &Hyperparams,
    lambda: f64,
    assignment: &[usize],
    repeat: usize,
    fold: usize,
) -> Result<CellRecord> {
    let train_idx: Vec<usize> = (0..assignment.len()).filter(|&i| assignment[i] != fold).collect();
    let test_idx: Vec<usize> = (0..assignment.len()).filter(|&i| assignment[i] == fold).collect();
    let tag = |e: Error| Error::CvCell {
        repeat,
        fold,
        lambda,
        source: Box::new(e),
    };
    let train = dataset.subset(&train_idx).validate().map_err(tag)?;
    let test = dataset.subset(&test_idx);
    let report = fit(&train, &hp.clone().with_lambda(lambda)).map_err(tag)?;
    let preds = report.model.predict_dataset(&test).map_err(tag)?;

    let y_pred: Vec<i8> = preds.iter().map(|p| p.label).collect();
    let scores: Vec<f64> = preds.iter().map(|p| p.score).collect();
    let conf = confusion_metrics(&test.labels, &y_pred);

    let timed: Vec<usize> = (0..test.n_samples()).filter(|&j| test.time_present[j]).collect();
    let z_true: Vec<f64> = timed.iter().map(|&j| test.times[j]).collect();
    let z_pred: Vec<f64> = timed.iter().map(|&j| preds[j].time).collect();
    let severe: Vec<usize> = timed.iter().copied().filter(|&j| test.labels[j] > 0).collect();
    let s_true: Vec<f64> = severe.iter().map(|&j| test.times[j]).collect();
    let s_pred: Vec<f64> = severe.iter().map(|&j| preds[j].time).collect();

    Ok(CellRecord {
        lambda,
        repeat,
        fold,
        accuracy: conf.map(|c| c.accuracy),
        sensitivity: conf.and_then(|c| c.sensitivity),
        specificity: conf.and_then(|c| c.specificity),
        auc: auc(&test.labels, &scores),
        cc: pearson_cc(&z_true, &z_pred),
        rmse: rmse(&z_true, &z_pred),
        time_mae_severe: mean_abs_error(&s_true, &s_pred),
        selected_features: report.model.selected_features(),
    })
}

/// Runs the full protocol. `dataset` must be validated; the fold count must
/// not exceed the sample count.
pub fn repeated_kfold_cv(
    dataset: &Dataset,
    hp_base: &Hyperparams,
    lambda_grid: &[f64],
    cfg: &CvConfig,
) -> Result<CvReport> {
    let n = dataset.n_samples();
    if cfg.folds < 2 {
        return Err(Error::InvalidConfig(format!("folds must be at least 2, got {}", cfg.folds)));
    }
    if n < cfg.folds {
        return Err(Error::InvalidConfig(format!(
            "{} folds requested for {n} samples",
            cfg.folds
        )));
    }
    if cfg.repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be at least 1".into()));
    }
    if lambda_grid.is_empty() {
        return Err(Error::InvalidConfig("empty lambda grid".into()));
    }
    for &l in lambda_grid {
        hp_base.clone().with_lambda(l).validate()?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let fold_assignments: Vec<Vec<usize>> = (0..cfg.repeats)
        .map(|_| stratified_folds(&dataset.labels, cfg.folds, &mut rng))
        .collect();

    let keys: Vec<(usize, usize, usize)> = (0..lambda_grid.len())
        .flat_map(|l| (0..cfg.repeats).flat_map(move |r| (0..cfg.folds).map(move |f| (l, r, f))))
        .collect();
    let run = |&(l, r, f): &(usize, usize, usize)| {
        evaluate_cell(dataset, hp_base, lambda_grid[l], &fold_assignments[r], r, f)
    };
    let cells: Vec<CellRecord> = if cfg.jobs <= 1 {
        keys.iter().map(run).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        pool.install(|| keys.par_iter().map(run).collect::<Result<_>>())?
    };

    let per_lambda = cfg.repeats * cfg.folds;
    let d = dataset.n_features();
    let summaries: Vec<LambdaSummary> = lambda_grid
        .iter()
        .zip(cells.chunks(per_lambda))
        .map(|(&lambda, chunk)| {
            let metrics = Metric::ALL
                .iter()
                .map(|&m| {
                    let vals = nan_free(chunk.iter().map(|c| c.metric(m)));
                    mean_sd(&vals).map(|(mean, sd)| Aggregate {
                        mean,
                        sd,
                        count: vals.len(),
                    })
                })
                .collect();
            let mut selection_counts = vec![0; d];
            for c in chunk {
                for &i in &c.selected_features {
                    selection_counts[i] += 1;
                }
            }
            LambdaSummary {
                lambda,
                metrics,
                selection_counts,
            }
        })
        .collect();

    let mut best: Option<(f64, f64)> = None;
    for s in &summaries {
        if let Some(a) = s.get(Metric::Auc) {
            let better = match best {
                None => true,
                Some((bl, bm)) => a.mean > bm || (a.mean == bm && s.lambda < bl),
            };
            if better {
                best = Some((s.lambda, a.mean));
            }
        }
    }

    Ok(CvReport {
        lambda_grid: lambda_grid.to_vec(),
        config: cfg.clone(),
        cells,
        summaries,
        fold_assignments,
        feature_names: (0..d).map(|i| dataset.feature_name(i)).collect(),
        best_lambda: best.map(|(l, _)| l),
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

impl CvReport {
    pub fn summary_for(&self, lambda: f64) -> Option<&LambdaSummary> {
        self.summaries.iter().find(|s| s.lambda == lambda)
    }

    pub fn best_summary(&self) -> Option<&LambdaSummary> {
        self.best_lambda.and_then(|l| self.summary_for(l))
    }

    /// One row per cell, columns as in [`CSV_HEADER`].
    pub fn to_csv_string(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for c in &self.cells {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{}",
                c.lambda,
                c.repeat,
                c.fold,
                fmt_opt(c.accuracy),
                fmt_opt(c.sensitivity),
                fmt_opt(c.specificity),
                fmt_opt(c.auc),
                fmt_opt(c.cc),
                fmt_opt(c.rmse),
                fmt_opt(c.time_mae_severe),
                c.selected_features.len()
            );
        }
        s
    }

    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "repeated stratified cross-validation: {} folds x {} repeats, seed {}",
            self.config.folds, self.config.repeats, self.config.seed
        );
        for sum in &self.summaries {
            let _ = write!(s, "lambda={}", sum.lambda);
            for (m, agg) in Metric::ALL.iter().zip(&sum.metrics) {
                match agg {
                    Some(a) => {
                        let _ = write!(s, " {}={:.4}+-{:.4}", m.name(), a.mean, a.sd);
                    }
                    None => {
                        let _ = write!(s, " {}=NA", m.name());
                    }
                }
            }
            s.push('\n');
        }
        let _ = writeln!(
            s,
            "best_lambda={} (by mean auc, ties to smaller lambda)",
            fmt_opt(self.best_lambda)
        );
        let _ = writeln!(
            s,
            "note: regression metrics use held-out samples with a known conversion time only"
        );
        s
    }

    /// `index,name,count,total` for every feature at the given λ.
    pub fn selection_frequency_csv(&self, lambda: f64) -> Option<String> {
        let sum = self.summary_for(lambda)?;
        let total = self.config.folds * self.config.repeats;
        let mut s = String::from("index,name,count,total\n");
        for (i, &c) in sum.selection_counts.iter().enumerate() {
            let _ = writeln!(s, "{},{},{},{}", i, self.feature_names[i], c, total);
        }
        Some(s)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv_string()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_are_stratified() {
        let labels: Vec<i8> = (0..23).map(|i| if i % 4 == 0 { 1 } else { -1 }).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = stratified_folds(&labels, 5, &mut rng);
        for f in 0..5 {
            let pos = (0..23).filter(|&i| a[i] == f && labels[i] > 0).count();
            let size = a.iter().filter(|&&x| x == f).count();
            assert!((1..=2).contains(&pos), "fold {f} has {pos} positives");
            assert!((4..=5).contains(&size));
        }
    }

    #[test]
    fn leave_one_out_shape() {
        let labels = [-1, -1, -1, 1, 1, 1];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut a = stratified_folds(&labels, 6, &mut rng);
        a.sort_unstable();
        assert_eq!(a, vec![0, 1, 2, 3, 4, 5]);
    }
}
