//! Shared domain types: the dataset, solver hyperparameters, the fitted model
//! and the per-class selection masks.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Samples stored column-wise: `features` is `d × n`.
///
/// Samples without a known conversion time carry `time_present = false`; their
/// entry in `times` is kept at `0.0` and is never read by the solvers.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub features: DMatrix<f64>,
    pub labels: Vec<i8>,
    pub times: Vec<f64>,
    pub time_present: Vec<bool>,
    pub feature_names: Option<Vec<String>>,
    pub sample_ids: Option<Vec<String>>,
}

impl Dataset {
    /// Builds a dataset with every conversion time present and validates it.
    pub fn new(features: DMatrix<f64>, labels: Vec<i8>, times: Vec<f64>) -> Result<Self> {
        let time_present = vec![true; times.len()];
        Dataset {
            features,
            labels,
            times,
            time_present,
            feature_names: None,
            sample_ids: None,
        }
        .validate()
    }

    pub fn n_features(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.features.ncols()
    }

    /// Checks every dataset invariant and hands the dataset back unchanged.
    pub fn validate(self) -> Result<Self> {
        let n = self.features.ncols();
        let d = self.features.nrows();
        for (what, len) in [
            ("labels", self.labels.len()),
            ("times", self.times.len()),
            ("time_present", self.time_present.len()),
        ] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: n,
                    got: len,
                });
            }
        }
        if let Some(names) = &self.feature_names {
            if names.len() != d {
                return Err(Error::DimensionMismatch {
                    what: "feature_names",
                    expected: d,
                    got: names.len(),
                });
            }
        }
        if let Some(ids) = &self.sample_ids {
            if ids.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "sample_ids",
                    expected: n,
                    got: ids.len(),
                });
            }
        }
        for (index, &label) in self.labels.iter().enumerate() {
            if label != -1 && label != 1 {
                return Err(Error::InvalidLabel {
                    index,
                    value: label as i64,
                });
            }
        }
        for j in 0..n {
            if let Some(i) = self.features.column(j).iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    what: "features",
                    index: j * d + i,
                });
            }
        }
        for (index, (&t, &present)) in self.times.iter().zip(&self.time_present).enumerate() {
            if present && !t.is_finite() {
                return Err(Error::NonFinite {
                    what: "times",
                    index,
                });
            }
        }
        let has_neg = self.labels.contains(&-1);
        let has_pos = self.labels.contains(&1);
        if !has_neg || !has_pos {
            return Err(Error::SingleClass {
                label: if has_pos { 1 } else { -1 },
            });
        }
        Ok(self)
    }

    /// Name of feature `i`, falling back to `f_{i+1}`.
    pub fn feature_name(&self, i: usize) -> String {
        match &self.feature_names {
            Some(names) => names[i].clone(),
            None => format!("f_{}", i + 1),
        }
    }

    /// Identifier of sample `j`, falling back to its 1-based position.
    pub fn sample_id(&self, j: usize) -> String {
        match &self.sample_ids {
            Some(ids) => ids[j].clone(),
            None => (j + 1).to_string(),
        }
    }

    pub fn class_count(&self, label: i8) -> usize {
        self.labels.iter().filter(|&&y| y == label).count()
    }

    /// Restricts the dataset to the given sample columns (in the given order).
    /// The result is not revalidated.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_columns(idx.iter()),
            labels: idx.iter().map(|&j| self.labels[j]).collect(),
            times: idx.iter().map(|&j| self.times[j]).collect(),
            time_present: idx.iter().map(|&j| self.time_present[j]).collect(),
            feature_names: self.feature_names.clone(),
            sample_ids: Some(idx.iter().map(|&j| self.sample_id(j)).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hyperparams {
    /// Strength of the shared row-sparsity penalty.
    pub lambda: f64,
    /// Samples retained per class by the hard selection step.
    pub k: usize,
    pub max_outer_iters: usize,
    pub max_newton_iters: usize,
    pub outer_tol: f64,
    /// Smoothing added to row norms when forming the reweighting diagonal.
    pub eps_row_norm: f64,
    pub gamma_max: f64,
    pub standardize: bool,
    /// When false, every sample keeps weight one in the classifier and every
    /// sample with a known time keeps weight one in the regressor.
    pub sample_selection_enabled: bool,
    /// Append a constant feature (not standardized, but penalized like the others).
    pub fit_intercept: bool,
    /// Draw the starting reweighting diagonal from `seed` instead of using the identity.
    pub random_init_d: bool,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            lambda: 1.0,
            k: 50,
            max_outer_iters: 100,
            max_newton_iters: 50,
            outer_tol: 1e-6,
            eps_row_norm: 1e-8,
            gamma_max: 1e8,
            standardize: true,
            sample_selection_enabled: true,
            fit_intercept: false,
            random_init_d: false,
            seed: 0,
        }
    }
}

impl Hyperparams {
    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidHyperparam(msg));
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be positive and finite, got {}", self.lambda));
        }
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if !(self.outer_tol > 0.0) {
            return bad(format!("outer_tol must be positive, got {}", self.outer_tol));
        }
        if !(self.eps_row_norm > 0.0) {
            return bad(format!("eps_row_norm must be positive, got {}", self.eps_row_norm));
        }
        if !(self.gamma_max > 0.0) {
            return bad(format!("gamma_max must be positive, got {}", self.gamma_max));
        }
        if self.max_newton_iters == 0 {
            return bad("max_newton_iters must be at least 1".into());
        }
        Ok(())
    }
}

/// Per-feature affine map applied before fitting and prediction.
#[derive(Clone, Debug, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

/// Columns whose spread falls below this are treated as constant.
const SCALE_FLOOR: f64 = 1e-12;

impl Standardizer {
    pub fn identity(d: usize) -> Self {
        Standardizer {
            mean: vec![0.0; d],
            scale: vec![1.0; d],
        }
    }

    /// Zero-mean, unit-variance (population) statistics per feature row.
    /// Constant features keep scale one, so they map to exactly zero.
    pub fn fit(features: &DMatrix<f64>) -> Self {
        let n = features.ncols() as f64;
        let mut mean = Vec::with_capacity(features.nrows());
        let mut scale = Vec::with_capacity(features.nrows());
        for row in features.row_iter() {
            let m = row.iter().sum::<f64>() / n;
            let var = row.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
            let sd = var.sqrt();
            mean.push(m);
            scale.push(if sd < SCALE_FLOOR { 1.0 } else { sd });
        }
        Standardizer { mean, scale }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_matrix(&self, features: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = features.clone();
        for (i, mut row) in out.row_iter_mut().enumerate() {
            let (m, s) = (self.mean[i], self.scale[i]);
            row.apply(|x| *x = (*x - m) / s);
        }
        out
    }

    pub fn transform_vector(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }
}

/// Indices of the samples retained in one class-wise selection.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SelectionMask {
    pub kept_negative: Vec<usize>,
    pub kept_positive: Vec<usize>,
}

impl SelectionMask {
    pub fn len(&self) -> usize {
        self.kept_negative.len() + self.kept_positive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// 0/1 weight vector of length `n` with ones at the kept indices.
    pub fn to_weights(&self, n: usize) -> Vec<f64> {
        let mut w = vec![0.0; n];
        for &i in self.kept_negative.iter().chain(&self.kept_positive) {
            w[i] = 1.0;
        }
        w
    }

    /// Mask built from a 0/1 weight vector.
    pub fn from_weights(weights: &[f64], labels: &[i8]) -> Self {
        let mut mask = SelectionMask::default();
        for (i, (&w, &y)) in weights.iter().zip(labels).enumerate() {
            if w != 0.0 {
                if y > 0 {
                    mask.kept_positive.push(i);
                } else {
                    mask.kept_negative.push(i);
                }
            }
        }
        mask
    }
}

/// A fitted joint model. `w` and `v` act on standardized features (plus a
/// trailing constant when `hyperparams.fit_intercept` is set).
#[derive(Clone, Debug, PartialEq)]
pub struct ModelState {
    pub w: DVector<f64>,
    pub v: DVector<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: f64,
    pub d_diag: DVector<f64>,
    pub objective_trace: Vec<f64>,
    pub standardizer: Standardizer,
    pub feature_names: Vec<String>,
    pub hyperparams: Hyperparams,
}

impl ModelState {
    /// Number of raw input features the model expects.
    pub fn n_inputs(&self) -> usize {
        self.standardizer.dim()
    }

    /// Maps a raw sample to the coefficient space.
    pub fn design_vector(&self, x: &[f64]) -> Result<DVector<f64>> {
        if x.len() != self.n_inputs() {
            return Err(Error::DimensionMismatch {
                what: "sample",
                expected: self.n_inputs(),
                got: x.len(),
            });
        }
        let mut z = self.standardizer.transform_vector(x);
        if self.hyperparams.fit_intercept {
            z.push(1.0);
        }
        Ok(DVector::from_vec(z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(labels: Vec<i8>) -> Dataset {
        Dataset {
            features: DMatrix::from_row_slice(1, 2, &[0.5, -1.0]),
            labels,
            times: vec![1.0, 2.0],
            time_present: vec![true, true],
            feature_names: None,
            sample_ids: None,
        }
    }

    #[test]
    fn minimal_dataset_accepted_unchanged() {
        let ds = tiny(vec![-1, 1]);
        let checked = ds.clone().validate().unwrap();
        assert_eq!(checked, ds);
        // idempotent
        assert_eq!(checked.clone().validate().unwrap(), checked);
    }

    #[test]
    fn zero_one_labels_rejected_at_index_zero() {
        match tiny(vec![0, 1]).validate() {
            Err(Error::InvalidLabel { index, value }) => {
                assert_eq!(index, 0);
                assert_eq!(value, 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_class_rejected() {
        assert!(matches!(
            tiny(vec![1, 1]).validate(),
            Err(Error::SingleClass { label: 1 })
        ));
    }

    #[test]
    fn dimension_and_finiteness_checks() {
        let mut ds = tiny(vec![-1, 1]);
        ds.times.push(3.0);
        assert!(matches!(
            ds.validate(),
            Err(Error::DimensionMismatch { what: "times", .. })
        ));

        let mut ds = tiny(vec![-1, 1]);
        ds.features[(0, 1)] = f64::NAN;
        assert!(matches!(
            ds.validate(),
            Err(Error::NonFinite { what: "features", index: 1 })
        ));

        // a missing time may hold anything
        let mut ds = tiny(vec![-1, 1]);
        ds.times[1] = f64::NAN;
        ds.time_present[1] = false;
        assert!(ds.validate().is_ok());
    }

    #[test]
    fn standardizer_maps_constant_rows_to_zero() {
        let x = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 7.0, 7.0, 7.0]);
        let s = Standardizer::fit(&x);
        let t = s.transform_matrix(&x);
        assert!(t.row(1).iter().all(|&v| v == 0.0));
        let m: f64 = t.row(0).iter().sum();
        assert!(m.abs() < 1e-15);
        let var: f64 = t.row(0).iter().map(|v| v * v).sum::<f64>() / 3.0;
        assert!((var - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mask_weights_round_trip() {
        let labels = [-1, 1, -1, 1, 1];
        let w = [1.0, 0.0, 1.0, 1.0, 0.0];
        let mask = SelectionMask::from_weights(&w, &labels);
        assert_eq!(mask.kept_negative, vec![0, 2]);
        assert_eq!(mask.kept_positive, vec![3]);
        assert_eq!(mask.to_weights(5), w.to_vec());
    }
}
