//! Per-class hard sample selection: within each class keep the `k` samples
//! with the smallest current loss, weight them one and drop the rest.

use nalgebra::DVector;

use crate::dataset::{Dataset, SelectionMask};
use crate::logistic::softplus;

/// Per-sample losses paired with the class labels they are grouped by.
/// Infinite (or NaN) losses mark samples that must not be selected.
#[derive(Clone, Copy, Debug)]
pub struct ClasswiseLosses<'a> {
    pub losses: &'a [f64],
    pub labels: &'a [i8],
}

/// A class had fewer selectable samples than requested.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShortClass {
    pub label: i8,
    pub requested: usize,
    pub available: usize,
}

impl std::fmt::Display for ShortClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "class {:+}: requested {} samples, only {} selectable",
            self.label, self.requested, self.available
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub weights: Vec<f64>,
    pub mask: SelectionMask,
    pub warnings: Vec<ShortClass>,
}

/// Keeps, per class, the `min(k, selectable)` smallest-loss samples.
/// Ties go to the lower original index.
pub fn per_class_topk(cl: ClasswiseLosses<'_>, k: usize) -> Selection {
    assert_eq!(cl.losses.len(), cl.labels.len(), "losses/labels length");
    let mut mask = SelectionMask::default();
    let mut warnings = Vec::new();
    for label in [-1i8, 1] {
        let mut idx: Vec<usize> = (0..cl.labels.len())
            .filter(|&i| cl.labels[i] == label && cl.losses[i].is_finite())
            .collect();
        // stable: equal losses keep index order
        idx.sort_by(|&a, &b| cl.losses[a].total_cmp(&cl.losses[b]));
        if idx.len() < k {
            warnings.push(ShortClass {
                label,
                requested: k,
                available: idx.len(),
            });
        }
        idx.truncate(k);
        idx.sort_unstable();
        if label < 0 {
            mask.kept_negative = idx;
        } else {
            mask.kept_positive = idx;
        }
    }
    Selection {
        weights: mask.to_weights(cl.labels.len()),
        mask,
        warnings,
    }
}

/// Unweighted logistic loss `softplus(-yᵢ wᵀxᵢ)` per sample.
pub fn classification_losses(w: &DVector<f64>, data: &Dataset) -> Vec<f64> {
    data.features
        .column_iter()
        .zip(&data.labels)
        .map(|(x, &y)| softplus(-f64::from(y) * x.dot(w)))
        .collect()
}
