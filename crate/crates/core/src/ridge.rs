//! Closed-form regressor update: the β-weighted, D-penalized least-squares
//! subproblem `Σ βᵢ (vᵀxᵢ - zᵢ)² + (λ/γ) vᵀDv`.

use nalgebra::{DMatrix, DVector};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::spd_solve;

#[derive(Clone, Copy, Debug)]
pub struct RidgeSubproblem<'a> {
    pub features: &'a DMatrix<f64>,
    pub times: &'a [f64],
    pub time_present: &'a [bool],
    pub beta: &'a [f64],
    pub d_diag: &'a DVector<f64>,
    pub lambda: f64,
    pub gamma: f64,
}

impl<'a> RidgeSubproblem<'a> {
    /// Validates the subproblem. `beta` must be 0/1-valued and zero wherever
    /// the time is missing: the weighted system below squares the weights, so
    /// any other value would silently change the objective.
    pub fn new(
        features: &'a DMatrix<f64>,
        times: &'a [f64],
        time_present: &'a [bool],
        beta: &'a [f64],
        d_diag: &'a DVector<f64>,
        lambda: f64,
        gamma: f64,
    ) -> Result<Self> {
        let (d, n) = features.shape();
        for (what, len) in [
            ("times", times.len()),
            ("time_present", time_present.len()),
            ("beta", beta.len()),
        ] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: n,
                    got: len,
                });
            }
        }
        if d_diag.len() != d {
            return Err(Error::DimensionMismatch {
                what: "d_diag",
                expected: d,
                got: d_diag.len(),
            });
        }
        for (index, &b) in beta.iter().enumerate() {
            if b != 0.0 && b != 1.0 {
                return Err(Error::NonBinaryWeight { index, value: b });
            }
            if b != 0.0 && !time_present[index] {
                return Err(Error::InvalidHyperparam(format!(
                    "beta[{index}] selects a sample without a conversion time"
                )));
            }
        }
        if !(gamma > 0.0) {
            return Err(Error::InvalidHyperparam(format!("gamma must be positive, got {gamma}")));
        }
        Ok(RidgeSubproblem {
            features,
            times,
            time_present,
            beta,
            d_diag,
            lambda,
            gamma,
        })
    }

    pub fn from_dataset(
        data: &'a Dataset,
        beta: &'a [f64],
        d_diag: &'a DVector<f64>,
        lambda: f64,
        gamma: f64,
    ) -> Result<Self> {
        Self::new(
            &data.features,
            &data.times,
            &data.time_present,
            beta,
            d_diag,
            lambda,
            gamma,
        )
    }
}

/// `G = [β₁x₁, …, βₙxₙ]` and `mᵢ = βᵢzᵢ` (zero where the time is missing).
pub fn build_weighted_system(sub: &RidgeSubproblem<'_>) -> (DMatrix<f64>, DVector<f64>) {
    let mut g = sub.features.clone();
    let mut m = DVector::zeros(sub.beta.len());
    for (i, mut col) in g.column_iter_mut().enumerate() {
        let b = sub.beta[i];
        col *= b;
        if sub.time_present[i] {
            m[i] = b * sub.times[i];
        }
    }
    (g, m)
}

/// `v = (GGᵀ + (λ/γ)D)⁻¹ G m`.
pub fn solve_v(
    g: &DMatrix<f64>,
    m: &DVector<f64>,
    d_diag: &DVector<f64>,
    lambda: f64,
    gamma: f64,
) -> Result<DVector<f64>> {
    let d = g.nrows();
    if m.len() != g.ncols() {
        return Err(Error::DimensionMismatch {
            what: "m",
            expected: g.ncols(),
            got: m.len(),
        });
    }
    if d_diag.len() != d {
        return Err(Error::DimensionMismatch {
            what: "d_diag",
            expected: d,
            got: d_diag.len(),
        });
    }
    let ratio = lambda / gamma;
    let mut a = g * g.transpose();
    for col in 0..d {
        for row in 0..col {
            a[(col, row)] = a[(row, col)];
        }
        a[(col, col)] += ratio * d_diag[col];
    }
    let rhs = g * m;
    spd_solve(&a, &rhs).ok_or(Error::LinearSolve("ridge update"))
}

/// Per-sample squared residual `(vᵀxᵢ - zᵢ)²`; `+∞` where the time is missing,
/// so those samples sort last in selection.
pub fn regression_losses(v: &DVector<f64>, data: &Dataset) -> Vec<f64> {
    data.features
        .column_iter()
        .enumerate()
        .map(|(i, x)| {
            if data.time_present[i] {
                let r = x.dot(v) - data.times[i];
                r * r
            } else {
                f64::INFINITY
            }
        })
        .collect()
}
