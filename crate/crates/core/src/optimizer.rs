//! The alternating solver for the joint objective
//!
//! ```text
//! J = Σ αᵢ softplus(-yᵢ wᵀxᵢ) + sqrt(Σ βᵢ (vᵀxᵢ - zᵢ)²) + λ Σⱼ ‖(wⱼ, vⱼ)‖₂
//! ```
//!
//! One sweep updates, in order: `w` (damped Newton on the α-weighted logistic
//! loss plus `λ wᵀDw`), `v` (closed-form ridge with penalty `(λ/γ) vᵀDv`),
//! `α` and `β` (per-class top-k on the current losses), then `D` and `γ` from
//! the new iterate. Once `D` and `γ` are derived from the iterate, each sweep
//! minimizes a majorizer of `J` that is tight at the current point, so the
//! recorded objective does not increase.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Dataset, Hyperparams, ModelState, SelectionMask, Standardizer};
use crate::error::{Error, Result};
use crate::logistic::{sigmoid, softplus, solve_w, LogisticSubproblem};
use crate::ridge::{build_weighted_system, regression_losses, solve_v, RidgeSubproblem};
use crate::selector::{classification_losses, per_class_topk, ClasswiseLosses};

pub const INTERCEPT_NAME: &str = "(intercept)";

/// Row norms below this count as "not selected".
pub const SELECTED_ROW_NORM: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct FitReport {
    pub model: ModelState,
    /// Sweeps run after the warm-start sweep.
    pub iterations: usize,
    pub converged: bool,
    pub warnings: Vec<String>,
    /// Joint objective after the warm-start sweep, then after every sweep.
    pub objective_trace: Vec<f64>,
    /// `(α mask, β mask)` after each sweep, aligned with `objective_trace`.
    pub selection_history: Vec<(SelectionMask, SelectionMask)>,
    /// Joint objective at the all-zero starting point (`α` all ones).
    pub initial_objective: f64,
}

/// `Dᵢ = 1 / (2·(‖(wᵢ, vᵢ)‖₂ + eps))`.
pub fn update_d(w: &DVector<f64>, v: &DVector<f64>, eps: f64) -> DVector<f64> {
    DVector::from_iterator(
        w.len(),
        w.iter().zip(v.iter()).map(|(a, b)| 1.0 / (2.0 * (a.hypot(*b) + eps))),
    )
}

fn weighted_residual_norm(v: &DVector<f64>, data: &Dataset, beta: &[f64]) -> f64 {
    data.features
        .column_iter()
        .enumerate()
        .filter(|&(i, _)| beta[i] != 0.0)
        .map(|(i, x)| {
            let r = x.dot(v) - data.times[i];
            beta[i] * r * r
        })
        .sum::<f64>()
        .sqrt()
}

/// Task weight `γ = 1 / (2·sqrt(Σ βᵢ (vᵀxᵢ - zᵢ)²))`, clamped to `gamma_max`
/// (which is also returned for an exact fit).
pub fn update_gamma(v: &DVector<f64>, data: &Dataset, beta: &[f64], gamma_max: f64) -> f64 {
    let r = weighted_residual_norm(v, data, beta);
    if r == 0.0 {
        gamma_max
    } else {
        (1.0 / (2.0 * r)).min(gamma_max)
    }
}

/// Exact joint objective (no smoothing in the row-norm term).
pub fn joint_objective(
    w: &DVector<f64>,
    v: &DVector<f64>,
    alpha: &[f64],
    beta: &[f64],
    data: &Dataset,
    lambda: f64,
) -> f64 {
    let logistic: f64 = data
        .features
        .column_iter()
        .enumerate()
        .filter(|&(i, _)| alpha[i] != 0.0)
        .map(|(i, x)| alpha[i] * softplus(-f64::from(data.labels[i]) * x.dot(w)))
        .sum();
    let regression = weighted_residual_norm(v, data, beta);
    let rows: f64 = w.iter().zip(v.iter()).map(|(a, b)| a.hypot(*b)).sum();
    logistic + regression + lambda * rows
}

/// Applies the model's input transform to a whole dataset: standardization,
/// then the constant row when an intercept is fitted.
fn design(data: &Dataset, standardizer: &Standardizer, intercept: bool) -> Dataset {
    let mut features = standardizer.transform_matrix(&data.features);
    if intercept {
        let d = features.nrows();
        features = features.insert_row(d, 1.0);
    }
    Dataset {
        features,
        labels: data.labels.clone(),
        times: data.times.clone(),
        time_present: data.time_present.clone(),
        feature_names: None,
        sample_ids: None,
    }
}

struct Iterate {
    w: DVector<f64>,
    v: DVector<f64>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    d_diag: DVector<f64>,
    gamma: f64,
}

/// Fits the joint model. The dataset must already be validated.
pub fn fit(dataset: &Dataset, hp: &Hyperparams) -> Result<FitReport> {
    hp.validate()?;
    let standardizer = if hp.standardize {
        Standardizer::fit(&dataset.features)
    } else {
        Standardizer::identity(dataset.n_features())
    };
    let data = design(dataset, &standardizer, hp.fit_intercept);
    let dim = data.n_features();
    let n = data.n_samples();
    let eligible_beta: Vec<f64> = data
        .time_present
        .iter()
        .map(|&p| if p { 1.0 } else { 0.0 })
        .collect();

    let d_diag = if hp.random_init_d {
        let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
        DVector::from_fn(dim, |_, _| rng.random_range(0.5..1.5))
    } else {
        DVector::from_element(dim, 1.0)
    };
    let mut it = Iterate {
        w: DVector::zeros(dim),
        v: DVector::zeros(dim),
        alpha: vec![1.0; n],
        beta: eligible_beta.clone(),
        d_diag,
        gamma: 1.0,
    };
    let initial_objective = joint_objective(&it.w, &it.v, &it.alpha, &it.beta, &data, hp.lambda);

    let mut warnings: Vec<String> = Vec::new();
    let mut sweep = |it: &mut Iterate| -> Result<(f64, SelectionMask, SelectionMask)> {
        let sub = LogisticSubproblem::new(&data.features, &data.labels, &it.alpha, &it.d_diag, hp.lambda)?;
        it.w = solve_w(&sub, &it.w, hp.max_newton_iters)?.w;

        let ridge = RidgeSubproblem::from_dataset(&data, &it.beta, &it.d_diag, hp.lambda, it.gamma)?;
        let (g, m) = build_weighted_system(&ridge);
        it.v = solve_v(&g, &m, &it.d_diag, hp.lambda, it.gamma)?;

        if hp.sample_selection_enabled {
            let l1 = classification_losses(&it.w, &data);
            let sel_a = per_class_topk(ClasswiseLosses { losses: &l1, labels: &data.labels }, hp.k);
            let l2 = regression_losses(&it.v, &data);
            let sel_b = per_class_topk(ClasswiseLosses { losses: &l2, labels: &data.labels }, hp.k);
            for (task, sel) in [("classification", &sel_a), ("regression", &sel_b)] {
                for short in &sel.warnings {
                    let msg = format!("{task} selection: {short}");
                    if !warnings.contains(&msg) {
                        warnings.push(msg);
                    }
                }
            }
            it.alpha = sel_a.weights;
            it.beta = sel_b.weights;
        }

        it.d_diag = update_d(&it.w, &it.v, hp.eps_row_norm);
        it.gamma = update_gamma(&it.v, &data, &it.beta, hp.gamma_max);
        let obj = joint_objective(&it.w, &it.v, &it.alpha, &it.beta, &data, hp.lambda);
        Ok((
            obj,
            SelectionMask::from_weights(&it.alpha, &data.labels),
            SelectionMask::from_weights(&it.beta, &data.labels),
        ))
    };

    // Warm start: the first sweep runs from w = v = 0 with D = I and γ = 1,
    // which do not correspond to that point, so it is not a descent step.
    let (obj, ma, mb) = sweep(&mut it).map_err(|e| Error::Solver {
        iteration: 0,
        source: Box::new(e),
    })?;
    let mut trace = vec![obj];
    let mut history = vec![(ma, mb)];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < hp.max_outer_iters {
        let (obj, ma, mb) = sweep(&mut it).map_err(|e| Error::Solver {
            iteration: iterations + 1,
            source: Box::new(e),
        })?;
        iterations += 1;
        let prev = *trace.last().unwrap();
        trace.push(obj);
        history.push((ma, mb));
        if (prev - obj).abs() / prev.abs().max(1.0) < hp.outer_tol {
            converged = true;
            break;
        }
    }

    let mut feature_names: Vec<String> = (0..dataset.n_features()).map(|i| dataset.feature_name(i)).collect();
    if hp.fit_intercept {
        feature_names.push(INTERCEPT_NAME.to_string());
    }
    let model = ModelState {
        w: it.w,
        v: it.v,
        alpha: it.alpha,
        beta: it.beta,
        gamma: it.gamma,
        d_diag: it.d_diag,
        objective_trace: trace.clone(),
        standardizer,
        feature_names,
        hyperparams: hp.clone(),
    };
    Ok(FitReport {
        model,
        iterations,
        converged,
        warnings,
        objective_trace: trace,
        selection_history: history,
        initial_objective,
    })
}

/// Output of the model for one sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub label: i8,
    pub score: f64,
    pub time: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRank {
    pub index: usize,
    pub name: String,
    pub norm: f64,
}

impl ModelState {
    /// Label and probability `h_w(x)` for a raw (unstandardized) sample;
    /// the label is +1 iff the score is at least 0.5.
    pub fn predict_class(&self, x: &[f64]) -> Result<(i8, f64)> {
        let z = self.design_vector(x)?;
        let score = sigmoid(self.w.dot(&z));
        Ok((if score >= 0.5 { 1 } else { -1 }, score))
    }

    /// Linear conversion-time estimate `vᵀx` in days, for a raw sample.
    pub fn predict_time(&self, x: &[f64]) -> Result<f64> {
        let z = self.design_vector(x)?;
        Ok(self.v.dot(&z))
    }

    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<Prediction>> {
        if data.n_features() != self.n_inputs() {
            return Err(Error::DimensionMismatch {
                what: "dataset features",
                expected: self.n_inputs(),
                got: data.n_features(),
            });
        }
        let x = design(data, &self.standardizer, self.hyperparams.fit_intercept);
        Ok(x.features
            .column_iter()
            .map(|col| {
                let score = sigmoid(col.dot(&self.w));
                Prediction {
                    label: if score >= 0.5 { 1 } else { -1 },
                    score,
                    time: col.dot(&self.v),
                }
            })
            .collect())
    }

    /// Norm of each coefficient row `(wᵢ, vᵢ)`.
    pub fn row_norms(&self) -> Vec<f64> {
        self.w.iter().zip(self.v.iter()).map(|(a, b)| a.hypot(*b)).collect()
    }

    /// Features ordered by row norm, largest first; ties keep index order.
    pub fn feature_ranking(&self) -> Vec<FeatureRank> {
        let mut ranks: Vec<FeatureRank> = self
            .row_norms()
            .into_iter()
            .enumerate()
            .map(|(index, norm)| FeatureRank {
                index,
                name: self
                    .feature_names
                    .get(index)
                    .cloned()
                    .unwrap_or_else(|| format!("f_{}", index + 1)),
                norm,
            })
            .collect();
        ranks.sort_by(|a, b| b.norm.total_cmp(&a.norm));
        ranks
    }

    /// Indices of features whose row norm exceeds [`SELECTED_ROW_NORM`],
    /// excluding the intercept.
    pub fn selected_features(&self) -> Vec<usize> {
        self.row_norms()
            .into_iter()
            .take(self.n_inputs())
            .enumerate()
            .filter(|&(_, r)| r > SELECTED_ROW_NORM)
            .map(|(i, _)| i)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn toy() -> Dataset {
        Dataset {
            features: DMatrix::from_row_slice(
                2,
                6,
                &[1.0, 2.0, -0.5, 3.0, -2.0, 0.1, 0.5, -1.0, 2.0, 1.0, -0.3, -2.0],
            ),
            labels: vec![1, 1, -1, 1, -1, -1],
            times: vec![3.0, 4.0, 0.0, 5.0, 0.0, 0.0],
            time_present: vec![true, true, false, true, false, false],
            feature_names: None,
            sample_ids: None,
        }
    }

    #[test]
    fn update_d_examples() {
        let d = update_d(&DVector::from_element(1, 3.0), &DVector::from_element(1, 4.0), 1e-12);
        assert!((d[0] - 0.1).abs() < 1e-12);
        let d = update_d(&DVector::zeros(3), &DVector::zeros(3), 1e-8);
        assert!(d.iter().all(|&x| x == 5e7));
    }

    #[test]
    fn update_gamma_examples() {
        let ds = Dataset {
            features: DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            labels: vec![1, -1],
            times: vec![0.5, 10.0],
            time_present: vec![true, true],
            feature_names: None,
            sample_ids: None,
        };
        let v = DVector::zeros(1);
        // residual sum of squares 0.25 over the selected sample
        assert_eq!(update_gamma(&v, &ds, &[1.0, 0.0], 1e8), 1.0);
        let exact = DVector::from_element(1, 0.5);
        assert_eq!(update_gamma(&exact, &ds, &[1.0, 0.0], 1e8), 1e8);
        let ds5 = Dataset { times: vec![5.0, 0.0], ..ds };
        assert!((update_gamma(&v, &ds5, &[1.0, 0.0], 1e8) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn joint_objective_examples() {
        let ds = toy();
        let zero = DVector::zeros(2);
        let j = joint_objective(&zero, &zero, &[1.0; 6], &[0.0; 6], &ds, 1.0);
        assert!((j - 6.0 * std::f64::consts::LN_2).abs() < 1e-12);

        let mut ds2 = toy();
        ds2.times = vec![2.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        ds2.time_present = vec![true; 6];
        let j2 = joint_objective(&zero, &zero, &[1.0; 6], &[1.0; 6], &ds2, 1.0);
        assert!((j2 - j - 2.0).abs() < 1e-12);

        let w = DVector::from_vec(vec![3.0, 0.0]);
        let v = DVector::from_vec(vec![4.0, 0.0]);
        assert_eq!(joint_objective(&w, &v, &[0.0; 6], &[0.0; 6], &ds, 10.0), 50.0);
    }

    #[test]
    fn full_selection_when_k_matches_class_sizes() {
        let mut ds = toy();
        ds.time_present = vec![true; 6];
        ds.times = vec![3.0, 4.0, 1.0, 5.0, 2.0, 1.5];
        let hp = Hyperparams { k: 3, lambda: 0.1, ..Default::default() };
        let rep = fit(&ds, &hp).unwrap();
        assert!(rep.model.alpha.iter().all(|&a| a == 1.0));
        assert!(rep.model.beta.iter().all(|&b| b == 1.0));
    }

    #[test]
    fn predictions_and_ranking() {
        let ds = toy();
        let mut model = fit(&ds, &Hyperparams { lambda: 0.1, standardize: false, ..Default::default() })
            .unwrap()
            .model;
        model.w = DVector::zeros(2);
        model.v = DVector::zeros(2);
        assert_eq!(model.predict_class(&[1.0, 2.0]).unwrap(), (1, 0.5));
        assert_eq!(model.predict_time(&[1.0, 2.0]).unwrap(), 0.0);
        let r = model.feature_ranking();
        assert_eq!((r[0].index, r[1].index), (0, 1));

        model.w = DVector::from_vec(vec![0.0, 3.0]);
        model.v = DVector::from_vec(vec![0.0, 4.0]);
        let r = model.feature_ranking();
        assert_eq!(r[0].index, 1);
        assert_eq!(r[0].norm, 5.0);
        assert_eq!(r[1].norm, 0.0);

        model.w = DVector::from_vec(vec![10.0, 0.0]);
        let (label, score) = model.predict_class(&[1.0, 0.0]).unwrap();
        assert_eq!(label, 1);
        assert!((score - 0.99995).abs() < 1e-5);
        assert_eq!(model.predict_class(&[-1.0, 0.0]).unwrap().0, -1);

        model.v = DVector::from_vec(vec![2.0, 0.0]);
        assert_eq!(model.predict_time(&[3.0, 7.0]).unwrap(), 6.0);
        assert!(model.predict_time(&[3.0]).is_err());
    }
}
