//! Sample-weighted logistic regression with a diagonal quadratic penalty,
//! solved by damped Newton iterations. This is the classifier update of the
//! alternating scheme.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::spd_solve;

/// Logistic function, evaluated without overflow for any finite argument.
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(u))`, stable for large `|u|`.
pub fn softplus(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

/// `h_w(x) = 1 / (1 + exp(-wᵀx))`.
pub fn sigmoid_score(w: &[f64], x: &[f64]) -> Result<f64> {
    if w.len() != x.len() {
        return Err(Error::DimensionMismatch {
            what: "sigmoid_score",
            expected: w.len(),
            got: x.len(),
        });
    }
    Ok(sigmoid(w.iter().zip(x).map(|(a, b)| a * b).sum()))
}

/// The classifier subproblem: `Σ αᵢ softplus(-yᵢ wᵀxᵢ) + λ Σⱼ Dⱼ wⱼ²`.
#[derive(Clone, Copy, Debug)]
pub struct LogisticSubproblem<'a> {
    pub features: &'a DMatrix<f64>,
    pub labels: &'a [i8],
    pub alpha: &'a [f64],
    pub d_diag: &'a DVector<f64>,
    pub lambda: f64,
}

/// Outcome of [`solve_w`].
#[derive(Clone, Debug)]
pub struct NewtonSolve {
    pub w: DVector<f64>,
    pub iterations: usize,
    /// Subproblem objective at the start and after each accepted step.
    pub objective_path: Vec<f64>,
    pub grad_norm: f64,
}

impl<'a> LogisticSubproblem<'a> {
    pub fn new(
        features: &'a DMatrix<f64>,
        labels: &'a [i8],
        alpha: &'a [f64],
        d_diag: &'a DVector<f64>,
        lambda: f64,
    ) -> Result<Self> {
        let (d, n) = features.shape();
        for (what, len) in [("labels", labels.len()), ("alpha", alpha.len())] {
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
        if let Some(i) = alpha.iter().position(|a| !(*a >= 0.0)) {
            return Err(Error::InvalidHyperparam(format!(
                "alpha[{i}] = {} is negative",
                alpha[i]
            )));
        }
        if let Some(i) = d_diag.iter().position(|v| !(*v > 0.0)) {
            return Err(Error::InvalidHyperparam(format!(
                "d_diag[{i}] = {} is not positive",
                d_diag[i]
            )));
        }
        Ok(LogisticSubproblem {
            features,
            labels,
            alpha,
            d_diag,
            lambda,
        })
    }

    fn check_dim(&self, w: &DVector<f64>) -> Result<()> {
        if w.len() != self.features.nrows() {
            return Err(Error::DimensionMismatch {
                what: "w",
                expected: self.features.nrows(),
                got: w.len(),
            });
        }
        Ok(())
    }

    /// Indices of samples with nonzero weight; zero-weight samples never enter
    /// any sum.
    fn active(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.alpha.len()).filter(|&i| self.alpha[i] != 0.0)
    }

    /// `Σ αᵢ softplus(-yᵢ wᵀxᵢ)`.
    pub fn weighted_loss(&self, w: &DVector<f64>) -> Result<f64> {
        self.check_dim(w)?;
        Ok(self
            .active()
            .map(|i| {
                let margin = f64::from(self.labels[i]) * self.features.column(i).dot(w);
                self.alpha[i] * softplus(-margin)
            })
            .sum())
    }

    pub fn penalty(&self, w: &DVector<f64>) -> f64 {
        self.lambda * self.d_diag.iter().zip(w.iter()).map(|(d, x)| d * x * x).sum::<f64>()
    }

    pub fn objective(&self, w: &DVector<f64>) -> Result<f64> {
        Ok(self.weighted_loss(w)? + self.penalty(w))
    }

    /// Gradient `a` and Hessian `B` of [`Self::objective`]:
    ///
    /// `a = Σ αᵢ (h(xᵢ) - (1+yᵢ)/2) xᵢ + 2λDw`,
    /// `B = Σ αᵢ h(xᵢ)(1-h(xᵢ)) xᵢxᵢᵀ + 2λD`.
    ///
    /// `B` is filled from its upper triangle, so it is exactly symmetric.
    pub fn grad_hess(&self, w: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
        self.check_dim(w)?;
        let d = w.len();
        let mut a = DVector::zeros(d);
        let mut b = DMatrix::zeros(d, d);
        for i in self.active() {
            let x = self.features.column(i);
            let h = sigmoid(x.dot(w));
            let target = if self.labels[i] > 0 { 1.0 } else { 0.0 };
            a.axpy(self.alpha[i] * (h - target), &x, 1.0);
            let c = self.alpha[i] * h * (1.0 - h);
            for col in 0..d {
                let s = c * x[col];
                if s == 0.0 {
                    continue;
                }
                for row in 0..=col {
                    b[(row, col)] += s * x[row];
                }
            }
        }
        for j in 0..d {
            a[j] += 2.0 * self.lambda * self.d_diag[j] * w[j];
            b[(j, j)] += 2.0 * self.lambda * self.d_diag[j];
        }
        for col in 0..d {
            for row in 0..col {
                b[(col, row)] = b[(row, col)];
            }
        }
        Ok((a, b))
    }
}

/// Relative gradient-norm target of the inner Newton loop.
const GRAD_TOL: f64 = 1e-6;
const MAX_HALVINGS: usize = 30;

/// Minimizes the subproblem from `w_init` with damped Newton steps
/// `w ← w - t·B⁻¹a`, halving `t` until the objective does not increase.
///
/// Stops when `‖a‖ ≤ 1e-6·max(1, ‖a_init‖)`, after `max_iters` steps, or when
/// thirty halvings fail to produce a non-increasing step (the current iterate
/// is then kept).
pub fn solve_w(
    sub: &LogisticSubproblem<'_>,
    w_init: &DVector<f64>,
    max_iters: usize,
) -> Result<NewtonSolve> {
    sub.check_dim(w_init)?;
    let mut w = w_init.clone();
    let mut obj = sub.objective(&w)?;
    let mut path = vec![obj];
    let (mut a, mut b) = sub.grad_hess(&w)?;
    let target = GRAD_TOL * a.norm().max(1.0);
    let mut iterations = 0;
    while iterations < max_iters && a.norm() > target {
        let step = spd_solve(&b, &a).ok_or(Error::LinearSolve("newton step"))?;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand = &w - t * &step;
            let cand_obj = sub.objective(&cand)?;
            if cand_obj <= obj {
                accepted = Some((cand, cand_obj));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, cand_obj)) = accepted else {
            break;
        };
        iterations += 1;
        let stalled = cand == w;
        w = cand;
        obj = cand_obj;
        path.push(obj);
        if stalled {
            break;
        }
        (a, b) = sub.grad_hess(&w)?;
    }
    Ok(NewtonSolve {
        grad_norm: a.norm(),
        w,
        iterations,
        objective_path: path,
    })
}
