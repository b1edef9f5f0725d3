use nalgebra::{DMatrix, DVector};

/// Solves `A x = b` for symmetric positive-definite `A` by Cholesky. If the
/// factorization fails, retries once with `1e-10·(tr(A)/d)·I` added.
pub(crate) fn spd_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let finite = |x: DVector<f64>| x.iter().all(|v| v.is_finite()).then_some(x);
    if let Some(chol) = a.clone().cholesky() {
        if let Some(x) = finite(chol.solve(b)) {
            return Some(x);
        }
    }
    let d = a.nrows();
    if d == 0 {
        return Some(DVector::zeros(0));
    }
    let jitter = 1e-10 * a.trace() / d as f64;
    if !(jitter > 0.0 && jitter.is_finite()) {
        return None;
    }
    let mut shifted = a.clone();
    for i in 0..d {
        shifted[(i, i)] += jitter;
    }
    shifted.cholesky().and_then(|c| finite(c.solve(b)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_spd_and_rejects_indefinite() {
        let a = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let b = DVector::from_vec(vec![1.0, 2.0]);
        let x = spd_solve(&a, &b).unwrap();
        assert!((&a * &x - &b).norm() < 1e-14);

        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(spd_solve(&bad, &b).is_none());
    }

    #[test]
    fn jitter_rescues_semidefinite() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 1.0]);
        assert!(spd_solve(&a, &b).is_some());
    }
}
