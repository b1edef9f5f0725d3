//! Classification and regression metrics. Undefined values (a missing class,
//! zero variance, no samples) are `None`, never a silent zero.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Confusion {
    pub accuracy: f64,
    /// True-positive rate over the +1 class.
    pub sensitivity: Option<f64>,
    /// True-negative rate over the -1 class.
    pub specificity: Option<f64>,
}

pub fn confusion_metrics(y_true: &[i8], y_pred: &[i8]) -> Option<Confusion> {
    assert_eq!(y_true.len(), y_pred.len(), "label vectors differ in length");
    if y_true.is_empty() {
        return None;
    }
    let (mut tp, mut tn, mut pos, mut neg) = (0usize, 0usize, 0usize, 0usize);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t > 0 {
            pos += 1;
            tp += usize::from(p > 0);
        } else {
            neg += 1;
            tn += usize::from(p <= 0);
        }
    }
    Some(Confusion {
        accuracy: (tp + tn) as f64 / y_true.len() as f64,
        sensitivity: (pos > 0).then(|| tp as f64 / pos as f64),
        specificity: (neg > 0).then(|| tn as f64 / neg as f64),
    })
}

/// Mann–Whitney AUC: the fraction of (positive, negative) pairs in which the
/// positive scores higher, ties counting one half.
///
/// Computed from a single sort; the numerator is accumulated in integer
/// half-units so the result equals explicit pair counting exactly.
pub fn auc(y_true: &[i8], scores: &[f64]) -> Option<f64> {
    assert_eq!(y_true.len(), scores.len(), "labels/scores differ in length");
    let n_pos = y_true.iter().filter(|&&y| y > 0).count() as u64;
    let n_neg = y_true.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut twice_wins: u64 = 0;
    let mut neg_below: u64 = 0;
    let mut start = 0;
    while start < order.len() {
        let s = scores[order[start]];
        let mut end = start;
        let (mut p, mut q) = (0u64, 0u64);
        while end < order.len() && scores[order[end]] == s {
            if y_true[order[end]] > 0 {
                p += 1;
            } else {
                q += 1;
            }
            end += 1;
        }
        twice_wins += 2 * p * neg_below + p * q;
        neg_below += q;
        start = end;
    }
    Some(twice_wins as f64 / (2 * n_pos * n_neg) as f64)
}

/// Pearson correlation, clamped to [-1, 1]. `None` for fewer than two
/// samples or a constant input.
pub fn pearson_cc(z_true: &[f64], z_pred: &[f64]) -> Option<f64> {
    assert_eq!(z_true.len(), z_pred.len(), "vectors differ in length");
    let n = z_true.len();
    if n < 2 {
        return None;
    }
    let mx = z_true.iter().sum::<f64>() / n as f64;
    let my = z_pred.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in z_true.iter().zip(z_pred) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn rmse(z_true: &[f64], z_pred: &[f64]) -> Option<f64> {
    assert_eq!(z_true.len(), z_pred.len(), "vectors differ in length");
    if z_true.is_empty() {
        return None;
    }
    let mse = z_true
        .iter()
        .zip(z_pred)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / z_true.len() as f64;
    Some(mse.sqrt())
}

pub fn mean_abs_error(z_true: &[f64], z_pred: &[f64]) -> Option<f64> {
    if z_true.is_empty() {
        return None;
    }
    Some(z_true.iter().zip(z_pred).map(|(a, b)| (a - b).abs()).sum::<f64>() / z_true.len() as f64)
}

/// Mean and sample standard deviation; the deviation is zero for one value.
pub fn mean_sd(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Some((m, 0.0));
    }
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
    Some((m, var.sqrt()))
}
