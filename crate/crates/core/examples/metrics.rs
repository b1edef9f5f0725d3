//! The evaluation metrics on a hand-made prediction set.

use jointsel::metrics::{auc, confusion_metrics, mean_abs_error, pearson_cc, rmse};

fn main() {
    let y = [1, 1, 1, -1, -1, -1, -1, -1];
    let score = [0.9, 0.4, 0.7, 0.2, 0.6, 0.1, 0.3, 0.4];
    let pred: Vec<i8> = score.iter().map(|&s| if s >= 0.5 { 1 } else { -1 }).collect();

    let c = confusion_metrics(&y, &pred).expect("non-empty");
    println!("accuracy    {:.3}", c.accuracy);
    println!("sensitivity {:?}", c.sensitivity);
    println!("specificity {:?}", c.specificity);
    println!("AUC         {:?}", auc(&y, &score));

    let days = [3.0, 7.5, 0.0];
    let est = [4.1, 6.0, 1.2];
    println!("CC          {:?}", pearson_cc(&days, &est));
    println!("RMSE        {:?}", rmse(&days, &est));
    println!("MAE         {:?}", mean_abs_error(&days, &est));
    // a single class leaves AUC undefined
    println!("AUC (one class) {:?}", auc(&[1, 1], &[0.3, 0.8]));
}
