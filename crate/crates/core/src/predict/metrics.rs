//! Evaluation metrics for the prediction models.

use crate::error::{Error, Result};

/// F1 at the 0.5 threshold plus average precision over the full score
/// ranking. Errors when the truth contains no positives.
pub fn evaluate_classification(scores: &[f64], truth: &[bool]) -> Result<(f64, f64)> {
    if scores.len() != truth.len() {
        return Err(Error::InvalidInput("length mismatch".into()));
    }
    let positives = truth.iter().filter(|&&t| t).count();
    if positives == 0 {
        return Err(Error::NotComputable(
            "no positive labels; F1 and average precision undefined".into(),
        ));
    }

    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for (&score, &t) in scores.iter().zip(truth) {
        let predicted = score >= 0.5;
        match (predicted, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let f1 = if 2 * tp + fp + fn_ == 0 {
        0.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
    };

    // Average precision: walk the ranking from the highest score and sum
    // precision at every recall step. Ties break by row order.
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
    let mut seen_positives = 0usize;
    let mut ap = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        if truth[i] {
            seen_positives += 1;
            let precision = seen_positives as f64 / (rank + 1) as f64;
            ap += precision / positives as f64;
        }
    }

    Ok((f1, ap))
}

/// Mean squared error plus adjusted R² for `k` features. Needs
/// n > k + 1.
pub fn evaluate_regression(predicted: &[f64], truth: &[f64], k: usize) -> Result<(f64, f64)> {
    if predicted.len() != truth.len() {
        return Err(Error::InvalidInput("length mismatch".into()));
    }
    let n = truth.len();
    if n <= k + 1 {
        return Err(Error::InvalidInput(format!(
            "adjusted R² needs n > k + 1 (n = {n}, k = {k})"
        )));
    }
    let nf = n as f64;
    let mean = truth.iter().sum::<f64>() / nf;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (&p, &t) in predicted.iter().zip(truth) {
        ss_res += (t - p) * (t - p);
        ss_tot += (t - mean) * (t - mean);
    }
    let mse = ss_res / nf;
    if ss_tot <= 0.0 {
        if ss_res < 1e-12 {
            return Ok((0.0, 1.0));
        }
        return Err(Error::NotComputable("constant truth".into()));
    }
    let r2 = 1.0 - ss_res / ss_tot;
    let adjusted = 1.0 - (1.0 - r2) * (nf - 1.0) / (nf - k as f64 - 1.0);
    Ok((mse, adjusted))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let (f1, ap) = evaluate_classification(&[0.9, 0.1, 0.8], &[true, false, true]).unwrap();
        assert_eq!(f1, 1.0);
        assert_eq!(ap, 1.0);
        let (mse, r2) = evaluate_regression(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], 1).unwrap();
        assert_eq!(mse, 0.0);
        assert_eq!(r2, 1.0);
    }

    #[test]
    fn all_wrong_f1_is_zero() {
        let (f1, _) = evaluate_classification(&[0.9, 0.1], &[false, true]).unwrap();
        assert_eq!(f1, 0.0);
    }

    #[test]
    fn average_precision_hand_walk() {
        let (_, ap) = evaluate_classification(&[0.9, 0.8, 0.1], &[true, false, true]).unwrap();
        assert!((ap - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn no_positives_flagged() {
        assert!(evaluate_classification(&[0.9], &[false]).is_err());
    }

    #[test]
    fn mean_prediction_nonpositive_adjusted_r2() {
        let truth = [1.0, 2.0, 3.0, 4.0];
        let mean = [2.5; 4];
        let (_, adj) = evaluate_regression(&mean, &truth, 1).unwrap();
        assert!(adj <= 0.0);
    }

    #[test]
    fn regression_hand_example() {
        let (mse, _) = evaluate_regression(&[1.0, 2.0, 4.0], &[1.0, 2.0, 3.0], 1).unwrap();
        assert!((mse - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn small_n_errors() {
        assert!(evaluate_regression(&[1.0, 2.0], &[1.0, 2.0], 1).is_err());
    }
}
