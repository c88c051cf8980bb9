//! One-vs-rest linear soft-margin classifier over motion functionals,
//! trained by deterministic full-batch subgradient descent.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::Emotion;
use crate::error::Error;
use crate::matrix::Matrix;
use crate::num;
use crate::Result;

/// Subgradient iterations per (class, C) fit.
const SVM_ITERS: usize = 400;

/// Per-class evaluation counts and derived metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    /// True positives.
    pub tp: usize,
    /// False positives.
    pub fp: usize,
    /// False negatives.
    pub fn_: usize,
    /// Precision (0 when undefined).
    pub precision: f64,
    /// Recall (0 when undefined).
    pub recall: f64,
    /// F1 = 2 pr / (p + r), 0 when undefined.
    pub f1: f64,
}

/// Macro-averaged F1 over `classes`, treating multiclass predictions
/// one-vs-rest per class.
pub fn macro_f1(predictions: &[Emotion], labels: &[Emotion], classes: &[Emotion]) -> f64 {
    assert_eq!(predictions.len(), labels.len());
    let mut total = 0.0;
    for &c in classes {
        let m = class_metrics(predictions, labels, c);
        total += m.f1;
    }
    total / classes.len() as f64
}

/// Overall accuracy plus macro-averaged precision and recall.
pub fn class_metrics_all(
    predictions: &[Emotion],
    labels: &[Emotion],
    classes: &[Emotion],
) -> (f64, f64, f64) {
    assert_eq!(predictions.len(), labels.len());
    let hits = predictions
        .iter()
        .zip(labels.iter())
        .filter(|(p, l)| p == l)
        .count();
    let accuracy = hits as f64 / labels.len().max(1) as f64;
    let mut precision = 0.0;
    let mut recall = 0.0;
    for &c in classes {
        let m = class_metrics(predictions, labels, c);
        precision += m.precision;
        recall += m.recall;
    }
    (
        accuracy,
        precision / classes.len() as f64,
        recall / classes.len() as f64,
    )
}

/// Counts and precision/recall/F1 for one class.
pub fn class_metrics(predictions: &[Emotion], labels: &[Emotion], class: Emotion) -> ClassMetrics {
    let mut tp = 0;
    let mut fp = 0;
    let mut fn_ = 0;
    for (&p, &l) in predictions.iter().zip(labels.iter()) {
        match (p == class, l == class) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            _ => {}
        }
    }
    let precision = if tp + fp > 0 {
        tp as f64 / (tp + fp) as f64
    } else {
        0.0
    };
    let recall = if tp + fn_ > 0 {
        tp as f64 / (tp + fn_) as f64
    } else {
        0.0
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    ClassMetrics {
        tp,
        fp,
        fn_,
        precision,
        recall,
        f1,
    }
}

/// Trained one-vs-rest linear classifier with input standardization.
#[derive(Debug, Clone, PartialEq)]
pub struct EmotionClassifier {
    /// Classes in decision order.
    pub classes: Vec<Emotion>,
    /// One weight row per class (over standardized features).
    pub weights: Matrix,
    /// One bias per class.
    pub biases: Vec<f64>,
    /// Standardization means.
    pub feat_mean: Vec<f64>,
    /// Standardization scales.
    pub feat_std: Vec<f64>,
    /// Selected soft-margin parameter.
    pub c: f64,
}

impl EmotionClassifier {
    fn standardize(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..x.len() {
            out[i] = (x[i] - self.feat_mean[i]) / self.feat_std[i];
        }
    }

    /// Decision value per class for one feature vector.
    pub fn decision_values(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.feat_mean.len() {
            return Err(Error::ShapeMismatch {
                op: "classifier_decision",
                left: (1, features.len()),
                right: (1, self.feat_mean.len()),
            });
        }
        let mut std = vec![0.0; features.len()];
        self.standardize(features, &mut std);
        Ok(self
            .classes
            .iter()
            .enumerate()
            .map(|(k, _)| {
                let w = self.weights.row(k);
                let mut acc = self.biases[k];
                for (a, b) in w.iter().zip(std.iter()) {
                    acc += a * b;
                }
                acc
            })
            .collect())
    }

    /// Predicted class (argmax of decision values).
    pub fn predict(&self, features: &[f64]) -> Result<Emotion> {
        let values = self.decision_values(features)?;
        let mut best = 0;
        for (i, v) in values.iter().enumerate() {
            if *v > values[best] {
                best = i;
            }
        }
        Ok(self.classes[best])
    }

    /// Predictions for rows of a feature matrix.
    pub fn predict_all(&self, features: &Matrix) -> Result<Vec<Emotion>> {
        (0..features.rows())
            .map(|r| self.predict(features.row(r)))
            .collect()
    }
}

/// Fit one binary hinge classifier: min 1/2 ||w||^2 + C sum hinge.
///
/// Deterministic full-batch subgradient descent on the equivalent
/// mean-hinge objective with lambda = 1 / (C n).
fn fit_binary(x: &Matrix, y: &[f64], c: f64) -> (Vec<f64>, f64) {
    let (n, d) = x.shape();
    let lambda = 1.0 / (c * n as f64);
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    for t in 1..=SVM_ITERS {
        let lr = 1.0 / (1.0 + 0.05 * t as f64);
        let mut grad_w = vec![0.0; d];
        let mut grad_b = 0.0;
        for r in 0..n {
            let row = x.row(r);
            let mut margin = b;
            for (a, v) in w.iter().zip(row.iter()) {
                margin += a * v;
            }
            if y[r] * margin < 1.0 {
                for (g, v) in grad_w.iter_mut().zip(row.iter()) {
                    *g -= y[r] * v;
                }
                grad_b -= y[r];
            }
        }
        let inv_n = 1.0 / n as f64;
        for i in 0..d {
            w[i] -= lr * (lambda * w[i] + grad_w[i] * inv_n);
        }
        b -= lr * grad_b * inv_n;
    }
    (w, b)
}

/// Train the one-vs-rest classifier, selecting C from `c_grid` by macro-F1
/// on the validation set (ties keep the earlier grid entry).
pub fn train_classifier(
    train_x: &Matrix,
    train_y: &[Emotion],
    val_x: &Matrix,
    val_y: &[Emotion],
    c_grid: &[f64],
) -> Result<EmotionClassifier> {
    if train_x.rows() != train_y.len() || val_x.rows() != val_y.len() {
        return Err(Error::InvalidArgument("feature/label count mismatch".into()));
    }
    if c_grid.is_empty() {
        return Err(Error::EmptyInput("C grid"));
    }
    let mut classes: Vec<Emotion> = train_y.to_vec();
    classes.sort_by_key(|e| e.index());
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 classes, got {}",
            classes.len()
        )));
    }

    // Standardize on training statistics.
    let (n, d) = train_x.shape();
    let mut mean = vec![0.0; d];
    for r in 0..n {
        for (m, v) in mean.iter_mut().zip(train_x.row(r).iter()) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let mut std = vec![0.0; d];
    for r in 0..n {
        for (s, (v, m)) in std.iter_mut().zip(train_x.row(r).iter().zip(mean.iter())) {
            *s += (v - m) * (v - m);
        }
    }
    for s in std.iter_mut() {
        *s = num::sqrt(*s / n as f64).max(1e-9);
    }
    let standardized = |x: &Matrix| -> Matrix {
        Matrix::from_fn(x.rows(), d, |r, c| (x.get(r, c) - mean[c]) / std[c])
    };
    let xs_train = standardized(train_x);
    let xs_val = standardized(val_x);

    let mut best: Option<(f64, EmotionClassifier)> = None;
    for &c in c_grid {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidArgument("C values must be positive".into()));
        }
        let mut weights = Matrix::zeros(classes.len(), d);
        let mut biases = vec![0.0; classes.len()];
        for (k, &class) in classes.iter().enumerate() {
            let y: Vec<f64> = train_y
                .iter()
                .map(|&l| if l == class { 1.0 } else { -1.0 })
                .collect();
            let (w, b) = fit_binary(&xs_train, &y, c);
            weights.row_mut(k).copy_from_slice(&w);
            biases[k] = b;
        }
        let candidate = EmotionClassifier {
            classes: classes.clone(),
            weights,
            biases,
            feat_mean: mean.clone(),
            feat_std: std.clone(),
            c,
        };
        // Validation predictions on the already-standardized matrix would
        // double-standardize; predict from raw values.
        let _ = &xs_val;
        let preds = candidate.predict_all(val_x)?;
        let score = macro_f1(&preds, val_y, &classes);
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, candidate));
        }
    }
    Ok(best.unwrap().1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn blobs(
        centers: &[(Emotion, Vec<f64>)],
        per_class: usize,
        spread: f64,
        seed: u64,
    ) -> (Matrix, Vec<Emotion>) {
        let d = centers[0].1.len();
        let mut rng = SeededRng::new(seed);
        let n = centers.len() * per_class;
        let mut x = Matrix::zeros(n, d);
        let mut y = Vec::with_capacity(n);
        for (k, (class, center)) in centers.iter().enumerate() {
            for i in 0..per_class {
                let row = x.row_mut(k * per_class + i);
                for (j, r) in row.iter_mut().enumerate() {
                    *r = center[j] + spread * rng.gaussian();
                }
                y.push(*class);
                let _ = i;
            }
        }
        (x, y)
    }

    #[test]
    fn f1_formula_reference_point() {
        // precision 0.5, recall 1.0 -> F1 = 2/3.
        let predictions = [
            Emotion::Anger,
            Emotion::Anger,
            Emotion::Sadness,
            Emotion::Sadness,
        ];
        let labels = [
            Emotion::Anger,
            Emotion::Sadness,
            Emotion::Sadness,
            Emotion::Sadness,
        ];
        let m = class_metrics(&predictions, &labels, Emotion::Anger);
        assert_eq!(m.precision, 0.5);
        assert_eq!(m.recall, 1.0);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn separable_blobs_reach_perfect_f1() {
        let centers = vec![
            (Emotion::Anger, vec![4.0, 0.0, 0.0]),
            (Emotion::Happiness, vec![-4.0, 4.0, 0.0]),
        ];
        let (train_x, train_y) = blobs(&centers, 30, 0.3, 1);
        let (val_x, val_y) = blobs(&centers, 12, 0.3, 2);
        let clf = train_classifier(&train_x, &train_y, &val_x, &val_y, &[0.1, 0.3, 0.8, 2.0])
            .unwrap();
        let preds = clf.predict_all(&val_x).unwrap();
        let f1 = macro_f1(&preds, &val_y, &clf.classes);
        assert!((f1 - 1.0).abs() < 1e-12, "f1 {f1}");
    }

    #[test]
    fn permuted_labels_score_near_chance() {
        let centers = vec![
            (Emotion::Anger, vec![2.0, 0.0]),
            (Emotion::Happiness, vec![-2.0, 0.0]),
            (Emotion::Sadness, vec![0.0, 2.0]),
            (Emotion::Frustration, vec![0.0, -2.0]),
        ];
        let (train_x, mut train_y) = blobs(&centers, 40, 0.4, 3);
        let (val_x, val_y) = blobs(&centers, 20, 0.4, 4);
        // Destroy the signal: rotate labels deterministically.
        let mut rng = SeededRng::new(9);
        rng.shuffle(&mut train_y);
        let clf =
            train_classifier(&train_x, &train_y, &val_x, &val_y, &[0.8]).unwrap();
        let preds = clf.predict_all(&val_x).unwrap();
        let f1 = macro_f1(&preds, &val_y, &clf.classes);
        assert!(f1 <= 0.35, "f1 {f1} above chance band");
    }

    #[test]
    fn four_class_blobs_train_cleanly() {
        let centers = vec![
            (Emotion::Anger, vec![3.0, 0.0, 0.0, 0.0]),
            (Emotion::Happiness, vec![0.0, 3.0, 0.0, 0.0]),
            (Emotion::Sadness, vec![0.0, 0.0, 3.0, 0.0]),
            (Emotion::Frustration, vec![0.0, 0.0, 0.0, 3.0]),
        ];
        let (train_x, train_y) = blobs(&centers, 25, 0.5, 5);
        let (val_x, val_y) = blobs(&centers, 10, 0.5, 6);
        let clf = train_classifier(&train_x, &train_y, &val_x, &val_y, &[0.3, 0.8]).unwrap();
        let preds = clf.predict_all(&val_x).unwrap();
        let f1 = macro_f1(&preds, &val_y, &clf.classes);
        assert!(f1 > 0.95, "f1 {f1}");
    }

    #[test]
    fn single_class_is_an_error() {
        let (x, y) = blobs(&[(Emotion::Anger, vec![0.0, 0.0])], 10, 0.1, 7);
        assert!(train_classifier(&x, &y, &x, &y, &[0.8]).is_err());
    }

    #[test]
    fn deterministic_given_same_data() {
        let centers = vec![
            (Emotion::Anger, vec![1.0, 0.0]),
            (Emotion::Sadness, vec![-1.0, 0.5]),
        ];
        let (x, y) = blobs(&centers, 20, 0.6, 8);
        let a = train_classifier(&x, &y, &x, &y, &[0.8]).unwrap();
        let b = train_classifier(&x, &y, &x, &y, &[0.8]).unwrap();
        assert_eq!(a, b);
    }
}
