use serde::{Deserialize, Serialize};

use super::PredictError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rmse: f64,
    pub accuracy: f64,
    pub f1: f64,
}

/// Binary confusion counts with `+1` as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn tally(predicted: &[i8], actual: &[i8]) -> Self {
        let mut c = Self::default();
        for (p, a) in predicted.iter().zip(actual) {
            match (*p > 0, *a > 0) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    /// Zero when there are no positives among predictions or labels.
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            2.0 * self.tp as f64 / denom as f64
        }
    }
}

pub fn rmse(predicted: &[f64], actual: &[f64]) -> Result<f64, PredictError> {
    if predicted.is_empty() {
        return Err(PredictError::EmptyTest);
    }
    if predicted.len() != actual.len() {
        return Err(PredictError::ShapeMismatch);
    }
    let sse: f64 = predicted.iter().zip(actual).map(|(p, a)| (p - a).powi(2)).sum();
    Ok((sse / predicted.len() as f64).sqrt())
}

/// RMSE over regression outputs, accuracy and F1 over class predictions.
pub fn evaluate(
    predicted_targets: &[f64],
    targets: &[f64],
    predicted_labels: &[i8],
    labels: &[i8],
) -> Result<Metrics, PredictError> {
    if predicted_labels.is_empty() || labels.is_empty() {
        return Err(PredictError::EmptyTest);
    }
    if predicted_labels.len() != labels.len() {
        return Err(PredictError::ShapeMismatch);
    }
    let c = Confusion::tally(predicted_labels, labels);
    Ok(Metrics { rmse: rmse(predicted_targets, targets)?, accuracy: c.accuracy(), f1: c.f1() })
}
