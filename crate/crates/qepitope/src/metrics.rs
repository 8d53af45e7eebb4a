//! Evaluation metrics: accuracy, ROC AUC, and the Matthews correlation
//! coefficient, built on confusion counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which classifier produced a report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Qsvm,
    Vqc,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::Qsvm => write!(f, "qsvm"),
            ModelKind::Vqc => write!(f, "vqc"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub true_pos: u64,
    pub false_pos: u64,
    pub true_neg: u64,
    pub false_neg: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }
}

/// One evaluated split.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub acc: f64,
    pub auc: f64,
    pub mcc: f64,
    pub confusion: ConfusionCounts,
    pub model_kind: ModelKind,
}

/// Tally (label, prediction) pairs over +-1 labels.
pub fn confusion(labels: &[i8], predictions: &[i8]) -> Result<ConfusionCounts> {
    if labels.len() != predictions.len() {
        return Err(Error::Shape(format!(
            "{} labels vs {} predictions",
            labels.len(),
            predictions.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::Size("confusion over an empty evaluation".into()));
    }
    let mut counts = ConfusionCounts {
        true_pos: 0,
        false_pos: 0,
        true_neg: 0,
        false_neg: 0,
    };
    for (&y, &p) in labels.iter().zip(predictions) {
        match (y, p) {
            (1, 1) => counts.true_pos += 1,
            (-1, -1) => counts.true_neg += 1,
            (-1, 1) => counts.false_pos += 1,
            (1, -1) => counts.false_neg += 1,
            _ => {
                return Err(Error::Validation(format!(
                    "labels and predictions must be +1 or -1, got ({y}, {p})"
                )))
            }
        }
    }
    Ok(counts)
}

pub fn accuracy(c: &ConfusionCounts) -> Result<f64> {
    let total = c.total();
    if total == 0 {
        return Err(Error::Size("accuracy of an empty evaluation".into()));
    }
    Ok((c.true_pos + c.true_neg) as f64 / total as f64)
}

/// Matthews correlation coefficient; any zero factor in the denominator
/// yields 0 by convention.
pub fn mcc(c: &ConfusionCounts) -> Result<f64> {
    let total = c.total();
    if total == 0 {
        return Err(Error::Size("mcc of an empty evaluation".into()));
    }
    let tp = c.true_pos as f64;
    let tn = c.true_neg as f64;
    let fp = c.false_pos as f64;
    let fneg = c.false_neg as f64;
    let denom = (tp + fp) * (tp + fneg) * (tn + fp) * (tn + fneg);
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((tp * tn - fp * fneg) / denom.sqrt())
}

/// Area under the ROC curve as the Mann-Whitney pair statistic: the
/// fraction of (positive, negative) pairs ranked correctly, ties counting
/// one half.
pub fn roc_auc(labels: &[i8], scores: &[f64]) -> Result<f64> {
    if labels.len() != scores.len() {
        return Err(Error::Shape(format!(
            "{} labels vs {} scores",
            labels.len(),
            scores.len()
        )));
    }
    let pos: Vec<f64> = labels
        .iter()
        .zip(scores)
        .filter(|(&y, _)| y == 1)
        .map(|(_, &s)| s)
        .collect();
    let neg: Vec<f64> = labels
        .iter()
        .zip(scores)
        .filter(|(&y, _)| y == -1)
        .map(|(_, &s)| s)
        .collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Degenerate(
            "roc auc requires both classes in the evaluation".into(),
        ));
    }
    let mut favorable = 0.0;
    for &p in &pos {
        for &n in &neg {
            if p > n {
                favorable += 1.0;
            } else if p == n {
                favorable += 0.5;
            }
        }
    }
    Ok(favorable / (pos.len() as f64 * neg.len() as f64))
}

/// Convenience: assemble a full report from labels, hard predictions, and
/// continuous scores.
pub fn evaluate(
    labels: &[i8],
    predictions: &[i8],
    scores: &[f64],
    model_kind: ModelKind,
) -> Result<EvalReport> {
    let confusion = confusion(labels, predictions)?;
    Ok(EvalReport {
        acc: accuracy(&confusion)?,
        auc: roc_auc(labels, scores)?,
        mcc: mcc(&confusion)?,
        confusion,
        model_kind,
    })
}
