//! Confusion-matrix metrics, ROC/AUC and the composite S score. The positive
//! class is `Abnormal`.
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Label;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionMatrix {
    pub fn from_predictions(truth: &[Label], predicted: &[Label]) -> Self {
        let mut cm = Self::default();
        for (t, p) in truth.iter().zip(predicted) {
            match (t.is_positive(), p.is_positive()) {
                (true, true) => cm.tp += 1,
                (false, true) => cm.fp += 1,
                (false, false) => cm.tn += 1,
                (true, false) => cm.fn_ += 1,
            }
        }
        cm
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// Swap the roles of the two classes.
    pub fn swapped(&self) -> Self {
        Self { tp: self.tn, tn: self.tp, fp: self.fn_, fn_: self.fp }
    }
}

pub fn error_rate(cm: &ConfusionMatrix) -> Result<f64> {
    let n = cm.total();
    if n == 0 {
        return Err(Error::EmptyEvaluation);
    }
    Ok((cm.fp + cm.fn_) as f64 / n as f64)
}

/// `F_beta` on the abnormal class; zero when precision and recall are both zero.
pub fn f_beta(cm: &ConfusionMatrix, beta: f64) -> Result<f64> {
    if cm.total() == 0 {
        return Err(Error::EmptyEvaluation);
    }
    let precision = if cm.tp + cm.fp == 0 { 0.0 } else { cm.tp as f64 / (cm.tp + cm.fp) as f64 };
    let recall = if cm.tp + cm.fn_ == 0 { 0.0 } else { cm.tp as f64 / (cm.tp + cm.fn_) as f64 };
    let b2 = beta * beta;
    let denom = b2 * precision + recall;
    Ok(if denom == 0.0 { 0.0 } else { (1.0 + b2) * precision * recall / denom })
}

pub fn f05(cm: &ConfusionMatrix) -> Result<f64> {
    f_beta(cm, 0.5)
}

/// Matthews correlation coefficient; zero when the denominator vanishes.
pub fn mcc(cm: &ConfusionMatrix) -> Result<f64> {
    if cm.total() == 0 {
        return Err(Error::EmptyEvaluation);
    }
    let (tp, fp, tn, fn_) = (cm.tp as f64, cm.fp as f64, cm.tn as f64, cm.fn_ as f64);
    let denom = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
    Ok(if denom == 0.0 { 0.0 } else { (tp * tn - fp * fn_) / denom })
}

/// Composite `[MCC + (1 - E_r) + F_0.5] / 3`.
pub fn s_score(mcc: f64, error_rate: f64, f05: f64) -> f64 {
    (mcc + (1.0 - error_rate) + f05) / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    /// Scores `>= threshold` are called abnormal.
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// ROC curve over all distinct score thresholds. Tied scores move the curve
/// diagonally in one step, so the trapezoidal area equals the tie-corrected
/// Mann-Whitney statistic.
pub fn roc_auc(scores: &[f64], labels: &[Label]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::Shape { expected: labels.len(), got: scores.len() });
    }
    let pos = labels.iter().filter(|l| l.is_positive()).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedAuc);
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite("ROC scores"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = Vec::with_capacity(scores.len() + 1);
    points.push(RocPoint { threshold: f64::INFINITY, fpr: 0.0, tpr: 0.0 });
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut area = 0.0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (tp0, fp0) = (tp, fp);
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]].is_positive() {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        // trapezoid in count units
        area += (fp - fp0) as f64 * (tp + tp0) as f64 / 2.0;
        points.push(RocPoint { threshold: s, fpr: fp as f64 / neg as f64, tpr: tp as f64 / pos as f64 });
    }
    Ok(RocCurve { points, auc: area / (pos as f64 * neg as f64) })
}

/// Error rate, F0.5 and MCC of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub error_rate: f64,
    pub f05: f64,
    pub mcc: f64,
}

impl ClassificationMetrics {
    pub fn from_confusion(cm: &ConfusionMatrix) -> Result<Self> {
        Ok(Self { error_rate: error_rate(cm)?, f05: f05(cm)?, mcc: mcc(cm)? })
    }
}

/// Error rate of always predicting the larger class.
pub fn majority_error_rate(labels: &[Label]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let pos = labels.iter().filter(|l| l.is_positive()).count();
    Ok(pos.min(labels.len() - pos) as f64 / labels.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn perfect_prediction() {
        let cm = ConfusionMatrix { tp: 5, fp: 0, tn: 7, fn_: 0 };
        assert_eq!(error_rate(&cm).unwrap(), 0.0);
        assert_eq!(f05(&cm).unwrap(), 1.0);
        assert_eq!(mcc(&cm).unwrap(), 1.0);
        assert_eq!(s_score(1.0, 0.0, 1.0), 1.0);
    }

    #[test]
    fn hand_computed_f05() {
        let cm = ConfusionMatrix { tp: 2, fp: 1, tn: 1, fn_: 0 };
        let want = 1.25 * (2.0 / 3.0) / (0.25 * (2.0 / 3.0) + 1.0);
        assert!((f05(&cm).unwrap() - want).abs() < 1e-15);
        assert!((want - 0.714).abs() < 1e-3);
    }

    #[test]
    fn all_abnormal_on_the_clinical_split() {
        let truth: Vec<Label> = core::iter::repeat_n(Label::Normal, 249).chain(core::iter::repeat_n(Label::Abnormal, 297)).collect();
        let pred = vec![Label::Abnormal; 546];
        let cm = ConfusionMatrix::from_predictions(&truth, &pred);
        let er = error_rate(&cm).unwrap();
        assert!((er - 0.456).abs() < 5e-4);
        assert_eq!(er, majority_error_rate(&truth).unwrap());
        // every row predicted positive: MCC denominator is zero
        assert_eq!(mcc(&cm).unwrap(), 0.0);
    }

    #[test]
    fn empty_confusion_is_an_error() {
        let cm = ConfusionMatrix::default();
        assert_eq!(error_rate(&cm), Err(Error::EmptyEvaluation));
        assert_eq!(mcc(&cm), Err(Error::EmptyEvaluation));
    }

    #[test]
    fn auc_examples() {
        let l = [Label::Normal, Label::Normal, Label::Abnormal, Label::Abnormal];
        assert_eq!(roc_auc(&[0.1, 0.2, 0.8, 0.9], &l).unwrap().auc, 1.0);
        assert_eq!(roc_auc(&[0.3; 4], &l).unwrap().auc, 0.5);
        assert_eq!(roc_auc(&[0.1, 0.4, 0.35, 0.8], &l).unwrap().auc, 0.75);
        assert_eq!(roc_auc(&[0.1, 0.4], &[Label::Normal, Label::Normal]), Err(Error::UndefinedAuc));
    }

    #[test]
    fn roc_endpoints() {
        let l = [Label::Normal, Label::Abnormal, Label::Abnormal, Label::Normal];
        let c = roc_auc(&[0.3, 0.9, 0.3, 0.1], &l).unwrap();
        let first = c.points.first().unwrap();
        let last = c.points.last().unwrap();
        assert_eq!((first.fpr, first.tpr), (0.0, 0.0));
        assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
    }

    #[test]
    fn mcc_symmetric_f05_not() {
        let cm = ConfusionMatrix { tp: 10, fp: 3, tn: 20, fn_: 6 };
        let sw = cm.swapped();
        assert!((mcc(&cm).unwrap() - mcc(&sw).unwrap()).abs() < 1e-15);
        assert!((f05(&cm).unwrap() - f05(&sw).unwrap()).abs() > 1e-3);
    }
}
