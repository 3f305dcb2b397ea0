//! Filter-then-wrapper feature selection.
//!
//! Every 11-statistic feature vector is first scored on its own with a linear
//! SVM under the cross-validation protocol. A 21x21 grid of (F0.5, MCC)
//! thresholds, with the error-rate threshold held fixed, then carves the
//! scored vectors into nested subsets; each distinct subset is evaluated as a
//! whole and the one with the highest mean AUC wins.
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::classify::ClassifierKind;
use crate::error::{Error, Result};
use crate::exec::Runner;
use crate::experiment::cv::{repetition_scores, run_cv, CvPlan, EvalReport};
use crate::features::{FeatureId, FeatureSet};
use crate::metrics::{ClassificationMetrics, ConfusionMatrix};

/// Error of always predicting the larger class on a 249/297 corpus.
pub const DEFAULT_ERROR_THRESHOLD: f64 = 0.456;
pub const THRESHOLD_STEP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub id: FeatureId,
    /// Position of the vector within its feature set.
    pub vector: usize,
    pub error_rate: f64,
    pub f05: f64,
    pub mcc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub error_rate: f64,
    pub f05: f64,
    pub mcc: f64,
}

impl Thresholds {
    pub fn admits(&self, s: &FeatureScore) -> bool {
        s.error_rate <= self.error_rate && s.f05 >= self.f05 && s.mcc >= self.mcc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetSelection {
    /// Loosest grid cell that produced this member set.
    pub thresholds: Thresholds,
    pub members: Vec<FeatureId>,
    /// Vector positions within the feature set, ascending.
    pub vectors: Vec<usize>,
    /// 1 for the largest subset, increasing as subsets shrink.
    pub rank: usize,
    pub mean_auc: Option<f64>,
    pub mean_error_rate: Option<f64>,
}

/// Scores each feature vector alone with a linear SVM, averaging E_r, F0.5
/// and MCC over the plan's repetitions.
pub fn score_features<R: Runner>(set: &FeatureSet, plan: &CvPlan, runner: &R) -> Result<Vec<FeatureScore>> {
    if set.vector_count() == 0 {
        return Err(Error::EmptyInput("feature set has no vectors"));
    }
    let results = runner.map(set.vector_count(), |v| -> Result<FeatureScore> {
        let cols: Vec<usize> = set.vector_columns(v).collect();
        let (mut er, mut f, mut m) = (0.0, 0.0, 0.0);
        for rep in 0..plan.repetitions() {
            let (_, preds) = repetition_scores(&set.data, &cols, plan, rep, ClassifierKind::SvmLinear)?;
            let cm = ConfusionMatrix::from_predictions(&plan.labels, &preds);
            let c = ClassificationMetrics::from_confusion(&cm)?;
            er += c.error_rate;
            f += c.f05;
            m += c.mcc;
        }
        let k = plan.repetitions() as f64;
        Ok(FeatureScore { id: set.vectors[v], vector: v, error_rate: er / k, f05: f / k, mcc: m / k })
    });
    results.into_iter().collect()
}

/// Threshold values `0, w, 2w, ..., 1`.
pub fn threshold_grid(step: f64) -> Vec<f64> {
    let n = (1.0 / step).round() as usize;
    if (n as f64 * step - 1.0).abs() < 1e-9 {
        (0..=n).map(|k| k as f64 / n as f64).collect()
    } else {
        (0..).map(|k| k as f64 * step).take_while(|&t| t <= 1.0 + 1e-12).collect()
    }
}

/// Vector positions admitted by `th`, ascending.
pub fn members(scores: &[FeatureScore], th: &Thresholds) -> Vec<usize> {
    let mut v: Vec<usize> = scores.iter().filter(|s| th.admits(s)).map(|s| s.vector).collect();
    v.sort_unstable();
    v
}

/// Distinct non-empty subsets over the (F0.5, MCC) threshold grid, largest
/// first.
pub fn build_subsets(scores: &[FeatureScore], error_threshold: f64, step: f64) -> Vec<SubsetSelection> {
    let grid = threshold_grid(step);
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut out = Vec::new();
    for &f05 in &grid {
        for &mcc in &grid {
            let th = Thresholds { error_rate: error_threshold, f05, mcc };
            let vectors = members(scores, &th);
            if vectors.is_empty() || !seen.insert(vectors.clone()) {
                continue;
            }
            let members = vectors
                .iter()
                .map(|&v| scores.iter().find(|s| s.vector == v).map(|s| s.id).unwrap())
                .collect();
            out.push(SubsetSelection { thresholds: th, members, vectors, rank: 0, mean_auc: None, mean_error_rate: None });
        }
    }
    // stable: equal sizes keep grid order
    out.sort_by(|a, b| b.vectors.len().cmp(&a.vectors.len()));
    for (i, s) in out.iter_mut().enumerate() {
        s.rank = i + 1;
    }
    out
}

/// Evaluates every subset and returns the winner with its report. Ties on
/// mean AUC go to the smaller subset, then to the lower mean error rate.
pub fn select_best<R: Runner>(
    subsets: &[SubsetSelection],
    set: &FeatureSet,
    plan: &CvPlan,
    classifier: ClassifierKind,
    runner: &R,
) -> Result<(SubsetSelection, EvalReport)> {
    if subsets.is_empty() {
        return Err(Error::NoSubsets);
    }
    let reports = runner.map(subsets.len(), |i| run_cv(&set.data, &set.columns_of(&subsets[i].vectors), plan, classifier));
    let mut best: Option<(usize, EvalReport)> = None;
    for (i, r) in reports.into_iter().enumerate() {
        let r = r?;
        let better = match &best {
            None => true,
            Some((j, b)) => {
                let (na, nb) = (subsets[i].vectors.len(), subsets[*j].vectors.len());
                r.mean.auc > b.mean.auc
                    || (r.mean.auc == b.mean.auc
                        && (na < nb || (na == nb && r.mean.error_rate < b.mean.error_rate)))
            }
        };
        if better {
            best = Some((i, r));
        }
    }
    let (i, report) = best.expect("at least one subset");
    let mut winner = subsets[i].clone();
    winner.mean_auc = Some(report.mean.auc);
    winner.mean_error_rate = Some(report.mean.error_rate);
    Ok((winner, report))
}

/// Human-readable list of member ids, e.g. `F30d0 F31d0`.
pub fn describe_members(members: &[FeatureId]) -> String {
    let mut s = String::new();
    for (i, m) in members.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(&alloc::format!("{m}"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::SetTag;
    use alloc::vec;

    fn score(v: usize, er: f64, f: f64, m: f64) -> FeatureScore {
        FeatureScore { id: FeatureId { set: SetTag::M, coeff: v, order: 0 }, vector: v, error_rate: er, f05: f, mcc: m }
    }

    #[test]
    fn grid_has_21_exact_points() {
        let g = threshold_grid(THRESHOLD_STEP);
        assert_eq!(g.len(), 21);
        assert_eq!(g[3], 0.15);
        assert_eq!(g[20], 1.0);
    }

    #[test]
    fn loosest_cell_keeps_everything_under_the_error_threshold() {
        let s = [score(0, 0.3, 0.7, 0.4), score(1, 0.5, 0.6, 0.1), score(2, 0.2, 0.9, 0.8)];
        let subs = build_subsets(&s, DEFAULT_ERROR_THRESHOLD, THRESHOLD_STEP);
        assert_eq!(subs[0].vectors, vec![0, 2]);
        assert_eq!(subs[0].rank, 1);
        let strict = Thresholds { error_rate: DEFAULT_ERROR_THRESHOLD, f05: 1.0, mcc: 1.0 };
        assert!(members(&s, &strict).is_empty());
        assert!(subs.iter().all(|x| !x.vectors.is_empty()));
    }

    #[test]
    fn stricter_cells_nest() {
        let s: Vec<_> = (0..10).map(|i| score(i, 0.1 * i as f64 / 2.0, 0.1 * i as f64, 0.05 * i as f64)).collect();
        let loose = Thresholds { error_rate: 0.456, f05: 0.4, mcc: 0.4 };
        let tight = Thresholds { error_rate: 0.456, f05: 0.6, mcc: 0.6 };
        let (a, b) = (members(&s, &loose), members(&s, &tight));
        assert!(b.iter().all(|v| a.contains(v)));
    }
}
