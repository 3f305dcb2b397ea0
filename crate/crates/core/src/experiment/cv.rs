//! Knee-grouped, repeated 5-fold cross-validation.
//!
//! Each repetition draws a fresh partition of the knees into five groups
//! following the normal:abnormal template 3:5, 3:5, 3:5, 5:3, 5:3. All
//! segments of a knee share its group. Every fold standardises with the mean
//! and standard deviation of its four training groups and applies the same
//! transform to the held-out group; the held-out scores of all five folds are
//! pooled before computing the repetition's metrics.
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::classify::{self, ClassifierKind};
use crate::error::{Error, Result};
use crate::features::RowKey;
use crate::matrix::Matrix;
use crate::metrics::{roc_auc, s_score, ClassificationMetrics, ConfusionMatrix};
use crate::rng::{self, derive_seed};
use crate::signal::Label;

pub const GROUP_COUNT: usize = 5;
/// `(normal, abnormal)` knees per group for a 19/21 corpus.
pub const RATIO_TEMPLATE: [(usize, usize); GROUP_COUNT] = [(3, 5), (3, 5), (3, 5), (5, 3), (5, 3)];
pub const DEFAULT_REPETITIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvProtocol {
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for CvProtocol {
    fn default() -> Self {
        Self { repetitions: DEFAULT_REPETITIONS, seed: 0 }
    }
}

fn scale_template(template: [usize; GROUP_COUNT], n: usize) -> [usize; GROUP_COUNT] {
    let total: usize = template.iter().sum();
    let exact: Vec<f64> = template.iter().map(|&t| (t * n) as f64 / total as f64).collect();
    let mut sizes = [0usize; GROUP_COUNT];
    for g in 0..GROUP_COUNT {
        sizes[g] = exact[g].floor() as usize;
    }
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..GROUP_COUNT).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &g in order.iter().take(n - assigned) {
        sizes[g] += 1;
    }
    sizes
}

/// Knees of each class per group. For corpora other than 19/21 the template
/// is scaled proportionally and remainders go to the groups with the largest
/// fractional share.
pub fn group_sizes(normal: usize, abnormal: usize) -> Result<[(usize, usize); GROUP_COUNT]> {
    let n = scale_template(RATIO_TEMPLATE.map(|t| t.0), normal);
    let a = scale_template(RATIO_TEMPLATE.map(|t| t.1), abnormal);
    if n.iter().chain(&a).any(|&k| k == 0) {
        return Err(Error::Grouping(format!(
            "{normal} normal and {abnormal} abnormal knees cannot give every group a knee of each class"
        )));
    }
    Ok(core::array::from_fn(|g| (n[g], a[g])))
}

/// Random knee-level partition into five groups.
pub fn make_groups(knees: &[(String, Label)], seed: u64) -> Result<Vec<Vec<String>>> {
    let mut normal: Vec<&String> = knees.iter().filter(|k| k.1 == Label::Normal).map(|k| &k.0).collect();
    let mut abnormal: Vec<&String> = knees.iter().filter(|k| k.1 == Label::Abnormal).map(|k| &k.0).collect();
    normal.sort();
    abnormal.sort();
    let sizes = group_sizes(normal.len(), abnormal.len())?;
    let mut rng = rng::rng_for(seed, &[rng::stream::GROUPING]);
    normal.shuffle(&mut rng);
    abnormal.shuffle(&mut rng);
    let (mut ni, mut ai) = (normal.into_iter(), abnormal.into_iter());
    Ok(sizes
        .iter()
        .map(|&(nn, na)| ni.by_ref().take(nn).chain(ai.by_ref().take(na)).cloned().collect())
        .collect())
}

/// Distinct knees of a row table, sorted by id.
pub fn knees_of(rows: &[RowKey]) -> Result<Vec<(String, Label)>> {
    let mut map: BTreeMap<&str, Label> = BTreeMap::new();
    for r in rows {
        if let Some(prev) = map.insert(&r.knee_id, r.label) {
            if prev != r.label {
                return Err(Error::InconsistentLabel(r.knee_id.clone()));
            }
        }
    }
    Ok(map.into_iter().map(|(k, l)| (String::from(k), l)).collect())
}

/// Fold assignment of every row for every repetition. Built once per corpus
/// and shared by all features, subsets and grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct CvPlan {
    pub protocol: CvProtocol,
    pub rows: Vec<RowKey>,
    pub labels: Vec<Label>,
    /// `fold_of_row[rep][row]`
    pub fold_of_row: Vec<Vec<u8>>,
}

impl CvPlan {
    pub fn new(rows: &[RowKey], protocol: CvProtocol) -> Result<Self> {
        if protocol.repetitions == 0 {
            return Err(Error::InvalidParameter(String::from("at least one repetition")));
        }
        let knees = knees_of(rows)?;
        let fold_of_row = (0..protocol.repetitions)
            .map(|rep| {
                let groups = make_groups(&knees, derive_seed(protocol.seed, &[rep as u64]))?;
                let mut group_of: BTreeMap<&str, u8> = BTreeMap::new();
                for (g, members) in groups.iter().enumerate() {
                    for k in members {
                        group_of.insert(k, g as u8);
                    }
                }
                Ok(rows.iter().map(|r| group_of[r.knee_id.as_str()]).collect())
            })
            .collect::<Result<_>>()?;
        Ok(Self { protocol, rows: rows.to_vec(), labels: rows.iter().map(|r| r.label).collect(), fold_of_row })
    }

    pub fn repetitions(&self) -> usize {
        self.fold_of_row.len()
    }

    pub fn rows(&self) -> usize {
        self.labels.len()
    }

    /// `(train, test)` row indices of one fold.
    pub fn split(&self, rep: usize, fold: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.rows()).partition(|&r| self.fold_of_row[rep][r] as usize != fold)
    }
}

/// Column-wise z-scaling fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Sample standard deviation; a zero-variance column keeps divisor 1.
    pub fn fit(x: &Matrix) -> Self {
        let (n, d) = (x.rows(), x.cols());
        let mut mean = vec![0.0; d];
        for row in x.iter_rows() {
            mean.iter_mut().zip(row).for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= n.max(1) as f64);
        let mut var = vec![0.0; d];
        for row in x.iter_rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = if n > 1 { (s / (n - 1) as f64).sqrt() } else { 0.0 };
                if sd > 0.0 && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn apply(&self, x: &mut Matrix) {
        for r in 0..x.rows() {
            for ((v, m), s) in x.row_mut(r).iter_mut().zip(&self.mean).zip(&self.scale) {
                *v = (*v - m) / s;
            }
        }
    }
}

/// Metrics of one repetition (pooled over its five folds).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepetitionMetrics {
    pub auc: f64,
    pub error_rate: f64,
    pub f05: f64,
    pub mcc: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classifier: ClassifierKind,
    pub repetitions: Vec<RepetitionMetrics>,
    /// Arithmetic means of the per-repetition fields; `s` is recomputed from
    /// the mean MCC, error rate and F0.5.
    pub mean: RepetitionMetrics,
}

impl EvalReport {
    pub fn from_repetitions(classifier: ClassifierKind, repetitions: Vec<RepetitionMetrics>) -> Self {
        let k = repetitions.len().max(1) as f64;
        let avg = |f: fn(&RepetitionMetrics) -> f64| repetitions.iter().map(f).sum::<f64>() / k;
        let (auc, error_rate, f05, mcc) = (avg(|r| r.auc), avg(|r| r.error_rate), avg(|r| r.f05), avg(|r| r.mcc));
        let mean = RepetitionMetrics { auc, error_rate, f05, mcc, s: s_score(mcc, error_rate, f05) };
        Self { classifier, repetitions, mean }
    }

    pub fn aucs(&self) -> Vec<f64> {
        self.repetitions.iter().map(|r| r.auc).collect()
    }
}

/// Pooled held-out scores and predictions of one repetition.
pub fn repetition_scores(
    x: &Matrix,
    columns: &[usize],
    plan: &CvPlan,
    rep: usize,
    classifier: ClassifierKind,
) -> Result<(Vec<f64>, Vec<Label>)> {
    let n = plan.rows();
    if x.rows() != n {
        return Err(Error::Shape { expected: n, got: x.rows() });
    }
    let mut scores = vec![0.0; n];
    let mut preds = vec![Label::Normal; n];
    let all = x.select_cols(columns);
    for fold in 0..GROUP_COUNT {
        let (train, test) = plan.split(rep, fold);
        if test.is_empty() {
            continue;
        }
        let mut xtr = all.select_rows(&train);
        let ytr: Vec<Label> = train.iter().map(|&r| plan.labels[r]).collect();
        let scaler = Standardizer::fit(&xtr);
        scaler.apply(&mut xtr);
        let seed = derive_seed(plan.protocol.seed, &[rng::stream::CLASSIFIER, rep as u64, fold as u64]);
        let model = classify::train(classifier, &xtr, &ytr, seed)?;
        let mut xte = all.select_rows(&test);
        scaler.apply(&mut xte);
        for (row, &r) in xte.iter_rows().zip(&test) {
            scores[r] = model.score(row)?;
            preds[r] = model.predict(row)?;
        }
    }
    Ok((scores, preds))
}

pub fn repetition_metrics(scores: &[f64], preds: &[Label], labels: &[Label]) -> Result<RepetitionMetrics> {
    let cm = ConfusionMatrix::from_predictions(labels, preds);
    let m = ClassificationMetrics::from_confusion(&cm)?;
    let auc = roc_auc(scores, labels)?.auc;
    Ok(RepetitionMetrics { auc, error_rate: m.error_rate, f05: m.f05, mcc: m.mcc, s: s_score(m.mcc, m.error_rate, m.f05) })
}

/// Repeated cross-validation of `classifier` on the given columns of `x`.
pub fn run_cv(x: &Matrix, columns: &[usize], plan: &CvPlan, classifier: ClassifierKind) -> Result<EvalReport> {
    if columns.is_empty() {
        return Err(Error::InvalidParameter(String::from("cross-validation needs at least one feature column")));
    }
    let reps = (0..plan.repetitions())
        .map(|rep| {
            let (scores, preds) = repetition_scores(x, columns, plan, rep, classifier)?;
            repetition_metrics(&scores, &preds, &plan.labels)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_repetitions(classifier, reps))
}
