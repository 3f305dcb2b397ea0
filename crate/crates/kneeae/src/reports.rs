//! Report files written by the command line tool. Each kind has a JSON
//! schema under `schemas/`.
use kneeae_core::classify::ClassifierKind;
use kneeae_core::experiment::{EvalReport, GridReport, SweepKind};
use kneeae_core::features::{FeatureConfig, FeatureId, SetTag};
use kneeae_core::selection::{FeatureScore, SubsetSelection};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

/// Settings shared by every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub tool: String,
    pub version: String,
    pub format: u32,
    pub seed: u64,
    pub repetitions: usize,
    pub corpus_sha256: String,
    pub segments: usize,
}

impl RunInfo {
    pub fn new(seed: u64, repetitions: usize, corpus_sha256: String, segments: usize) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            format: FORMAT_VERSION,
            seed,
            repetitions,
            corpus_sha256,
            segments,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub kind: String,
    pub run: RunInfo,
    pub feature_set: SetTag,
    pub config: FeatureConfig,
    pub scores: Vec<FeatureScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub kind: String,
    pub run: RunInfo,
    pub feature_set: SetTag,
    pub config: FeatureConfig,
    pub classifier: ClassifierKind,
    pub error_threshold: f64,
    pub step: f64,
    pub scores: Vec<FeatureScore>,
    pub subsets_considered: usize,
    pub selection: SubsetSelection,
    pub per_repetition_auc: Vec<f64>,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub kind: String,
    pub run: RunInfo,
    pub feature_set: SetTag,
    pub config: FeatureConfig,
    pub members: Vec<FeatureId>,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPointReport {
    pub kind: String,
    pub run: RunInfo,
    pub sweep: SweepKind,
    pub classifiers: Vec<ClassifierKind>,
    pub point: GridReport,
}
