//! Cross-validation protocol and the parameter sweeps built on it.
//!
//! One grid point runs the full chain: extract the requested feature sets,
//! score each vector with a linear SVM, build the threshold subsets, and pick
//! the best subset per classifier. Scores are recomputed for every
//! `(frame length, bands)` configuration.
pub mod cv;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::index;
use serde::{Deserialize, Serialize};

pub use cv::{
    group_sizes, knees_of, make_groups, run_cv, CvPlan, CvProtocol, EvalReport, RepetitionMetrics, Standardizer,
    GROUP_COUNT, RATIO_TEMPLATE,
};

use crate::classify::ClassifierKind;
use crate::error::{Error, Result};
use crate::exec::Runner;
use crate::features::{extract, FeatureConfig, FeatureSet, RowKey, SetTag};
use crate::metrics::majority_error_rate;
use crate::rng;
use crate::selection::{build_subsets, score_features, select_best, FeatureScore, SubsetSelection, THRESHOLD_STEP};
use crate::signal::Segment;

/// Bands used by the frame-length sweeps.
pub const DEFAULT_BANDS: usize = 20;
pub const FRAMELEN_RANGE_MS: (u32, u32, u32) = (20, 100, 4);
pub const LOCAL_OFFSETS_MS: [i32; 6] = [-3, -2, -1, 1, 2, 3];
pub const MONTE_CARLO_DRAWS: usize = 20;
/// Allowed Monte Carlo lengths: `[2, 700]` ms minus `[20, 100]` ms.
pub const MONTE_CARLO_RANGE_MS: (u32, u32) = (2, 700);
pub const MONTE_CARLO_EXCLUDED_MS: (u32, u32) = (20, 100);
pub const NBANDS_RANGE: (usize, usize) = (10, 75);
/// Best frame length per set found on the clinical recordings; the band
/// sweep holds these fixed.
pub const REFERENCE_FRAME_MS: [(SetTag, f64); 5] =
    [(SetTag::D, 21.0), (SetTag::E, 90.0), (SetTag::F, 23.0), (SetTag::L, 20.0), (SetTag::M, 49.0)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "value")]
pub enum ErrorThreshold {
    Fixed(f64),
    /// Error of always predicting the larger class of the corpus at hand.
    MajorityBaseline,
}

impl ErrorThreshold {
    pub fn resolve(&self, rows: &[RowKey]) -> Result<f64> {
        match *self {
            ErrorThreshold::Fixed(t) => Ok(t),
            ErrorThreshold::MajorityBaseline => {
                majority_error_rate(&rows.iter().map(|r| r.label).collect::<Vec<_>>())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub protocol: CvProtocol,
    pub classifiers: Vec<ClassifierKind>,
    pub error_threshold: ErrorThreshold,
    pub step: f64,
    /// Forwarded to [`FeatureConfig::stft_deltas`] at every grid point.
    #[serde(default)]
    pub stft_deltas: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            protocol: CvProtocol::default(),
            classifiers: alloc::vec![ClassifierKind::SvmLinear],
            error_threshold: ErrorThreshold::MajorityBaseline,
            step: THRESHOLD_STEP,
            stft_deltas: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierOutcome {
    pub selection: SubsetSelection,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetResult {
    pub tag: SetTag,
    pub config: FeatureConfig,
    pub error_threshold: f64,
    pub scores: Vec<FeatureScore>,
    pub subsets_considered: usize,
    pub outcomes: Vec<ClassifierOutcome>,
}

impl SetResult {
    pub fn best(&self) -> Option<&ClassifierOutcome> {
        self.outcomes.iter().max_by(|a, b| a.report.mean.auc.total_cmp(&b.report.mean.auc))
    }
}

/// Score, subset and select on one feature set.
pub fn evaluate_set<R: Runner>(set: &FeatureSet, plan: &CvPlan, cfg: &PipelineConfig, runner: &R) -> Result<SetResult> {
    if set.rows != plan.rows {
        return Err(Error::InvalidParameter(String::from("feature set rows differ from the cross-validation plan")));
    }
    let error_threshold = cfg.error_threshold.resolve(&set.rows)?;
    let scores = score_features(set, plan, runner)?;
    let subsets = build_subsets(&scores, error_threshold, cfg.step);
    if subsets.is_empty() {
        return Err(Error::NoSubsets);
    }
    let outcomes = cfg
        .classifiers
        .iter()
        .map(|&k| {
            let (selection, report) = select_best(&subsets, set, plan, k, runner)?;
            Ok(ClassifierOutcome { selection, report })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SetResult {
        tag: set.tag,
        config: set.config,
        error_threshold,
        scores,
        subsets_considered: subsets.len(),
        outcomes,
    })
}

/// Supplies feature sets for a configuration. The std crate wraps this with
/// an on-disk cache.
pub trait FeatureSource {
    fn rows(&self) -> Result<Vec<RowKey>>;
    fn feature_sets(&self, config: &FeatureConfig, tags: &[SetTag]) -> Result<Vec<FeatureSet>>;
}

pub struct SegmentSource<'a, R: Runner> {
    pub segments: &'a [Segment],
    pub runner: &'a R,
}

impl<R: Runner> FeatureSource for SegmentSource<'_, R> {
    fn rows(&self) -> Result<Vec<RowKey>> {
        let mut rows: Vec<RowKey> = self
            .segments
            .iter()
            .map(|s| RowKey { knee_id: s.knee_id.clone(), index: s.index, label: s.label })
            .collect();
        rows.sort_by(|a, b| (&a.knee_id, a.index).cmp(&(&b.knee_id, b.index)));
        Ok(rows)
    }

    fn feature_sets(&self, config: &FeatureConfig, tags: &[SetTag]) -> Result<Vec<FeatureSet>> {
        extract(self.segments, config, tags, self.runner)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Framelen,
    LocalSearch,
    MonteCarlo,
    Nbands,
}

impl SweepKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "framelen" | "framelen_grid" => Some(Self::Framelen),
            "local_search" | "local-search" | "local" => Some(Self::LocalSearch),
            "monte_carlo" | "monte-carlo" | "montecarlo" => Some(Self::MonteCarlo),
            "nbands" => Some(Self::Nbands),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Framelen => "framelen",
            Self::LocalSearch => "local_search",
            Self::MonteCarlo => "monte_carlo",
            Self::Nbands => "nbands",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub frame_ms: f64,
    pub bands: usize,
    pub tags: Vec<SetTag>,
    /// Offset from the centre frame length in a local search.
    pub offset_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub kind: SweepKind,
    pub points: Vec<GridPoint>,
}

pub fn framelen_grid() -> Vec<f64> {
    let (lo, hi, step) = FRAMELEN_RANGE_MS;
    (lo..=hi).step_by(step as usize).map(f64::from).collect()
}

/// `count` distinct whole-millisecond lengths drawn uniformly from the
/// allowed range.
pub fn monte_carlo_lengths(count: usize, seed: u64) -> Result<Vec<f64>> {
    let (lo, hi) = MONTE_CARLO_RANGE_MS;
    let (xlo, xhi) = MONTE_CARLO_EXCLUDED_MS;
    let allowed: Vec<u32> = (lo..=hi).filter(|v| *v < xlo || *v > xhi).collect();
    if count > allowed.len() {
        return Err(Error::InvalidParameter(format!("at most {} distinct lengths", allowed.len())));
    }
    let mut rng = rng::rng_for(seed, &[rng::stream::MONTE_CARLO]);
    Ok(index::sample(&mut rng, allowed.len(), count).into_iter().map(|i| f64::from(allowed[i])).collect())
}

impl SweepConfig {
    pub fn framelen(tags: &[SetTag], bands: usize) -> Self {
        let points = framelen_grid()
            .into_iter()
            .map(|l| GridPoint { frame_ms: l, bands, tags: tags.to_vec(), offset_ms: None })
            .collect();
        Self { kind: SweepKind::Framelen, points }
    }

    /// Six lengths around each set's centre, one millisecond apart.
    pub fn local_search(centres: &[(SetTag, f64)], bands: usize) -> Self {
        let mut points = Vec::new();
        for &(tag, centre) in centres {
            for &t in &LOCAL_OFFSETS_MS {
                points.push(GridPoint {
                    frame_ms: centre + f64::from(t),
                    bands,
                    tags: alloc::vec![tag],
                    offset_ms: Some(f64::from(t)),
                });
            }
        }
        Self { kind: SweepKind::LocalSearch, points }
    }

    pub fn monte_carlo(tags: &[SetTag], bands: usize, count: usize, seed: u64) -> Result<Self> {
        let points = monte_carlo_lengths(count, seed)?
            .into_iter()
            .map(|l| GridPoint { frame_ms: l, bands, tags: tags.to_vec(), offset_ms: None })
            .collect();
        Ok(Self { kind: SweepKind::MonteCarlo, points })
    }

    /// Every band count in range for each `(set, frame length)` pair.
    pub fn nbands(frames: &[(SetTag, f64)]) -> Self {
        let mut points = Vec::new();
        for nb in NBANDS_RANGE.0..=NBANDS_RANGE.1 {
            for &(tag, l) in frames.iter().filter(|f| f.0 != SetTag::F) {
                points.push(GridPoint { frame_ms: l, bands: nb, tags: alloc::vec![tag], offset_ms: None });
            }
        }
        Self { kind: SweepKind::Nbands, points }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetEntry {
    pub tag: SetTag,
    pub result: Option<SetResult>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub kind: SweepKind,
    pub index: usize,
    pub point: GridPoint,
    pub sets: Vec<SetEntry>,
}

/// Runs the pipeline at one grid point. Sets whose filterbank cannot be
/// resolved at this frame length, or for which no subset survives the
/// thresholds, are reported as skipped.
pub fn run_point<S: FeatureSource, R: Runner>(
    source: &S,
    plan: &CvPlan,
    kind: SweepKind,
    index: usize,
    point: &GridPoint,
    cfg: &PipelineConfig,
    runner: &R,
) -> Result<GridReport> {
    let mut config = FeatureConfig::new(point.frame_ms, point.bands);
    config.stft_deltas = cfg.stft_deltas;
    let mut entries: Vec<SetEntry> = Vec::new();
    let mut runnable = Vec::new();
    for &tag in &point.tags {
        if tag != SetTag::F && config.bins() < config.bands + 2 {
            entries.push(SetEntry {
                tag,
                result: None,
                skipped: Some(format!("{} bins cannot resolve {} bands", config.bins(), config.bands)),
            });
        } else {
            runnable.push(tag);
        }
    }
    if !runnable.is_empty() {
        for set in source.feature_sets(&config, &runnable)? {
            let entry = match evaluate_set(&set, plan, cfg, runner) {
                Ok(r) => SetEntry { tag: set.tag, result: Some(r), skipped: None },
                Err(Error::NoSubsets) => {
                    SetEntry { tag: set.tag, result: None, skipped: Some(Error::NoSubsets.to_string()) }
                }
                Err(e) => return Err(e),
            };
            entries.push(entry);
        }
    }
    entries.sort_by_key(|e| e.tag);
    Ok(GridReport { kind, index, point: point.clone(), sets: entries })
}

pub fn run_sweep<S: FeatureSource, R: Runner>(
    source: &S,
    sweep: &SweepConfig,
    cfg: &PipelineConfig,
    runner: &R,
) -> Result<Vec<GridReport>> {
    let plan = CvPlan::new(&source.rows()?, cfg.protocol)?;
    sweep
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| run_point(source, &plan, sweep.kind, i, p, cfg, runner))
        .collect()
}
