//! Experiment configuration file (JSON). Every field is optional; command
//! line flags take precedence.
//!
//! ```json
//! {
//!   "corpus": "corpus/manifest.csv",
//!   "kind": "local_search",
//!   "seed": 7,
//!   "repetitions": 100,
//!   "classifiers": ["svm-linear", "lda"],
//!   "feature_sets": ["M", "L"],
//!   "centres_ms": {"M": 49, "L": 20}
//! }
//! ```
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use kneeae_core::classify::ClassifierKind;
use kneeae_core::experiment::{ErrorThreshold, SweepKind};
use kneeae_core::features::SetTag;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::formats::read_json;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub corpus: Option<PathBuf>,
    pub kind: Option<SweepKind>,
    pub seed: Option<u64>,
    pub repetitions: Option<usize>,
    pub classifiers: Option<Vec<ClassifierKind>>,
    pub feature_sets: Option<Vec<SetTag>>,
    pub frame_ms: Option<f64>,
    pub bands: Option<usize>,
    /// Frame lengths for the frame-length sweep, replacing the default grid.
    pub frame_grid_ms: Option<Vec<f64>>,
    /// Centre frame length per set for the local search, and the fixed frame
    /// length per set for the band sweep.
    pub centres_ms: Option<BTreeMap<SetTag, f64>>,
    pub monte_carlo_draws: Option<usize>,
    pub error_threshold: Option<ErrorThreshold>,
    pub step: Option<f64>,
    pub stft_deltas: Option<bool>,
    pub cache_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Relative paths in the file resolve against the file's directory.
    pub fn read(path: &Path) -> Result<Self> {
        let mut c: Self = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut c.corpus, &mut c.cache_dir].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(c)
    }
}
