//! Knee acoustic-emission analysis core.
//!
//! Everything in this crate is pure computation over in-memory buffers: signal
//! preparation (resampling, RMS equalisation, segmentation), framed magnitude
//! spectra and triangular filterbanks, cepstral coefficients, the 11-statistic
//! trajectory features, from-scratch classifiers (SMO-trained SVM, pooled
//! covariance LDA, CART), evaluation metrics, threshold-driven feature
//! selection and the knee-grouped cross-validation experiments. A synthetic
//! gait-sound generator supplies labelled corpora for testing.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line front end and thread pools live in the `kneeae` crate.
//!
//! ```text
//! Recording -> resample -> rms_normalize -> segment
//!           -> enframe -> dft_magnitude -> compress (lin/mel) -> cepstra
//!           -> delta / delta-delta -> stats11 -> FeatureSet {D,E,F,L,M}
//!           -> score_features -> build_subsets -> select_best -> EvalReport
//! ```
#![no_std]
#![warn(clippy::all)]

extern crate alloc;

pub mod cepstral;
pub mod classify;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod features;
pub mod fft;
pub mod linalg;
pub mod matrix;
pub mod metrics;
pub mod rng;
pub mod selection;
pub mod signal;
pub mod spectral;
pub mod synthgen;

pub use error::{Error, Result};
pub use exec::{Runner, Sequential};
pub use matrix::Matrix;
pub use signal::{Label, Recording, Segment};
