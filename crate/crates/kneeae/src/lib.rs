//! File formats, feature caching, a thread pool and the `kneeae` command line
//! tool around [`kneeae_core`].
//!
//! | module | contents |
//! |---|---|
//! | [`wav`] | PCM WAV reading (first channel, scaled to [-1, 1]) and 16-bit writing |
//! | [`manifest`] | corpus manifest CSV and content hashing |
//! | [`cache`] | on-disk feature-set cache and a caching `FeatureSource` |
//! | [`formats`] | feature, filterbank, ROC and curve CSVs; JSON helpers |
//! | [`reports`] | report file types (schemas in `schemas/`) |
//! | [`runner`] | scoped thread pool implementing `Runner` |
//! | [`config`] | experiment configuration file |
//! | [`cli`] | argument parsing and subcommands |
pub mod cache;
pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod manifest;
pub mod reports;
pub mod runner;
pub mod wav;

pub use error::{Error, Result};
pub use kneeae_core as core;
