//! Classifiers used by the framework. Labels are encoded normal = -1,
//! abnormal = +1; every model produces a real score where larger means more
//! abnormal.
pub mod cart;
pub mod lda;
pub mod svm;

use alloc::string::String;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng;
use crate::signal::Label;

pub use cart::{cart_grow, cart_train, CartModel};
pub use lda::{lda_train, LdaModel};
pub use svm::{svm_train, svm_train_detailed, Kernel, SvmModel, SvmParams, SvmTraining};

/// Box constraint used throughout the experiments.
pub const BOX_CONSTRAINT: f64 = 1.0;
/// Gaussian kernel width used throughout the experiments.
pub const GAUSSIAN_GAMMA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierKind {
    SvmLinear,
    SvmGaussian,
    Lda,
    Cart,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] =
        [ClassifierKind::SvmLinear, ClassifierKind::SvmGaussian, ClassifierKind::Lda, ClassifierKind::Cart];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::SvmLinear => "svm-linear",
            ClassifierKind::SvmGaussian => "svm-gaussian",
            ClassifierKind::Lda => "lda",
            ClassifierKind::Cart => "cart",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "classifier", rename_all = "lowercase")]
pub enum Model {
    Svm(SvmModel),
    Lda(LdaModel),
    Cart(CartModel),
}

impl Model {
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        match self {
            Model::Svm(m) => m.decision(x),
            Model::Lda(m) => m.score(x),
            Model::Cart(m) => m.score(x),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        match self {
            Model::Svm(m) => m.predict(x),
            Model::Lda(m) => m.predict(x),
            Model::Cart(m) => m.predict(x),
        }
    }
}

/// Train `kind` on `x`, `y`. `seed` drives any internal randomness (CART's
/// pruning cross-validation).
pub fn train(kind: ClassifierKind, x: &Matrix, y: &[Label], seed: u64) -> Result<Model> {
    Ok(match kind {
        ClassifierKind::SvmLinear => Model::Svm(svm_train(x, y, &SvmParams::linear())?),
        ClassifierKind::SvmGaussian => Model::Svm(svm_train(x, y, &SvmParams::gaussian(GAUSSIAN_GAMMA))?),
        ClassifierKind::Lda => Model::Lda(lda_train(x, y)?),
        ClassifierKind::Cart => Model::Cart(cart_train(x, y, &mut rng::rng_for(seed, &[rng::stream::CLASSIFIER]))?),
    })
}

pub fn parse_kind(s: &str) -> Result<ClassifierKind> {
    ClassifierKind::parse(s).ok_or_else(|| Error::InvalidParameter(String::from(s)))
}
