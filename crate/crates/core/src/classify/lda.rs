//! Linear discriminant analysis with a shared (pooled) covariance.
//!
//! The pooled covariance gets a ridge of `1e-6 * trace / d` on its diagonal so
//! that it stays invertible when features outnumber rows. Wide problems are
//! solved through the `n x n` Woodbury form instead of the `d x d` system.
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve};
use crate::matrix::{dot, Matrix};
use crate::signal::Label;

pub const RIDGE_FACTOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub mean_normal: Vec<f64>,
    pub mean_abnormal: Vec<f64>,
    pub prior_normal: f64,
    pub prior_abnormal: f64,
    pub ridge: f64,
    /// Regularised pooled covariance; kept only when it was formed explicitly.
    pub covariance: Option<Matrix>,
    /// `Sigma^-1 (mu_abnormal - mu_normal)`.
    pub weights: Vec<f64>,
    pub offset: f64,
}

impl LdaModel {
    /// Log posterior ratio `log p(abnormal | x) - log p(normal | x)`.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::Shape { expected: self.weights.len(), got: x.len() });
        }
        Ok(dot(&self.weights, x) + self.offset)
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(Label::from_sign(self.score(x)?))
    }
}

pub fn lda_train(x: &Matrix, y: &[Label]) -> Result<LdaModel> {
    let (n, d) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(Error::Shape { expected: n, got: y.len() });
    }
    let n_abn = y.iter().filter(|l| l.is_positive()).count();
    let n_norm = n - n_abn;
    if n_abn < 2 || n_norm < 2 {
        return Err(Error::DegenerateTraining("LDA needs at least two rows per class"));
    }
    if x.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("LDA training data"));
    }

    let mut mean = [vec![0.0; d], vec![0.0; d]];
    for (row, l) in x.iter_rows().zip(y) {
        let m = &mut mean[l.is_positive() as usize];
        m.iter_mut().zip(row).for_each(|(a, b)| *a += b);
    }
    mean[0].iter_mut().for_each(|v| *v /= n_norm as f64);
    mean[1].iter_mut().for_each(|v| *v /= n_abn as f64);

    // centred rows scaled so that A'A is the pooled covariance
    let scale = 1.0 / ((n - 2) as f64).sqrt();
    let mut centred = Matrix::zeros(n, d);
    for (r, (row, l)) in x.iter_rows().zip(y).enumerate() {
        let m = &mean[l.is_positive() as usize];
        for (c, o) in centred.row_mut(r).iter_mut().enumerate() {
            *o = (row[c] - m[c]) * scale;
        }
    }
    let trace: f64 = centred.as_slice().iter().map(|v| v * v).sum();
    let ridge = if trace > 0.0 { RIDGE_FACTOR * trace / d as f64 } else { RIDGE_FACTOR };
    let diff: Vec<f64> = mean[1].iter().zip(&mean[0]).map(|(a, b)| a - b).collect();

    let (weights, covariance) = if d <= n {
        let mut cov = centred.transpose().matmul(&centred)?;
        for i in 0..d {
            cov.set(i, i, cov.get(i, i) + ridge);
        }
        let l = cholesky(&cov).ok_or(Error::DegenerateTraining("pooled covariance not positive definite"))?;
        (cholesky_solve(&l, &diff), Some(cov))
    } else {
        // (ridge I + A'A)^-1 v = (v - A'(ridge I + AA')^-1 A v) / ridge
        let mut gram = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = dot(centred.row(i), centred.row(j));
                gram.set(i, j, v);
                gram.set(j, i, v);
            }
            gram.set(i, i, gram.get(i, i) + ridge);
        }
        let l = cholesky(&gram).ok_or(Error::DegenerateTraining("pooled covariance not positive definite"))?;
        let av: Vec<f64> = centred.iter_rows().map(|r| dot(r, &diff)).collect();
        let z = cholesky_solve(&l, &av);
        let mut w = diff.clone();
        for (row, &zi) in centred.iter_rows().zip(&z) {
            w.iter_mut().zip(row).for_each(|(wk, &a)| *wk -= a * zi);
        }
        w.iter_mut().for_each(|v| *v /= ridge);
        (w, None)
    };

    let prior_abnormal = n_abn as f64 / n as f64;
    let prior_normal = n_norm as f64 / n as f64;
    let midpoint: Vec<f64> = mean[1].iter().zip(&mean[0]).map(|(a, b)| 0.5 * (a + b)).collect();
    let offset = -dot(&midpoint, &weights) + (prior_abnormal / prior_normal).ln();
    let [mean_normal, mean_abnormal] = mean;
    Ok(LdaModel { mean_normal, mean_abnormal, prior_normal, prior_abnormal, ridge, covariance, weights, offset })
}
