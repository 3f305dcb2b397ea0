//! Cepstral coefficients: floored natural log followed by an orthonormal
//! DCT-II across bands. All `N_B` coefficients are kept, including c0.
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

/// Lower clamp applied before the log so silent bands stay finite.
pub const LOG_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    /// From mel-spaced bands (MFCC).
    Mel,
    /// From linearly spaced bands (LFCC).
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CepstraMatrix {
    pub values: Matrix,
    pub flavor: Flavor,
}

/// Orthonormal DCT-II matrix, row `k` holds basis function `k`.
pub fn dct_matrix(n: usize) -> Matrix {
    let mut d = Matrix::zeros(n, n);
    let s0 = (1.0 / n as f64).sqrt();
    let s = (2.0 / n as f64).sqrt();
    for k in 0..n {
        let scale = if k == 0 { s0 } else { s };
        for m in 0..n {
            d.set(k, m, scale * (PI * k as f64 * (m as f64 + 0.5) / n as f64).cos());
        }
    }
    d
}

pub fn cepstra(compressed: &Matrix, flavor: Flavor) -> CepstraMatrix {
    let n = compressed.cols();
    let basis = dct_matrix(n);
    let mut values = Matrix::zeros(compressed.rows(), n);
    let mut logs: Vec<f64> = Vec::with_capacity(n);
    for t in 0..compressed.rows() {
        logs.clear();
        logs.extend(compressed.row(t).iter().map(|&v| v.max(LOG_FLOOR).ln()));
        let out = values.row_mut(t);
        for (k, o) in out.iter_mut().enumerate() {
            *o = crate::matrix::dot(basis.row(k), &logs);
        }
    }
    CepstraMatrix { values, flavor }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn ones_give_zero_cepstrum() {
        let x = Matrix::from_vec(2, 20, vec![1.0; 40]).unwrap();
        let c = cepstra(&x, Flavor::Mel);
        assert!(c.values.as_slice().iter().all(|&v| v.abs() < 1e-15));
    }

    #[test]
    fn log_cosine_lands_in_coefficient_one() {
        let n = 20;
        let row: Vec<f64> = (0..n).map(|m| (PI * (m as f64 + 0.5) / n as f64).cos().exp()).collect();
        let c = cepstra(&Matrix::from_vec(1, n, row).unwrap(), Flavor::Linear);
        let r = c.values.row(0);
        let energy: f64 = r.iter().map(|v| v * v).sum();
        assert!(r[1] * r[1] / energy > 1.0 - 1e-12);
        // orthonormal scaling: |c1| = sqrt(n/2)
        assert!((r[1] - (n as f64 / 2.0).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn dct_is_orthonormal() {
        let d = dct_matrix(13);
        let dtd = d.transpose().matmul(&d).unwrap();
        for i in 0..13 {
            for j in 0..13 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dtd.get(i, j) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn floor_keeps_zero_bands_finite() {
        let c = cepstra(&Matrix::zeros(1, 8), Flavor::Mel);
        assert!(c.values.as_slice().iter().all(|v| v.is_finite()));
    }
}
