//! L1 soft-margin support vector machine trained with sequential minimal
//! optimisation.
//!
//! The dual being solved is
//!
//! ```text
//! min  1/2 a'Qa - e'a    s.t.  0 <= a_i <= C,  y'a = 0,   Q_ij = y_i y_j k(x_i, x_j)
//! ```
//!
//! Each step takes the maximal violator `i` and picks `j` by the second-order
//! gain of the pair, updates both analytically and stops once the KKT gap
//! drops below the tolerance. Rows are put into a canonical order before training, so the
//! model does not depend on the order the caller supplied them in.
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, sq_dist, Matrix};
use crate::signal::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    /// `exp(-gamma * |x1 - x2|^2)`
    Gaussian { gamma: f64 },
}

impl Kernel {
    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(a, b),
            Kernel::Gaussian { gamma } => (-gamma * sq_dist(a, b)).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub kernel: Kernel,
    /// Box constraint.
    pub c: f64,
    /// Stopping tolerance on the maximal KKT violation.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { kernel: Kernel::Linear, c: 1.0, tolerance: 1e-4, max_iterations: 10_000_000 }
    }
}

impl SvmParams {
    pub fn linear() -> Self {
        Self::default()
    }

    pub fn gaussian(gamma: f64) -> Self {
        Self { kernel: Kernel::Gaussian { gamma }, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub c: f64,
    pub support_vectors: Matrix,
    /// `alpha_s * y_s` per support vector.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    /// Primal weights, linear kernel only.
    pub weights: Option<Vec<f64>>,
}

impl SvmModel {
    pub fn dim(&self) -> usize {
        self.support_vectors.cols()
    }

    /// `sum_s alpha_s y_s k(x_s, x) + b`.
    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::Shape { expected: self.dim(), got: x.len() });
        }
        Ok(self.decision_unchecked(x))
    }

    #[inline]
    pub(crate) fn decision_unchecked(&self, x: &[f64]) -> f64 {
        if let Some(w) = &self.weights {
            return dot(w, x) + self.bias;
        }
        self.support_vectors
            .iter_rows()
            .zip(&self.dual_coef)
            .map(|(sv, &c)| c * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(Label::from_sign(self.decision(x)?))
    }
}

/// Solver outcome with the dual solution in the caller's row order.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmTraining {
    pub model: SvmModel,
    pub alpha: Vec<f64>,
    /// Dual objective `e'a - 1/2 a'Qa` at the solution.
    pub objective: f64,
    /// Final KKT gap `m(a) - M(a)`.
    pub kkt_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn svm_train(x: &Matrix, y: &[Label], params: &SvmParams) -> Result<SvmModel> {
    svm_train_detailed(x, y, params).map(|t| t.model)
}

/// Full symmetric kernel matrix, row-major. Accumulates one feature at a
/// time over contiguous columns so the inner loop vectorises.
fn gram(x: &Matrix, kernel: Kernel) -> Vec<f64> {
    let (n, d) = (x.rows(), x.cols());
    let xt = x.transpose();
    let mut k = vec![0.0; n * n];
    for c in 0..d {
        let col = xt.row(c);
        for i in 0..n {
            let xi = col[i];
            let row = &mut k[i * n..i * n + i + 1];
            match kernel {
                Kernel::Linear => row.iter_mut().zip(&col[..=i]).for_each(|(r, &xj)| *r += xi * xj),
                Kernel::Gaussian { .. } => {
                    row.iter_mut().zip(&col[..=i]).for_each(|(r, &xj)| *r += (xi - xj) * (xi - xj))
                }
            }
        }
    }
    for i in 0..n {
        if let Kernel::Gaussian { gamma } = kernel {
            for j in 0..=i {
                k[i * n + j] = (-gamma * k[i * n + j]).exp();
            }
        }
        for j in 0..i {
            k[j * n + i] = k[i * n + j];
        }
    }
    k
}

fn canonical_order(x: &Matrix, y: &[Label]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.rows()).collect();
    order.sort_by(|&a, &b| {
        for (p, q) in x.row(a).iter().zip(x.row(b)) {
            match p.total_cmp(q) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        y[a].cmp(&y[b])
    });
    order
}

pub fn svm_train_detailed(x: &Matrix, y: &[Label], params: &SvmParams) -> Result<SvmTraining> {
    let n = x.rows();
    if y.len() != n {
        return Err(Error::Shape { expected: n, got: y.len() });
    }
    if !y.contains(&Label::Normal) || !y.contains(&Label::Abnormal) {
        return Err(Error::DegenerateTraining("SVM needs rows of both classes"));
    }
    if x.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("SVM training data"));
    }
    if !(params.c > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("box constraint {}", params.c)));
    }

    let order = canonical_order(x, y);
    let xs = x.select_rows(&order);
    let ys: Vec<f64> = order.iter().map(|&i| y[i].sign()).collect();
    let c = params.c;

    // Unsigned kernel matrix; Q_ij = y_i y_j K_ij is never formed.
    let k = gram(&xs, params.kernel);
    let kd: Vec<f64> = (0..n).map(|t| k[t * n + t]).collect();

    // g_t = -y_t * grad_t, with grad = Q a - e. Membership of I_up / I_low is
    // kept as +-inf sentinels so the selection scans are branch-light.
    let mut alpha = vec![0.0; n];
    let mut g: Vec<f64> = ys.clone();
    let mut up = vec![0.0; n];
    let mut low = vec![0.0; n];
    let set_masks = |t: usize, a: f64, up: &mut [f64], low: &mut [f64]| {
        let pos = ys[t] > 0.0;
        let in_up = if pos { a < c } else { a > 0.0 };
        let in_low = if pos { a > 0.0 } else { a < c };
        up[t] = if in_up { 0.0 } else { f64::NEG_INFINITY };
        low[t] = if in_low { 0.0 } else { f64::INFINITY };
    };
    for t in 0..n {
        set_masks(t, 0.0, &mut up, &mut low);
    }
    let argmax_up = |g: &[f64], up: &[f64]| {
        let (mut best, mut at) = (f64::NEG_INFINITY, usize::MAX);
        for t in 0..n {
            let v = g[t] + up[t];
            if v > best {
                best = v;
                at = t;
            }
        }
        (best, at)
    };

    let mut iterations = 0;
    let mut gap;
    const TAU: f64 = 1e-12;
    let (mut g_max, mut i) = argmax_up(&g, &up);
    loop {
        // second-order choice of j, with min over I_low for the stopping gap
        let mut g_min = f64::INFINITY;
        let mut j = usize::MAX;
        if i != usize::MAX {
            let ki = &k[i * n..(i + 1) * n];
            let kdi = kd[i];
            let mut best = f64::INFINITY;
            for t in 0..n {
                let v = g[t] + low[t];
                g_min = g_min.min(v);
                let b = g_max - v;
                let a = (kdi + kd[t] - 2.0 * ki[t]).max(TAU);
                let o = if b > 0.0 { -(b * b) / a } else { f64::INFINITY };
                if o < best {
                    best = o;
                    j = t;
                }
            }
        } else {
            for t in 0..n {
                g_min = g_min.min(g[t] + low[t]);
            }
        }
        gap = g_max - g_min;
        if gap <= params.tolerance || i == usize::MAX || j == usize::MAX || iterations >= params.max_iterations {
            break;
        }
        iterations += 1;

        let (ki, kj) = (&k[i * n..(i + 1) * n], &k[j * n..(j + 1) * n]);
        let (grad_i, grad_j) = (-ys[i] * g[i], -ys[j] * g[j]);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        let quad = (ki[i] + kj[j] - 2.0 * ki[j]).max(TAU);
        if ys[i] != ys[j] {
            let delta = (-grad_i - grad_j) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let delta = (grad_i - grad_j) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        set_masks(i, ai, &mut up, &mut low);
        set_masks(j, aj, &mut up, &mut low);
        // g_t -= y_t (Q_ti di + Q_tj dj) = y_i K_ti di + y_j K_tj dj, fused
        // with the next I_up scan
        let (ci, cj) = (ys[i] * (ai - old_i), ys[j] * (aj - old_j));
        let (mut best, mut at) = (f64::NEG_INFINITY, usize::MAX);
        for t in 0..n {
            let v = g[t] - ci * ki[t] - cj * kj[t];
            g[t] = v;
            let m = v + up[t];
            if m > best {
                best = m;
                at = t;
            }
        }
        g_max = best;
        i = at;
    }
    let grad: Vec<f64> = g.iter().zip(&ys).map(|(g, y)| -y * g).collect();

    // bias from free vectors, or the midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free_n) = (0.0, 0usize);
    for t in 0..n {
        let yg = ys[t] * grad[t];
        if alpha[t] >= c {
            if ys[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if ys[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free_sum += yg;
            free_n += 1;
        }
    }
    let rho = if free_n > 0 { free_sum / free_n as f64 } else { (ub + lb) / 2.0 };

    let objective = alpha.iter().sum::<f64>() - 0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * (g + 1.0)).sum::<f64>();

    let sv: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    let support_vectors = xs.select_rows(&sv);
    let dual_coef: Vec<f64> = sv.iter().map(|&t| alpha[t] * ys[t]).collect();
    let weights = match params.kernel {
        Kernel::Linear => {
            let mut w = vec![0.0; x.cols()];
            for (row, &coef) in support_vectors.iter_rows().zip(&dual_coef) {
                for (wk, &xk) in w.iter_mut().zip(row) {
                    *wk += coef * xk;
                }
            }
            Some(w)
        }
        Kernel::Gaussian { .. } => None,
    };

    let mut alpha_orig = vec![0.0; n];
    for (pos, &orig) in order.iter().enumerate() {
        alpha_orig[orig] = alpha[pos];
    }
    Ok(SvmTraining {
        model: SvmModel { kernel: params.kernel, c, support_vectors, dual_coef, bias: -rho, weights },
        alpha: alpha_orig,
        objective,
        kkt_gap: gap.max(0.0),
        iterations,
        converged: gap <= params.tolerance,
    })
}
