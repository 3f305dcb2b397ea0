//! Classification tree: exhaustive Gini splits, grown to purity, then
//! cost-complexity pruned.
//!
//! Node risk is `(n_t / N) * gini(t)`. Each internal node records the
//! complexity parameter at which weakest-link pruning collapses it, so any
//! subtree of the pruning sequence can be evaluated from the full tree. The
//! operating complexity is chosen by an internal cross-validation on the
//! training rows.
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::signal::Label;

pub const PRUNING_FOLDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    /// Training rows reaching this node, `[normal, abnormal]`.
    pub counts: [usize; 2],
    pub split: Option<Split>,
    /// Complexity at which this node becomes a leaf (infinite for leaves).
    pub prune_alpha: f64,
}

impl Node {
    fn gini(&self) -> f64 {
        gini(self.counts)
    }

    fn abnormal_fraction(&self) -> f64 {
        let n = self.counts[0] + self.counts[1];
        if n == 0 {
            0.5
        } else {
            self.counts[1] as f64 / n as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartModel {
    pub nodes: Vec<Node>,
    pub dim: usize,
    /// Distinct complexities of the pruning sequence, ascending, starting at 0.
    pub pruning_sequence: Vec<f64>,
    /// Complexity used by [`CartModel::score`].
    pub alpha: f64,
}

#[inline]
fn gini(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p = counts[1] as f64 / n;
    2.0 * p * (1.0 - p)
}

impl CartModel {
    fn leaf_for(&self, x: &[f64], alpha: f64) -> &Node {
        let mut node = &self.nodes[0];
        while let Some(s) = &node.split {
            if node.prune_alpha <= alpha {
                break;
            }
            node = if x[s.feature] <= s.threshold { &self.nodes[s.left] } else { &self.nodes[s.right] };
        }
        node
    }

    /// Abnormal-class fraction of the leaf reached by `x`.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        self.score_at(x, self.alpha)
    }

    pub fn score_at(&self, x: &[f64], alpha: f64) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::Shape { expected: self.dim, got: x.len() });
        }
        Ok(self.leaf_for(x, alpha).abnormal_fraction())
    }

    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(if self.score(x)? > 0.5 { Label::Abnormal } else { Label::Normal })
    }

    fn walk(&self, alpha: f64, mut visit: impl FnMut(usize, usize)) {
        let mut stack = vec![(0usize, 0usize)];
        while let Some((id, depth)) = stack.pop() {
            visit(id, depth);
            let node = &self.nodes[id];
            if let Some(s) = &node.split {
                if node.prune_alpha > alpha {
                    stack.push((s.left, depth + 1));
                    stack.push((s.right, depth + 1));
                }
            }
        }
    }

    fn is_leaf_at(&self, id: usize, alpha: f64) -> bool {
        let n = &self.nodes[id];
        n.split.is_none() || n.prune_alpha <= alpha
    }

    pub fn leaf_count(&self, alpha: f64) -> usize {
        let mut k = 0;
        self.walk(alpha, |id, _| k += self.is_leaf_at(id, alpha) as usize);
        k
    }

    pub fn depth(&self, alpha: f64) -> usize {
        let mut d = 0;
        self.walk(alpha, |_, depth| d = d.max(depth));
        d
    }
}

fn grow(x: &Matrix, y: &[Label], rows: Vec<usize>, nodes: &mut Vec<Node>) -> usize {
    let mut counts = [0usize; 2];
    for &r in &rows {
        counts[y[r].is_positive() as usize] += 1;
    }
    let id = nodes.len();
    nodes.push(Node { counts, split: None, prune_alpha: f64::INFINITY });
    if counts[0] == 0 || counts[1] == 0 {
        return id;
    }
    let Some((feature, threshold)) = best_split(x, y, &rows, counts) else {
        return id;
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| x.get(r, feature) <= threshold);
    drop(rows);
    let left = grow(x, y, left_rows, nodes);
    let right = grow(x, y, right_rows, nodes);
    nodes[id].split = Some(Split { feature, threshold, left, right });
    id
}

/// Split with the largest Gini decrease over all features and all midpoints
/// between consecutive distinct values. Ties keep the first candidate found.
fn best_split(x: &Matrix, y: &[Label], rows: &[usize], counts: [usize; 2]) -> Option<(usize, f64)> {
    let n = rows.len() as f64;
    let parent = gini(counts);
    let mut best: Option<(f64, usize, f64)> = None;
    let mut column: Vec<(f64, bool)> = Vec::with_capacity(rows.len());
    for f in 0..x.cols() {
        column.clear();
        column.extend(rows.iter().map(|&r| (x.get(r, f), y[r].is_positive())));
        column.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut left = [0usize; 2];
        for i in 0..column.len() - 1 {
            left[column[i].1 as usize] += 1;
            if column[i].0 == column[i + 1].0 {
                continue;
            }
            let right = [counts[0] - left[0], counts[1] - left[1]];
            let nl = (left[0] + left[1]) as f64;
            let gain = parent - (nl / n) * gini(left) - ((n - nl) / n) * gini(right);
            if best.is_none_or(|(g, _, _)| gain > g + 1e-15) {
                best = Some((gain, f, 0.5 * (column[i].0 + column[i + 1].0)));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}

/// Weakest-link pruning: assigns every internal node the complexity at which
/// it collapses and returns the ascending sequence of distinct complexities.
fn assign_prune_alphas(nodes: &mut [Node], total: usize) -> Vec<f64> {
    let risk = |n: &Node| (n.counts[0] + n.counts[1]) as f64 / total as f64 * n.gini();
    let mut collapsed = vec![false; nodes.len()];
    let mut sequence = vec![0.0];
    loop {
        // subtree risk and leaf count of the current (partially pruned) tree
        let m = nodes.len();
        let mut sub_risk = vec![0.0; m];
        let mut leaves = vec![0usize; m];
        for id in (0..m).rev() {
            match (&nodes[id].split, collapsed[id]) {
                (Some(s), false) => {
                    sub_risk[id] = sub_risk[s.left] + sub_risk[s.right];
                    leaves[id] = leaves[s.left] + leaves[s.right];
                }
                _ => {
                    sub_risk[id] = risk(&nodes[id]);
                    leaves[id] = 1;
                }
            }
        }
        if leaves[0] <= 1 {
            break;
        }
        let mut weakest = f64::INFINITY;
        let g: Vec<f64> = (0..m)
            .map(|id| {
                if nodes[id].split.is_some() && !collapsed[id] && reachable(nodes, &collapsed, id) {
                    let v = ((risk(&nodes[id]) - sub_risk[id]) / (leaves[id] - 1) as f64).max(0.0);
                    weakest = weakest.min(v);
                    v
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        for id in 0..m {
            if g[id] <= weakest + 1e-12 {
                collapsed[id] = true;
                nodes[id].prune_alpha = weakest;
                collapse_below(nodes, &mut collapsed, id, weakest);
            }
        }
        if weakest > *sequence.last().unwrap() {
            sequence.push(weakest);
        }
    }
    sequence
}

fn reachable(nodes: &[Node], collapsed: &[bool], target: usize) -> bool {
    let mut id = 0;
    loop {
        if id == target {
            return true;
        }
        if collapsed[id] {
            return false;
        }
        match &nodes[id].split {
            Some(s) => id = if target >= s.right { s.right } else { s.left },
            None => return false,
        }
    }
}

fn collapse_below(nodes: &mut [Node], collapsed: &mut [bool], id: usize, alpha: f64) {
    if let Some(s) = nodes[id].split.clone() {
        for child in [s.left, s.right] {
            if nodes[child].split.is_some() && !collapsed[child] {
                collapsed[child] = true;
                nodes[child].prune_alpha = alpha;
            }
            collapse_below(nodes, collapsed, child, alpha);
        }
    }
}

/// Fully grown tree with its pruning sequence, operating at complexity 0.
pub fn cart_grow(x: &Matrix, y: &[Label]) -> Result<CartModel> {
    let n = x.rows();
    if n == 0 {
        return Err(Error::EmptyInput("CART training set"));
    }
    if y.len() != n {
        return Err(Error::Shape { expected: n, got: y.len() });
    }
    if x.as_slice().iter().any(|v| v.is_nan()) {
        return Err(Error::NonFinite("CART training data"));
    }
    let mut nodes = Vec::new();
    grow(x, y, (0..n).collect(), &mut nodes);
    let pruning_sequence = assign_prune_alphas(&mut nodes, n);
    Ok(CartModel { nodes, dim: x.cols(), pruning_sequence, alpha: 0.0 })
}

/// Grow, then prune at the complexity with the lowest internal
/// cross-validated error (ties go to the simpler tree).
pub fn cart_train(x: &Matrix, y: &[Label], rng: &mut ChaCha8Rng) -> Result<CartModel> {
    let mut model = cart_grow(x, y)?;
    let n = x.rows();
    let folds = PRUNING_FOLDS.min(n);
    if folds < 2 || model.pruning_sequence.len() < 2 {
        return Ok(model);
    }
    let seq = &model.pruning_sequence;
    // geometric midpoints of consecutive complexities
    let probes: Vec<f64> = (0..seq.len())
        .map(|k| if k + 1 < seq.len() { (seq[k] * seq[k + 1]).sqrt() } else { seq[k] })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut errors = vec![0usize; probes.len()];
    for f in 0..folds {
        let (test, train): (Vec<(usize, usize)>, Vec<(usize, usize)>) =
            order.iter().copied().enumerate().partition(|(i, _)| i % folds == f);
        let test: Vec<usize> = test.into_iter().map(|(_, r)| r).collect();
        let train: Vec<usize> = train.into_iter().map(|(_, r)| r).collect();
        if train.is_empty() || test.is_empty() {
            continue;
        }
        let xt = x.select_rows(&train);
        let yt: Vec<Label> = train.iter().map(|&r| y[r]).collect();
        let sub = cart_grow(&xt, &yt)?;
        for (k, &a) in probes.iter().enumerate() {
            for &r in &test {
                let s = sub.score_at(x.row(r), a)?;
                let pred = if s > 0.5 { Label::Abnormal } else { Label::Normal };
                errors[k] += (pred != y[r]) as usize;
            }
        }
    }
    let best = (0..probes.len()).rev().min_by_key(|&k| errors[k]).unwrap();
    model.alpha = seq[best];
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn lab(v: &[u8]) -> Vec<Label> {
        v.iter().map(|&b| if b == 1 { Label::Abnormal } else { Label::Normal }).collect()
    }

    #[test]
    fn pure_data_is_one_leaf() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let m = cart_grow(&x, &lab(&[1, 1, 1])).unwrap();
        assert_eq!(m.nodes.len(), 1);
        assert_eq!(m.score(&[0.0]).unwrap(), 1.0);
    }

    #[test]
    fn one_dimensional_threshold() {
        let x = Matrix::from_rows(&[vec![0.1], vec![0.3], vec![0.45], vec![0.6], vec![0.9]]).unwrap();
        let m = cart_grow(&x, &lab(&[0, 0, 0, 1, 1])).unwrap();
        assert_eq!(m.depth(0.0), 1);
        let t = m.nodes[0].split.as_ref().unwrap().threshold;
        assert!(t > 0.45 && t < 0.6);
    }

    #[test]
    fn checkerboard_needs_depth_two() {
        let x = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let y = lab(&[0, 0, 1, 1]);
        let m = cart_grow(&x, &y).unwrap();
        assert_eq!(m.depth(0.0), 2);
        for (row, l) in x.iter_rows().zip(&y) {
            assert_eq!(m.predict(row).unwrap(), *l);
        }
    }

    #[test]
    fn pruning_sequence_ends_at_root() {
        let x = Matrix::from_rows(&(0..40).map(|i| vec![i as f64, ((i * 7) % 11) as f64]).collect::<Vec<_>>()).unwrap();
        let y: Vec<Label> = (0..40).map(|i| if (i * 13) % 5 < 2 { Label::Abnormal } else { Label::Normal }).collect();
        let m = cart_grow(&x, &y).unwrap();
        let seq = &m.pruning_sequence;
        assert!(seq.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(m.leaf_count(*seq.last().unwrap()), 1);
        // leaf count shrinks along the sequence
        let counts: Vec<usize> = seq.iter().map(|&a| m.leaf_count(a)).collect();
        assert!(counts.windows(2).all(|w| w[1] < w[0]));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let trained = cart_train(&x, &y, &mut rng).unwrap();
        assert!(seq.contains(&trained.alpha));
    }
}
