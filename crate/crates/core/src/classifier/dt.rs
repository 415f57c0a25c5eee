use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::ClassifierError;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub enum TreeNode<F: Scalar> {
    /// Samples with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: F, left: usize, right: usize },
    Leaf { distribution: Vec<F>, class: usize },
}

/// Binary classification tree grown on weighted Gini impurity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DecisionTree<F: Scalar> {
    dim: usize,
    n_classes: usize,
    nodes: Vec<TreeNode<F>>,
}

/// Gini impurity of a weighted class distribution.
pub fn gini<F: Scalar>(mass: &[F]) -> F {
    let total: F = mass.iter().copied().sum();
    if total <= F::zero() {
        return F::zero();
    }
    F::one() - mass.iter().map(|&m| (m / total) * (m / total)).sum::<F>()
}

fn argmax<F: Scalar>(mass: &[F]) -> usize {
    let mut best = 0;
    for (i, &m) in mass.iter().enumerate() {
        if m > mass[best] {
            best = i;
        }
    }
    best
}

struct Split<F> {
    feature: usize,
    threshold: F,
    cost: F,
}

struct Grower<'a, F: Scalar> {
    x: &'a [Vec<F>],
    y: &'a [usize],
    class_weight: &'a [F],
    nodes: Vec<TreeNode<F>>,
}

impl<'a, F: Scalar> Grower<'a, F> {
    fn mass(&self, idx: &[usize]) -> Vec<F> {
        let mut m = vec![F::zero(); self.class_weight.len()];
        for &i in idx {
            m[self.y[i]] = m[self.y[i]] + self.class_weight[self.y[i]];
        }
        m
    }

    fn best_split(&self, idx: &[usize], parent: &[F]) -> Option<Split<F>> {
        let k = parent.len();
        let total: F = parent.iter().copied().sum();
        let mut best: Option<Split<F>> = None;
        let mut order = idx.to_vec();
        for f in 0..self.x[idx[0]].len() {
            let v0 = self.x[idx[0]][f];
            if idx.iter().all(|&i| self.x[i][f] == v0) {
                continue;
            }
            order.sort_by(|&a, &b| self.x[a][f].partial_cmp(&self.x[b][f]).unwrap_or(Ordering::Equal));
            if self.x[order[0]][f] == self.x[order[order.len() - 1]][f] {
                continue;
            }
            let mut left = vec![F::zero(); k];
            let mut wl = F::zero();
            for w in 0..order.len() - 1 {
                let c = self.y[order[w]];
                left[c] = left[c] + self.class_weight[c];
                wl = wl + self.class_weight[c];
                let (a, b) = (self.x[order[w]][f], self.x[order[w + 1]][f]);
                if !(a < b) {
                    continue;
                }
                let mid = a + (b - a) / (F::one() + F::one());
                if !(a < mid && mid < b) {
                    continue;
                }
                let right: Vec<F> = parent.iter().zip(&left).map(|(&p, &l)| p - l).collect();
                let cost = wl * gini(&left) + (total - wl) * gini(&right);
                if best.as_ref().is_none_or(|s| cost < s.cost) {
                    best = Some(Split { feature: f, threshold: mid, cost });
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: Vec<usize>) -> usize {
        let mass = self.mass(&idx);
        let at = self.nodes.len();
        let pure = idx.iter().all(|&i| self.y[i] == self.y[idx[0]]);
        let split = if pure || idx.len() < 2 { None } else { self.best_split(&idx, &mass) };
        let Some(s) = split else {
            let class = argmax(&mass);
            self.nodes.push(TreeNode::Leaf { distribution: mass, class });
            return at;
        };
        self.nodes.push(TreeNode::Leaf { distribution: Vec::new(), class: 0 });
        let (l, r): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| self.x[i][s.feature] <= s.threshold);
        let left = self.grow(l);
        let right = self.grow(r);
        self.nodes[at] = TreeNode::Split { feature: s.feature, threshold: s.threshold, left, right };
        at
    }
}

impl<F: Scalar> DecisionTree<F> {
    /// Grows until every leaf is pure, holds a single sample, or has no two
    /// distinct values on any feature. Ties between equally good splits go
    /// to the lowest feature index, then the lowest threshold.
    pub fn fit(x: &[Vec<F>], y: &[usize], class_weight: &[F]) -> Result<Self, ClassifierError> {
        if x.is_empty() || x.len() != y.len() {
            return Err(ClassifierError::EmptyTrainingSet);
        }
        let dim = x[0].len();
        if let Some(bad) = x.iter().find(|r| r.len() != dim) {
            return Err(ClassifierError::DimensionMismatch { expected: dim, found: bad.len() });
        }
        if let Some(&c) = y.iter().find(|&&c| c >= class_weight.len()) {
            return Err(ClassifierError::UnknownClass(c));
        }
        let mut g = Grower { x, y, class_weight, nodes: Vec::new() };
        g.grow((0..x.len()).collect());
        Ok(DecisionTree { dim, n_classes: class_weight.len(), nodes: g.nodes })
    }

    pub fn predict(&self, x: &[F]) -> Result<usize, ClassifierError> {
        if x.len() != self.dim {
            return Err(ClassifierError::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Split { feature, threshold, left, right } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
                TreeNode::Leaf { class, .. } => return Ok(*class),
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn nodes(&self) -> &[TreeNode<F>] {
        &self.nodes
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn d<F: Scalar>(nodes: &[TreeNode<F>], at: usize) -> usize {
            match &nodes[at] {
                TreeNode::Split { left, right, .. } => 1 + d(nodes, *left).max(d(nodes, *right)),
                TreeNode::Leaf { .. } => 0,
            }
        }
        d(&self.nodes, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gini_values() {
        assert_eq!(gini(&[3.0f64, 0.0]), 0.0);
        assert_eq!(gini(&[2.0f64, 2.0]), 0.5);
    }

    #[test]
    fn separable_depth_one() {
        let x = vec![vec![0.0f64, 5.0], vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]];
        let y = vec![0, 0, 1, 1];
        let t = DecisionTree::fit(&x, &y, &[1.0, 1.0]).unwrap();
        assert_eq!(t.depth(), 1);
        assert_eq!(t.nodes()[0], TreeNode::Split { feature: 0, threshold: 1.5, left: 1, right: 2 });
        for (r, &c) in x.iter().zip(&y) {
            assert_eq!(t.predict(r).unwrap(), c);
        }
    }

    #[test]
    fn identical_features_heavier_class() {
        let x = vec![vec![1.0f32]; 3];
        let y = vec![0, 1, 1];
        let t = DecisionTree::fit(&x, &y, &[3.0, 1.0]).unwrap();
        assert_eq!(t.leaf_count(), 1);
        assert_eq!(t.predict(&[1.0]).unwrap(), 0);
        let t = DecisionTree::fit(&x, &y, &[1.0, 1.0]).unwrap();
        assert_eq!(t.predict(&[1.0]).unwrap(), 1);
    }

    #[test]
    fn exact_tie_goes_to_lower_class() {
        let x = vec![vec![1.0f64]; 2];
        let t = DecisionTree::fit(&x, &[1, 0], &[1.0, 1.0]).unwrap();
        assert_eq!(t.predict(&[1.0]).unwrap(), 0);
    }

    #[test]
    fn xor_needs_zero_gain_split() {
        let x = vec![vec![0.0f64, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let y = vec![0, 1, 1, 0];
        let t = DecisionTree::fit(&x, &y, &[1.0, 1.0]).unwrap();
        for (r, &c) in x.iter().zip(&y) {
            assert_eq!(t.predict(r).unwrap(), c);
        }
    }

    #[test]
    fn dimension_checks() {
        let t = DecisionTree::fit(&[vec![0.0f64, 1.0]], &[0], &[1.0]).unwrap();
        assert!(matches!(t.predict(&[0.0]), Err(ClassifierError::DimensionMismatch { .. })));
        assert!(matches!(
            DecisionTree::fit(&[vec![0.0f64], vec![0.0, 1.0]], &[0, 0], &[1.0]),
            Err(ClassifierError::DimensionMismatch { .. })
        ));
    }
}
