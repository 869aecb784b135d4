//! Random forest of Gini decision trees.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::seed;
use crate::segment::Label;

use super::svm::check_classes;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ForestParams {
    pub trees: usize,
    /// `None` grows until leaves are pure.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Draw a bootstrap sample of training size per tree.
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            trees: 50,
            max_depth: None,
            min_leaf: 1,
            bootstrap: true,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.trees == 0 {
            return Err(Error::InvalidParameter("rf.trees must be >= 1"));
        }
        if self.min_leaf == 0 {
            return Err(Error::InvalidParameter("rf.min_leaf must be >= 1"));
        }
        Ok(())
    }
}

/// Features tried per split: `floor(sqrt(n))`, at least one.
pub fn features_per_split(n_features: usize) -> usize {
    (libm::floor(libm::sqrt(n_features as f64)) as usize).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf(Label),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Nodes in an arena; node 0 is the root. Samples with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> Label {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf(l) => return *l,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub n_features: usize,
    pub trees: Vec<Tree>,
}

impl Forest {
    /// Number of trees voting PD.
    pub fn votes(&self, x: &[f64]) -> usize {
        self.trees
            .iter()
            .filter(|t| t.predict(x) == Label::Parkinson)
            .count()
    }

    /// `2 * (PD vote fraction) - 1`.
    pub fn score(&self, x: &[f64]) -> f64 {
        2.0 * self.votes(x) as f64 / self.trees.len() as f64 - 1.0
    }
}

struct Builder<'a> {
    xs: &'a [&'a [f64]],
    ys: &'a [Label],
    params: &'a ForestParams,
    mtry: usize,
    nodes: Vec<Node>,
    scratch: Vec<(f64, bool)>,
}

fn majority(pos: usize, total: usize) -> Label {
    if 2 * pos > total {
        Label::Parkinson
    } else {
        Label::Healthy
    }
}

fn gini(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

impl Builder<'_> {
    fn build(&mut self, idx: &mut [usize], depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let total = idx.len();
        let pos = idx.iter().filter(|&&i| self.ys[i] == Label::Parkinson).count();
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf(majority(pos, total)));
        let depth_capped = self.params.max_depth.is_some_and(|d| depth >= d);
        if pos == 0 || pos == total || total < 2 * self.params.min_leaf || depth_capped {
            return at;
        }

        let n_features = self.xs[idx[0]].len();
        let mut order: Vec<usize> = (0..n_features).collect();
        let mut best: Option<(f64, usize, f64)> = None;
        for k in 0..n_features {
            // lazy Fisher-Yates: features beyond the first `mtry` are only
            // visited when none of the sampled ones can split
            let pick = rng.random_range(k..n_features);
            order.swap(k, pick);
            if k >= self.mtry && best.is_some() {
                break;
            }
            if let Some((imp, thr)) = self.best_split(idx, order[k], pos) {
                if best.is_none_or(|(b, _, _)| imp < b) {
                    best = Some((imp, order[k], thr));
                }
            }
        }
        let Some((_, feature, threshold)) = best else {
            return at;
        };

        let mut split = 0;
        for i in 0..idx.len() {
            if self.xs[idx[i]][feature] <= threshold {
                idx.swap(i, split);
                split += 1;
            }
        }
        let (l, r) = idx.split_at_mut(split);
        let left = self.build(l, depth + 1, rng);
        let right = self.build(r, depth + 1, rng);
        self.nodes[at] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        at
    }

    /// Lowest weighted Gini over thresholds of `feature`, or `None` when the
    /// feature is constant on `idx` or `min_leaf` forbids every cut.
    fn best_split(&mut self, idx: &[usize], feature: usize, pos: usize) -> Option<(f64, f64)> {
        self.scratch.clear();
        self.scratch
            .extend(idx.iter().map(|&i| (self.xs[i][feature], self.ys[i] == Label::Parkinson)));
        self.scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total = self.scratch.len();
        let min_leaf = self.params.min_leaf;
        let mut left_pos = 0;
        let mut best: Option<(f64, f64)> = None;
        for cut in 1..total {
            if self.scratch[cut - 1].1 {
                left_pos += 1;
            }
            let (a, b) = (self.scratch[cut - 1].0, self.scratch[cut].0);
            if a == b || cut < min_leaf || total - cut < min_leaf {
                continue;
            }
            let imp = (cut as f64 * gini(left_pos, cut)
                + (total - cut) as f64 * gini(pos - left_pos, total - cut))
                / total as f64;
            if best.is_none_or(|(bi, _)| imp < bi) {
                let mid = a + (b - a) / 2.0;
                let thr = if mid < b { mid } else { a };
                best = Some((imp, thr));
            }
        }
        best
    }
}

pub fn train(params: &ForestParams, xs: &[&[f64]], labels: &[Label], seed: u64) -> Result<Forest> {
    params.validate()?;
    check_classes(labels)?;
    let n = xs.len();
    let n_features = xs[0].len();
    let mut builder = Builder {
        xs,
        ys: labels,
        params,
        mtry: features_per_split(n_features),
        nodes: Vec::new(),
        scratch: Vec::with_capacity(n),
    };
    let mut trees = Vec::with_capacity(params.trees);
    for t in 0..params.trees {
        let mut rng = seed::rng(seed::derive(seed, t as u64));
        let mut idx: Vec<usize> = if params.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        builder.nodes = Vec::new();
        builder.build(&mut idx, 0, &mut rng);
        trees.push(Tree {
            nodes: core::mem::take(&mut builder.nodes),
        });
    }
    Ok(Forest { n_features, trees })
}
