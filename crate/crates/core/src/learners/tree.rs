//! CART classification trees grown on Gini impurity.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::Matrix;
use crate::Label;

/// Gini impurity `1 - Σ p_c²` of a label multiset given by class counts.
pub fn gini(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n) * (c as f64 / n)).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go to `left`.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// `samples` is the number of (bootstrap) training rows that reached it.
    Leaf { label: Label, samples: usize },
}

/// Nodes in pre-order; the root is node 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_row(&self, row: &[f64]) -> Label {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { label, .. } => return *label,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    /// Longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = (Label, usize)> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { label, samples } => Some((*label, *samples)),
            Node::Split { .. } => None,
        })
    }

    /// Checks child indices point forward and every path ends in a leaf.
    pub fn is_well_formed(&self, n_features: usize) -> bool {
        !self.nodes.is_empty()
            && self.nodes.iter().enumerate().all(|(i, n)| match n {
                Node::Leaf { .. } => true,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    *feature < n_features
                        && !threshold.is_nan()
                        && *left > i
                        && *right > i
                        && *left < self.nodes.len()
                        && *right < self.nodes.len()
                }
            })
    }
}

pub(crate) struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Non-constant features to evaluate per split.
    pub max_features: usize,
}

struct Grower<'a, R> {
    x: &'a Matrix,
    ranks: &'a FeatureRanks,
    /// Class index of every training row.
    y: &'a [usize],
    classes: &'a [Label],
    params: &'a GrowParams,
    rng: &'a mut R,
    nodes: Vec<Node>,
    /// Dense rank of the value above the class index.
    keys: Vec<u64>,
    left: Vec<usize>,
    order: Vec<usize>,
}

const CLASS_BITS: u32 = 16;
const CLASS_MASK: u64 = (1 << CLASS_BITS) - 1;

/// Per-feature dense ranks of the training values, so node scans sort
/// small integers instead of floats.
pub(crate) struct FeatureRanks {
    n_rows: usize,
    /// Feature-major: `ranks[j * n_rows + i]` is the rank of `x[i][j]`.
    ranks: Vec<u32>,
    /// Distinct values of each feature in ascending order.
    values: Vec<Vec<f64>>,
}

impl FeatureRanks {
    pub(crate) fn new(x: &Matrix) -> Self {
        let n = x.n_rows();
        let mut ranks = vec![0u32; n * x.n_cols()];
        let mut values = Vec::with_capacity(x.n_cols());
        let mut order: Vec<usize> = (0..n).collect();
        for j in 0..x.n_cols() {
            order.sort_unstable_by(|&a, &b| x.get(a, j).total_cmp(&x.get(b, j)));
            let mut distinct: Vec<f64> = Vec::new();
            for &i in &order {
                let v = x.get(i, j);
                if distinct.last() != Some(&v) {
                    distinct.push(v);
                }
                ranks[j * n + i] = (distinct.len() - 1) as u32;
            }
            values.push(distinct);
        }
        FeatureRanks {
            n_rows: n,
            ranks,
            values,
        }
    }

    fn column(&self, j: usize) -> &[u32] {
        &self.ranks[j * self.n_rows..(j + 1) * self.n_rows]
    }
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl<R: Rng> Grower<'_, R> {
    fn counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.classes.len()];
        for &r in rows {
            c[self.y[r]] += 1;
        }
        c
    }

    fn leaf(&mut self, counts: &[usize], samples: usize) -> usize {
        let mut best = 0;
        for (i, c) in counts.iter().enumerate() {
            if *c > counts[best] {
                best = i;
            }
        }
        self.nodes.push(Node::Leaf {
            label: self.classes[best],
            samples,
        });
        self.nodes.len() - 1
    }

    /// Best split on one feature, or `None` if the feature is constant on
    /// `rows`. The inner option is `None` when no position satisfies the
    /// leaf-size constraint.
    fn scan_feature(&mut self, rows: &[usize], feature: usize, total: &[usize]) -> Option<Option<BestSplit>> {
        let column = self.ranks.column(feature);
        let values = &self.ranks.values[feature];
        self.keys.clear();
        self.keys.extend(
            rows.iter()
                .map(|&r| u64::from(column[r]) << CLASS_BITS | self.y[r] as u64),
        );
        self.keys.sort_unstable();
        let n = self.keys.len();
        let rank = |k: u64| (k >> CLASS_BITS) as usize;
        if rank(self.keys[0]) == rank(self.keys[n - 1]) {
            return None;
        }
        let min_leaf = self.params.min_samples_leaf;
        let left = &mut self.left;
        left.clear();
        left.resize(total.len(), 0);
        let mut best: Option<BestSplit> = None;
        // Maximizing Σ l²/nl + Σ r²/nr minimizes weighted Gini; both sums
        // are kept up to date as samples move left.
        let mut sl = 0usize;
        let mut sr: usize = total.iter().map(|t| t * t).sum();
        for pos in 0..n - 1 {
            let c = (self.keys[pos] & CLASS_MASK) as usize;
            sl += 2 * left[c] + 1;
            sr -= 2 * (total[c] - left[c]) - 1;
            left[c] += 1;
            let (lo, hi) = (rank(self.keys[pos]), rank(self.keys[pos + 1]));
            if lo == hi {
                continue;
            }
            let nl = pos + 1;
            let nr = n - nl;
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let score = sl as f64 / nl as f64 + sr as f64 / nr as f64;
            if best.as_ref().is_none_or(|b| score > b.score) {
                let (v, next) = (values[lo], values[hi]);
                let mid = v + (next - v) / 2.0;
                let threshold = if mid < next { mid } else { v };
                best = Some(BestSplit {
                    feature,
                    threshold,
                    score,
                });
            }
        }
        Some(best)
    }

    fn find_split(&mut self, rows: &[usize], total: &[usize]) -> Option<BestSplit> {
        let d = self.x.n_cols();
        let mut order = core::mem::take(&mut self.order);
        order.clear();
        order.extend(0..d);
        let mut visited = 0;
        let mut best: Option<BestSplit> = None;
        for k in 0..d {
            if visited >= self.params.max_features {
                break;
            }
            let j = self.rng.random_range(k..d);
            order.swap(k, j);
            let feature = order[k];
            if let Some(candidate) = self.scan_feature(rows, feature, total) {
                visited += 1;
                if let Some(c) = candidate {
                    if best.as_ref().is_none_or(|b| c.score > b.score) {
                        best = Some(c);
                    }
                }
            }
        }
        self.order = order;
        best
    }

    fn grow(&mut self, rows: &mut [usize], depth: usize) -> usize {
        let counts = self.counts(rows);
        let n = rows.len();
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_capped = self.params.max_depth.is_some_and(|m| depth >= m);
        if pure || depth_capped || n < self.params.min_samples_split || n < 2 * self.params.min_samples_leaf {
            return self.leaf(&counts, n);
        }
        let Some(split) = self.find_split(rows, &counts) else {
            return self.leaf(&counts, n);
        };
        let x = self.x;
        let mut n_left = 0;
        let mut end = rows.len();
        while n_left < end {
            if x.get(rows[n_left], split.feature) <= split.threshold {
                n_left += 1;
            } else {
                end -= 1;
                rows.swap(n_left, end);
            }
        }
        let me = self.nodes.len();
        self.nodes.push(Node::Leaf { label: 0, samples: 0 });
        let (l, r) = rows.split_at_mut(n_left);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[me] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        me
    }
}

/// Grows one tree on `rows` (which may repeat, for bootstrap samples).
pub(crate) fn grow_tree<R: Rng>(
    x: &Matrix,
    ranks: &FeatureRanks,
    y: &[usize],
    classes: &[Label],
    rows: &mut [usize],
    params: &GrowParams,
    rng: &mut R,
) -> Tree {
    let mut g = Grower {
        x,
        ranks,
        y,
        classes,
        params,
        rng,
        nodes: Vec::new(),
        keys: Vec::with_capacity(rows.len()),
        left: Vec::with_capacity(classes.len()),
        order: Vec::with_capacity(x.n_cols()),
    };
    g.grow(rows, 0);
    Tree { nodes: g.nodes }
}
