//! CART trees: a gini classification tree and a least-squares regression
//! tree whose leaf values are supplied by the caller (used by boosting).

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { value: Vec<f64> },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Features examined per split; `None` means all.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_split: 2,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
    pub n_features: usize,
    /// Total weighted impurity decrease per feature (not normalized).
    pub impurity_decrease: Vec<f64>,
}

impl Tree {
    pub fn leaf_value(&self, x: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Impurity decreases scaled to sum to one (all zero for a stump).
    pub fn normalized_importance(&self) -> Vec<f64> {
        let total: f64 = self.impurity_decrease.iter().sum();
        if total > 0.0 {
            self.impurity_decrease.iter().map(|v| v / total).collect()
        } else {
            vec![0.0; self.n_features]
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Statistics a split criterion accumulates over a side of a split.
trait Criterion: Clone {
    fn empty(&self) -> Self;
    fn add(&mut self, i: usize);
    fn remove(&mut self, i: usize);
    /// Impurity times sample count.
    fn weighted_impurity(&self) -> f64;
}

#[derive(Clone)]
struct Gini<'a> {
    y: &'a [usize],
    counts: Vec<f64>,
    n: f64,
}

impl Criterion for Gini<'_> {
    fn empty(&self) -> Self {
        Gini {
            y: self.y,
            counts: vec![0.0; self.counts.len()],
            n: 0.0,
        }
    }
    fn add(&mut self, i: usize) {
        self.counts[self.y[i]] += 1.0;
        self.n += 1.0;
    }
    fn remove(&mut self, i: usize) {
        self.counts[self.y[i]] -= 1.0;
        self.n -= 1.0;
    }
    fn weighted_impurity(&self) -> f64 {
        if self.n == 0.0 {
            return 0.0;
        }
        let sq: f64 = self.counts.iter().map(|c| c * c).sum();
        self.n - sq / self.n
    }
}

#[derive(Clone)]
struct Squared<'a> {
    y: &'a [f64],
    sum: f64,
    sum_sq: f64,
    n: f64,
}

impl Criterion for Squared<'_> {
    fn empty(&self) -> Self {
        Squared {
            y: self.y,
            sum: 0.0,
            sum_sq: 0.0,
            n: 0.0,
        }
    }
    fn add(&mut self, i: usize) {
        self.sum += self.y[i];
        self.sum_sq += self.y[i] * self.y[i];
        self.n += 1.0;
    }
    fn remove(&mut self, i: usize) {
        self.sum -= self.y[i];
        self.sum_sq -= self.y[i] * self.y[i];
        self.n -= 1.0;
    }
    fn weighted_impurity(&self) -> f64 {
        if self.n == 0.0 {
            return 0.0;
        }
        (self.sum_sq - self.sum * self.sum / self.n).max(0.0)
    }
}

struct Best {
    feature: usize,
    threshold: f64,
    /// Position in the sorted index slice where the right side starts.
    pivot: usize,
    children_impurity: f64,
}

fn best_split<C: Criterion, R: Rng>(
    x: &[Vec<f64>],
    idx: &mut [usize],
    parent: &C,
    params: &TreeParams,
    rng: &mut R,
) -> Option<Best> {
    let d = x[idx[0]].len();
    let mut features: Vec<usize> = (0..d).collect();
    let wanted = params.max_features.unwrap_or(d).clamp(1, d);
    if wanted < d {
        features.shuffle(rng);
    }
    let mut best: Option<Best> = None;
    let mut sorted = idx.to_vec();
    for (visited, &f) in features.iter().enumerate() {
        // Keep looking past `wanted` only until some valid split is found.
        if visited >= wanted && best.is_some() {
            break;
        }
        sorted.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        if x[sorted[0]][f] == x[sorted[sorted.len() - 1]][f] {
            continue;
        }
        let mut left = parent.empty();
        let mut right = parent.clone();
        for p in 0..sorted.len() - 1 {
            left.add(sorted[p]);
            right.remove(sorted[p]);
            let (a, b) = (x[sorted[p]][f], x[sorted[p + 1]][f]);
            if a == b {
                continue;
            }
            let imp = left.weighted_impurity() + right.weighted_impurity();
            if best.as_ref().is_none_or(|bst| imp < bst.children_impurity - 1e-12) {
                let mid = a + (b - a) / 2.0;
                best = Some(Best {
                    feature: f,
                    threshold: if mid < b { mid } else { a },
                    pivot: p + 1,
                    children_impurity: imp,
                });
            }
        }
    }
    if let Some(b) = &best {
        idx.sort_by(|&i, &j| x[i][b.feature].total_cmp(&x[j][b.feature]).then(i.cmp(&j)));
        debug_assert!(x[idx[b.pivot - 1]][b.feature] <= b.threshold && x[idx[b.pivot]][b.feature] > b.threshold);
    }
    best
}

fn grow<C: Criterion, R: Rng>(
    x: &[Vec<f64>],
    mut idx: Vec<usize>,
    root_stats: impl Fn(&[usize]) -> C,
    leaf: &mut dyn FnMut(&[usize]) -> Vec<f64>,
    params: &TreeParams,
    rng: &mut R,
) -> Tree {
    let n_features = x.first().map_or(0, Vec::len);
    let total = idx.len() as f64;
    let mut tree = Tree {
        nodes: vec![Node::Leaf { value: Vec::new() }],
        n_features,
        impurity_decrease: vec![0.0; n_features],
    };
    // (node slot, sample indices, depth)
    let mut stack = vec![(0usize, std::mem::take(&mut idx), 0usize)];
    while let Some((slot, mut members, depth)) = stack.pop() {
        let stats = root_stats(&members);
        let parent_imp = stats.weighted_impurity();
        let stop = members.len() < params.min_samples_split.max(2)
            || parent_imp <= 1e-12
            || params.max_depth.is_some_and(|m| depth >= m);
        let split = if stop { None } else { best_split(x, &mut members, &stats, params, rng) };
        match split {
            Some(b) if b.children_impurity < parent_imp - 1e-12 => {
                tree.impurity_decrease[b.feature] += (parent_imp - b.children_impurity) / total;
                let right_members = members.split_off(b.pivot);
                let left = tree.nodes.len();
                tree.nodes.push(Node::Leaf { value: Vec::new() });
                let right = tree.nodes.len();
                tree.nodes.push(Node::Leaf { value: Vec::new() });
                tree.nodes[slot] = Node::Split {
                    feature: b.feature,
                    threshold: b.threshold,
                    left,
                    right,
                };
                stack.push((right, right_members, depth + 1));
                stack.push((left, members, depth + 1));
            }
            _ => {
                tree.nodes[slot] = Node::Leaf { value: leaf(&members) };
            }
        }
    }
    tree
}

/// Gini classification tree over `idx` (duplicates allowed, as in a
/// bootstrap sample). Leaves hold class frequencies.
pub fn fit_classifier<R: Rng>(
    x: &[Vec<f64>],
    y: &[usize],
    idx: Vec<usize>,
    n_classes: usize,
    params: &TreeParams,
    rng: &mut R,
) -> Tree {
    let stats = |members: &[usize]| {
        let mut g = Gini {
            y,
            counts: vec![0.0; n_classes],
            n: 0.0,
        };
        for &i in members {
            g.add(i);
        }
        g
    };
    let mut leaf = |members: &[usize]| {
        let mut v = vec![0.0; n_classes];
        for &i in members {
            v[y[i]] += 1.0;
        }
        let n = members.len().max(1) as f64;
        v.iter_mut().for_each(|c| *c /= n);
        v
    };
    grow(x, idx, stats, &mut leaf, params, rng)
}

/// Least-squares regression tree on `target`; `leaf` maps the members of
/// each leaf to its one-element value.
pub fn fit_regressor<R: Rng>(
    x: &[Vec<f64>],
    target: &[f64],
    idx: Vec<usize>,
    params: &TreeParams,
    leaf: &mut dyn FnMut(&[usize]) -> f64,
    rng: &mut R,
) -> Tree {
    let stats = |members: &[usize]| {
        let mut s = Squared {
            y: target,
            sum: 0.0,
            sum_sq: 0.0,
            n: 0.0,
        };
        for &i in members {
            s.add(i);
        }
        s
    };
    let mut wrapped = |members: &[usize]| vec![leaf(members)];
    grow(x, idx, stats, &mut wrapped, params, rng)
}
