//! Random forest and multinomial gradient boosting over [`super::tree`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{fit_classifier, fit_regressor, Tree, TreeParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub n_classes: usize,
}

/// √d, at least one.
pub fn sqrt_features(d: usize) -> usize {
    ((d as f64).sqrt().floor() as usize).max(1)
}

impl Forest {
    /// Bootstrap-aggregated gini trees, each seeded from its own stream so
    /// the result does not depend on thread scheduling.
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, n_trees: usize, params: &TreeParams, seed: u64) -> Self {
        let n = x.len();
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let seeds: Vec<u64> = (0..n_trees).map(|_| master.random()).collect();
        let trees = seeds
            .into_par_iter()
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                fit_classifier(x, y, sample, n_classes, params, &mut rng)
            })
            .collect();
        Forest { trees, n_classes }
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.n_classes];
        for t in &self.trees {
            for (acc, v) in p.iter_mut().zip(t.leaf_value(x)) {
                *acc += v;
            }
        }
        let k = self.trees.len().max(1) as f64;
        p.iter_mut().for_each(|v| *v /= k);
        p
    }

    /// Mean decrease in impurity, averaged over trees and normalized.
    pub fn feature_importances(&self) -> Vec<f64> {
        let d = self.trees.first().map_or(0, |t| t.n_features);
        let mut imp = vec![0.0; d];
        for t in &self.trees {
            for (acc, v) in imp.iter_mut().zip(t.normalized_importance()) {
                *acc += v;
            }
        }
        let total: f64 = imp.iter().sum();
        if total > 0.0 {
            imp.iter_mut().for_each(|v| *v /= total);
        }
        imp
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boosting {
    pub init: Vec<f64>,
    pub learning_rate: f64,
    /// `stages[m][k]` is the tree for class `k` at stage `m`.
    pub stages: Vec<Vec<Tree>>,
    pub n_classes: usize,
}

pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return vec![1.0 / scores.len() as f64; scores.len()];
    }
    let e: Vec<f64> = scores.iter().map(|s| (s - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.iter().map(|v| v / z).collect()
}

impl Boosting {
    /// Multinomial deviance boosting with one regression tree per class and
    /// stage; leaves take a single Newton step.
    pub fn fit(
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        n_stages: usize,
        learning_rate: f64,
        max_depth: usize,
        seed: u64,
    ) -> Self {
        let n = x.len();
        let k = n_classes as f64;
        let mut counts = vec![0.0; n_classes];
        for &c in y {
            counts[c] += 1.0;
        }
        // Log class priors; absent classes get a large negative score.
        let init: Vec<f64> = counts
            .iter()
            .map(|c| if *c > 0.0 { (c / n as f64).ln() } else { -30.0 })
            .collect();
        let mut scores: Vec<Vec<f64>> = vec![init.clone(); n];
        let params = TreeParams {
            max_depth: Some(max_depth),
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut stages = Vec::with_capacity(n_stages);
        for _ in 0..n_stages {
            let probs: Vec<Vec<f64>> = scores.iter().map(|s| softmax(s)).collect();
            let mut stage = Vec::with_capacity(n_classes);
            for c in 0..n_classes {
                let residual: Vec<f64> = (0..n)
                    .map(|i| f64::from(u8::from(y[i] == c)) - probs[i][c])
                    .collect();
                let mut newton = |members: &[usize]| {
                    let num: f64 = members.iter().map(|&i| residual[i]).sum();
                    let den: f64 = members.iter().map(|&i| residual[i].abs() * (1.0 - residual[i].abs())).sum();
                    if den.abs() < 1e-150 {
                        0.0
                    } else {
                        (k - 1.0) / k * num / den
                    }
                };
                let tree = fit_regressor(x, &residual, (0..n).collect(), &params, &mut newton, &mut rng);
                for (i, s) in scores.iter_mut().enumerate() {
                    s[c] += learning_rate * tree.leaf_value(&x[i])[0];
                }
                stage.push(tree);
            }
            stages.push(stage);
        }
        Boosting {
            init,
            learning_rate,
            stages,
            n_classes,
        }
    }

    pub fn decision(&self, x: &[f64]) -> Vec<f64> {
        let mut s = self.init.clone();
        for stage in &self.stages {
            for (c, t) in stage.iter().enumerate() {
                s[c] += self.learning_rate * t.leaf_value(x)[0];
            }
        }
        s
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.decision(x))
    }
}
