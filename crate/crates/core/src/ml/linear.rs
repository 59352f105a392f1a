//! One-vs-rest linear classifiers trained by full-batch gradient descent.

use serde::{Deserialize, Serialize};

use super::ensemble::softmax;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Loss {
    /// L2-regularized log loss.
    Logistic,
    /// L2-regularized hinge loss (linear SVM).
    Hinge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearOvr {
    pub loss: Loss,
    /// Per class: weights followed by the intercept.
    pub weights: Vec<Vec<f64>>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LinearOvr {
    pub fn fit(
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        loss: Loss,
        iterations: usize,
        learning_rate: f64,
        l2: f64,
    ) -> Self {
        let n = x.len() as f64;
        let d = x.first().map_or(0, Vec::len);
        let weights = (0..n_classes)
            .map(|c| {
                let targets: Vec<f64> = y.iter().map(|&yi| if yi == c { 1.0 } else { -1.0 }).collect();
                let mut w = vec![0.0; d + 1];
                let mut grad = vec![0.0; d + 1];
                for _ in 0..iterations {
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    for (xi, &t) in x.iter().zip(&targets) {
                        let z = w[d] + xi.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
                        // d(loss)/dz for a ±1 target.
                        let dz = match loss {
                            Loss::Logistic => sigmoid(z) - (t + 1.0) / 2.0,
                            Loss::Hinge => {
                                if t * z < 1.0 {
                                    -t
                                } else {
                                    0.0
                                }
                            }
                        };
                        if dz != 0.0 {
                            for j in 0..d {
                                grad[j] += dz * xi[j];
                            }
                            grad[d] += dz;
                        }
                    }
                    for j in 0..=d {
                        let reg = if j < d { l2 * w[j] } else { 0.0 };
                        w[j] -= learning_rate * (grad[j] / n + reg);
                    }
                }
                w
            })
            .collect();
        LinearOvr { loss, weights }
    }

    pub fn decision(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| {
                let d = w.len() - 1;
                w[d] + x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect()
    }

    /// Logistic: per-class sigmoids renormalized to sum to one. Hinge:
    /// softmax of the decision scores.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let scores = self.decision(x);
        match self.loss {
            Loss::Logistic => {
                let s: Vec<f64> = scores.iter().map(|z| sigmoid(*z)).collect();
                let total: f64 = s.iter().sum();
                if total > 0.0 {
                    s.iter().map(|v| v / total).collect()
                } else {
                    softmax(&scores)
                }
            }
            Loss::Hinge => softmax(&scores),
        }
    }
}
