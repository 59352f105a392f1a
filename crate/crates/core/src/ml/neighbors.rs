//! k-nearest neighbours and Gaussian naive Bayes.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<usize>,
    pub n_classes: usize,
}

impl Knn {
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, k: usize) -> Self {
        Knn {
            k: k.max(1),
            x: x.to_vec(),
            y: y.to_vec(),
            n_classes,
        }
    }

    /// Vote shares of the k nearest points (Euclidean; distance ties go to
    /// the lower training index).
    pub fn predict_proba(&self, q: &[f64]) -> Vec<f64> {
        let mut d: Vec<(f64, usize)> = self
            .x
            .iter()
            .enumerate()
            .map(|(i, p)| (p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>(), i))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let k = self.k.min(d.len());
        let mut votes = vec![0.0; self.n_classes];
        for &(_, i) in &d[..k] {
            votes[self.y[i]] += 1.0;
        }
        votes.iter_mut().for_each(|v| *v /= k.max(1) as f64);
        votes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub log_prior: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub vars: Vec<Vec<f64>>,
}

impl GaussianNb {
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, var_floor: f64) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let n = x.len() as f64;
        let mut counts = vec![0.0; n_classes];
        let mut means = vec![vec![0.0; d]; n_classes];
        let mut vars = vec![vec![0.0; d]; n_classes];
        for (xi, &c) in x.iter().zip(y) {
            counts[c] += 1.0;
            for j in 0..d {
                means[c][j] += xi[j];
            }
        }
        for c in 0..n_classes {
            if counts[c] > 0.0 {
                means[c].iter_mut().for_each(|m| *m /= counts[c]);
            }
        }
        for (xi, &c) in x.iter().zip(y) {
            for j in 0..d {
                vars[c][j] += (xi[j] - means[c][j]).powi(2);
            }
        }
        for c in 0..n_classes {
            for v in vars[c].iter_mut() {
                *v = if counts[c] > 0.0 { *v / counts[c] } else { 0.0 };
                *v = v.max(var_floor);
            }
        }
        let log_prior = counts
            .iter()
            .map(|c| if *c > 0.0 { (c / n).ln() } else { f64::NEG_INFINITY })
            .collect();
        GaussianNb { log_prior, means, vars }
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let joint: Vec<f64> = (0..self.log_prior.len())
            .map(|c| {
                if self.log_prior[c] == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                self.log_prior[c]
                    + x.iter()
                        .enumerate()
                        .map(|(j, v)| {
                            let var = self.vars[c][j];
                            -0.5 * ((2.0 * std::f64::consts::PI * var).ln() + (v - self.means[c][j]).powi(2) / var)
                        })
                        .sum::<f64>()
            })
            .collect();
        super::ensemble::softmax(&joint)
    }
}
