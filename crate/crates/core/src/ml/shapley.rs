//! Monte-Carlo permutation Shapley values with an interventional value
//! function: absent players take their values from a background row.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{argmax, Classifier};
use crate::error::MlError;

pub const MIN_PERMUTATIONS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    /// One value per player.
    pub values: Vec<f64>,
    /// Standard error of each value.
    pub mc_std: Vec<f64>,
    /// f(x) and the mean of f over the background.
    pub prediction: f64,
    pub baseline: f64,
    /// |Σ values − (prediction − baseline)|.
    pub additivity_error: f64,
    /// Standard error of Σ values; the reported tolerance for additivity.
    pub additivity_std: f64,
}

/// Attributions of `f(x)` to the column groups in `players`.
///
/// Permutation `p` pairs with background row `p mod |background|`, so the
/// estimator targets the background-averaged value function and additivity
/// is exact whenever the permutation count is a multiple of the background
/// size.
pub fn shapley_values<F>(
    f: F,
    background: &[Vec<f64>],
    x: &[f64],
    players: &[Vec<usize>],
    n_permutations: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Attribution, MlError>
where
    F: Fn(&[f64]) -> f64,
{
    if background.is_empty() {
        return Err(MlError::InvalidParameter("empty background".into()));
    }
    if n_permutations < 2 {
        return Err(MlError::InvalidParameter("need at least 2 permutations".into()));
    }
    let m = players.len();
    let mut order: Vec<usize> = (0..m).collect();
    let mut sum = vec![0.0; m];
    let mut sum_sq = vec![0.0; m];
    let mut totals = Vec::with_capacity(n_permutations);
    for p in 0..n_permutations {
        order.shuffle(rng);
        let mut z = background[p % background.len()].clone();
        let start = f(&z);
        let mut prev = start;
        for &j in &order {
            for &c in &players[j] {
                z[c] = x[c];
            }
            let next = f(&z);
            let delta = next - prev;
            sum[j] += delta;
            sum_sq[j] += delta * delta;
            prev = next;
        }
        totals.push(prev - start);
    }
    let n = n_permutations as f64;
    let values: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let sem = |mean: f64, sq: f64| ((sq / n - mean * mean).max(0.0) * n / (n - 1.0) / n).sqrt();
    let mc_std = values.iter().zip(&sum_sq).map(|(&v, &sq)| sem(v, sq)).collect();
    let prediction = f(x);
    let baseline = background.iter().map(|b| f(b)).sum::<f64>() / background.len() as f64;
    let t_mean = totals.iter().sum::<f64>() / n;
    let t_sq = totals.iter().map(|t| t * t).sum::<f64>();
    Ok(Attribution {
        additivity_error: (values.iter().sum::<f64>() - (prediction - baseline)).abs(),
        additivity_std: sem(t_mean, t_sq),
        values,
        mc_std,
        prediction,
        baseline,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceExplanation {
    pub class: usize,
    pub feature_values: Vec<f64>,
    pub attribution: Attribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapleySummary {
    pub features: Vec<String>,
    pub instances: Vec<InstanceExplanation>,
    /// Features by mean |attribution|, highest first.
    pub ranking: Vec<(String, f64)>,
}

/// Explains each row of `explain` for a fixed class, or for its own
/// predicted class when `class` is `None`. Instances run in parallel, each
/// on its own ChaCha stream.
#[allow(clippy::too_many_arguments)]
pub fn shapley_explain<M: Classifier>(
    model: &M,
    background: &[Vec<f64>],
    explain: &[Vec<f64>],
    features: &[String],
    players: &[Vec<usize>],
    n_permutations: usize,
    class: Option<usize>,
    seed: u64,
) -> Result<ShapleySummary, MlError> {
    if n_permutations < MIN_PERMUTATIONS {
        return Err(MlError::InvalidParameter(format!(
            "n_permutations {n_permutations} below {MIN_PERMUTATIONS}"
        )));
    }
    if features.len() != players.len() {
        return Err(MlError::InvalidParameter("one name per player required".into()));
    }
    let instances: Vec<InstanceExplanation> = explain
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let c = class.unwrap_or_else(|| argmax(&model.predict_proba(x)));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let attribution = shapley_values(|z| model.predict_proba(z)[c], background, x, players, n_permutations, &mut rng)?;
            let feature_values = players
                .iter()
                .map(|cols| if cols.len() == 1 { x[cols[0]] } else { cols.iter().position(|&j| x[j] == 1.0).map_or(-1.0, |p| p as f64) })
                .collect();
            Ok(InstanceExplanation {
                class: c,
                feature_values,
                attribution,
            })
        })
        .collect::<Result<_, MlError>>()?;
    let mut ranking: Vec<(String, f64)> = features
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let mean_abs = instances.iter().map(|e| e.attribution.values[j].abs()).sum::<f64>() / instances.len().max(1) as f64;
            (name.clone(), mean_abs)
        })
        .collect();
    ranking.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(ShapleySummary {
        features: features.to_vec(),
        instances,
        ranking,
    })
}
