//! Random-forest impurity importances for feature selection.

use serde::{Deserialize, Serialize};

use super::ensemble::{sqrt_features, Forest};
use super::model::N_CLASSES;
use super::tree::TreeParams;
use crate::error::MlError;

pub const MIN_SAMPLES: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Importance {
    pub feature: String,
    pub importance: f64,
}

fn ranked(names: &[String], values: Vec<f64>) -> Vec<Importance> {
    let mut out: Vec<Importance> = names
        .iter()
        .zip(values)
        .map(|(f, v)| Importance {
            feature: f.clone(),
            importance: v,
        })
        .collect();
    // Stable: equal importances keep column order.
    out.sort_by(|a, b| b.importance.total_cmp(&a.importance));
    out
}

/// Per-column importances, highest first.
pub fn feature_importance(
    x: &[Vec<f64>],
    y: &[usize],
    names: &[String],
    n_trees: usize,
    seed: u64,
) -> Result<Vec<Importance>, MlError> {
    if x.len() != y.len() {
        return Err(MlError::InvalidParameter(format!("{} rows but {} labels", x.len(), y.len())));
    }
    if x.len() < MIN_SAMPLES {
        return Err(MlError::TooFewSamples {
            needed: MIN_SAMPLES,
            got: x.len(),
        });
    }
    let d = x[0].len();
    if names.len() != d {
        return Err(MlError::EncoderMismatch {
            expected: d,
            got: names.len(),
        });
    }
    let params = TreeParams {
        max_features: Some(sqrt_features(d)),
        ..Default::default()
    };
    let forest = Forest::fit(x, y, N_CLASSES, n_trees.max(1), &params, seed);
    Ok(ranked(names, forest.feature_importances()))
}

/// Sums column importances within each group, e.g. the one-hot columns of
/// one categorical feature.
pub fn group_importance(columns: &[Importance], column_names: &[String], groups: &[(String, Vec<usize>)]) -> Vec<Importance> {
    let value = |name: &String| columns.iter().find(|c| &c.feature == name).map_or(0.0, |c| c.importance);
    let names: Vec<String> = groups.iter().map(|(n, _)| n.clone()).collect();
    let values = groups
        .iter()
        .map(|(_, cols)| cols.iter().map(|&i| value(&column_names[i])).sum())
        .collect();
    ranked(&names, values)
}
