//! Self-training: repeatedly pseudo-label confident unlabeled points and
//! refit on the enlarged pool.

use serde::{Deserialize, Serialize};

use super::model::{argmax, train, Classifier, Model, ModelKind, Params};
use crate::error::MlError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelfTrainConfig {
    /// A point is adopted when its top probability is strictly above this.
    pub threshold: f64,
    pub max_iter: usize,
}

impl Default for SelfTrainConfig {
    fn default() -> Self {
        SelfTrainConfig {
            threshold: 0.75,
            max_iter: 10,
        }
    }
}

impl SelfTrainConfig {
    pub fn validate(&self) -> Result<(), MlError> {
        if !(self.threshold > 0.5 && self.threshold <= 1.0) {
            return Err(MlError::InvalidParameter(format!(
                "confidence threshold {} outside (0.5, 1]",
                self.threshold
            )));
        }
        if self.max_iter == 0 {
            return Err(MlError::InvalidParameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoLabel {
    /// Index into the unlabeled input.
    pub index: usize,
    pub label: usize,
    pub iteration: usize,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfTrained {
    pub model: Model,
    pub pseudo_labels: Vec<PseudoLabel>,
    /// Training-pool size after each iteration, starting with the labeled set.
    pub pool_sizes: Vec<usize>,
}

pub fn self_train(
    kind: ModelKind,
    x: &[Vec<f64>],
    y: &[usize],
    unlabeled: &[Vec<f64>],
    params: &Params,
    config: &SelfTrainConfig,
    seed: u64,
) -> Result<SelfTrained, MlError> {
    config.validate()?;
    let mut pool_x = x.to_vec();
    let mut pool_y = y.to_vec();
    let mut model = train(kind, &pool_x, &pool_y, params, seed)?;
    let mut remaining: Vec<usize> = (0..unlabeled.len()).collect();
    let mut pseudo_labels = Vec::new();
    let mut pool_sizes = vec![pool_x.len()];
    for iteration in 1..=config.max_iter {
        let mut adopted = Vec::new();
        remaining.retain(|&i| {
            let p = model.predict_proba(&unlabeled[i]);
            let c = argmax(&p);
            if p[c] > config.threshold {
                adopted.push(PseudoLabel {
                    index: i,
                    label: c,
                    iteration,
                    confidence: p[c],
                });
                false
            } else {
                true
            }
        });
        if adopted.is_empty() {
            break;
        }
        for pl in &adopted {
            pool_x.push(unlabeled[pl.index].clone());
            pool_y.push(pl.label);
        }
        pseudo_labels.extend(adopted);
        pool_sizes.push(pool_x.len());
        model = train(kind, &pool_x, &pool_y, params, seed)?;
        if remaining.is_empty() {
            break;
        }
    }
    Ok(SelfTrained {
        model,
        pseudo_labels,
        pool_sizes,
    })
}
