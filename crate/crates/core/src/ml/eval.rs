//! Stratified k-fold cross-validation and a stratified holdout split with
//! class-frequency weighted metrics.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{argmax, train, Classifier, ModelKind, Params, N_CLASSES};
use super::selftrain::{self_train, SelfTrainConfig};
use crate::analytics::stats::{mean, sample_std};
use crate::error::MlError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    CrossValidation,
    Holdout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub protocol: Protocol,
    pub folds: usize,
    pub accuracy: MetricSummary,
    pub precision: MetricSummary,
    pub recall: MetricSummary,
    pub f1: MetricSummary,
    pub per_fold: Vec<FoldMetrics>,
}

/// Weighted by true-class support; a class never predicted has precision 0.
pub fn metrics(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> FoldMetrics {
    let n = y_true.len();
    let mut tp = vec![0usize; n_classes];
    let mut predicted = vec![0usize; n_classes];
    let mut support = vec![0usize; n_classes];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        support[t] += 1;
        predicted[p] += 1;
        if t == p {
            tp[t] += 1;
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let (mut precision, mut recall, mut f1) = (0.0, 0.0, 0.0);
    for c in 0..n_classes {
        let w = ratio(support[c], n);
        let p = ratio(tp[c], predicted[c]);
        let r = ratio(tp[c], support[c]);
        precision += w * p;
        recall += w * r;
        f1 += w * if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    }
    FoldMetrics {
        accuracy: ratio(tp.iter().sum(), n),
        precision,
        recall,
        f1,
    }
}

fn by_class(y: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); y.iter().max().map_or(0, |m| m + 1)];
    for (i, &c) in y.iter().enumerate() {
        out[c].push(i);
    }
    out
}

/// Test-index sets for `k` stratified folds. Each class is shuffled and
/// dealt round robin, continuing from where the previous class stopped.
pub fn stratified_folds(y: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, MlError> {
    if k < 2 {
        return Err(MlError::InvalidParameter("need at least 2 folds".into()));
    }
    let classes = by_class(y);
    for (class, members) in classes.iter().enumerate() {
        if !members.is_empty() && members.len() < k {
            return Err(MlError::TooFewPerClass {
                class,
                count: members.len(),
                folds: k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for mut members in classes {
        members.shuffle(&mut rng);
        for i in members {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Stratified (train, test) split with `round(test_fraction · n_c)` test
/// points per class.
pub fn stratified_holdout(y: &[usize], test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>), MlError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(MlError::InvalidParameter(format!("test fraction {test_fraction} outside (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train_idx, mut test_idx) = (Vec::new(), Vec::new());
    for mut members in by_class(y) {
        members.shuffle(&mut rng);
        let t = ((members.len() as f64) * test_fraction).round() as usize;
        test_idx.extend_from_slice(&members[..t]);
        train_idx.extend_from_slice(&members[t..]);
    }
    if train_idx.is_empty() || test_idx.is_empty() {
        return Err(MlError::TooFewSamples { needed: 2, got: y.len() });
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((train_idx, test_idx))
}

fn take(x: &[Vec<f64>], idx: &[usize]) -> Vec<Vec<f64>> {
    idx.iter().map(|&i| x[i].clone()).collect()
}

fn score<M: Classifier>(model: &M, x: &[Vec<f64>], y: &[usize], idx: &[usize]) -> FoldMetrics {
    let pred: Vec<usize> = idx.iter().map(|&i| argmax(&model.predict_proba(&x[i]))).collect();
    let truth: Vec<usize> = idx.iter().map(|&i| y[i]).collect();
    metrics(&truth, &pred, N_CLASSES)
}

fn summarize(protocol: Protocol, per_fold: Vec<FoldMetrics>) -> EvalReport {
    let pick = |f: fn(&FoldMetrics) -> f64| {
        let v: Vec<f64> = per_fold.iter().map(f).collect();
        MetricSummary {
            mean: mean(&v).unwrap_or(0.0),
            std: sample_std(&v).unwrap_or(0.0),
        }
    };
    EvalReport {
        protocol,
        folds: per_fold.len(),
        accuracy: pick(|m| m.accuracy),
        precision: pick(|m| m.precision),
        recall: pick(|m| m.recall),
        f1: pick(|m| m.f1),
        per_fold,
    }
}

/// Cross-validation with a caller-supplied fitter, which receives the
/// training rows, their labels and the fold number.
pub fn cross_validate_with<M, F>(x: &[Vec<f64>], y: &[usize], k: usize, seed: u64, fit: F) -> Result<EvalReport, MlError>
where
    M: Classifier,
    F: Fn(&[Vec<f64>], &[usize], usize) -> Result<M, MlError>,
{
    let folds = stratified_folds(y, k, seed)?;
    let mut per_fold = Vec::with_capacity(k);
    for (f, test) in folds.iter().enumerate() {
        let train_idx: Vec<usize> = (0..y.len()).filter(|i| test.binary_search(i).is_err()).collect();
        let ty: Vec<usize> = train_idx.iter().map(|&i| y[i]).collect();
        let model = fit(&take(x, &train_idx), &ty, f)?;
        per_fold.push(score(&model, x, y, test));
    }
    Ok(summarize(Protocol::CrossValidation, per_fold))
}

/// Optional self-training for evaluation: the pool is added to every
/// training fold.
#[derive(Debug, Clone, Copy)]
pub struct SemiSupervised<'a> {
    pub config: &'a SelfTrainConfig,
    pub unlabeled: &'a [Vec<f64>],
}

fn fitter<'a>(
    kind: ModelKind,
    params: &'a Params,
    semi: Option<SemiSupervised<'a>>,
    seed: u64,
) -> impl Fn(&[Vec<f64>], &[usize], usize) -> Result<super::model::Model, MlError> + 'a {
    move |x, y, fold| {
        let s = seed.wrapping_add(fold as u64);
        match semi {
            Some(semi) => self_train(kind, x, y, semi.unlabeled, params, semi.config, s).map(|r| r.model),
            None => train(kind, x, y, params, s),
        }
    }
}

pub fn cross_validate(
    kind: ModelKind,
    x: &[Vec<f64>],
    y: &[usize],
    k: usize,
    params: &Params,
    seed: u64,
    semi: Option<SemiSupervised<'_>>,
) -> Result<EvalReport, MlError> {
    cross_validate_with(x, y, k, seed, fitter(kind, params, semi, seed))
}

/// One stratified split, reported with `std = 0`.
pub fn holdout_evaluate(
    kind: ModelKind,
    x: &[Vec<f64>],
    y: &[usize],
    test_fraction: f64,
    params: &Params,
    seed: u64,
    semi: Option<SemiSupervised<'_>>,
) -> Result<EvalReport, MlError> {
    let (train_idx, test_idx) = stratified_holdout(y, test_fraction, seed)?;
    let ty: Vec<usize> = train_idx.iter().map(|&i| y[i]).collect();
    let model = fitter(kind, params, semi, seed)(&take(x, &train_idx), &ty, 0)?;
    Ok(summarize(Protocol::Holdout, vec![score(&model, x, y, &test_idx)]))
}
