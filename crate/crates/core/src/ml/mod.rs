//! Membrane-group classification: encoding, base classifiers, self-training,
//! evaluation, feature importance and Shapley attribution.

pub mod data;
pub mod document;
pub mod encoder;
pub mod ensemble;
pub mod eval;
pub mod importance;
pub mod linear;
pub mod model;
pub mod neighbors;
pub mod selftrain;
pub mod shapley;
pub mod synthetic;
pub mod tree;

pub use data::{prepare_dataset, training_digest, DatasetRow, Exclusion, Matrix, MlDataset};
pub use document::{ModelDocument, Prediction, TrainedClassifier, FORMAT_VERSION};
pub use encoder::{Encoded, Encoder, FEATURE_NAMES};
pub use eval::{
    cross_validate, cross_validate_with, holdout_evaluate, metrics, stratified_folds, stratified_holdout, EvalReport,
    FoldMetrics, MetricSummary, Protocol, SemiSupervised,
};
pub use importance::{feature_importance, group_importance, Importance};
pub use model::{argmax, train, Classifier, Fitted, MaxFeatures, Model, ModelKind, Params, N_CLASSES};
pub use selftrain::{self_train, PseudoLabel, SelfTrainConfig, SelfTrained};
pub use shapley::{shapley_explain, shapley_values, Attribution, InstanceExplanation, ShapleySummary};
