use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ensemble::{sqrt_features, Boosting, Forest};
use super::linear::{LinearOvr, Loss};
use super::neighbors::{GaussianNb, Knn};
use super::tree::{fit_classifier, Tree, TreeParams};
use crate::error::MlError;
use crate::model::{ClassLabel, MembraneGroup};

pub const N_CLASSES: usize = MembraneGroup::TARGETS.len();

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    LogisticRegression,
    DecisionTree,
    RandomForest,
    KNearestNeighbors,
    GradientBoosting,
    GaussianNaiveBayes,
    SupportVectorMachine,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::LogisticRegression,
        ModelKind::DecisionTree,
        ModelKind::RandomForest,
        ModelKind::KNearestNeighbors,
        ModelKind::GradientBoosting,
        ModelKind::GaussianNaiveBayes,
        ModelKind::SupportVectorMachine,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            ModelKind::LogisticRegression => "logistic_regression",
            ModelKind::DecisionTree => "decision_tree",
            ModelKind::RandomForest => "random_forest",
            ModelKind::KNearestNeighbors => "knn",
            ModelKind::GradientBoosting => "gradient_boosting",
            ModelKind::GaussianNaiveBayes => "gaussian_nb",
            ModelKind::SupportVectorMachine => "svm",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for ModelKind {
    type Err = MlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let folded: String = s.to_lowercase().chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        Ok(match folded.as_str() {
            "logisticregression" | "lr" | "logistic" => ModelKind::LogisticRegression,
            "decisiontree" | "dt" | "tree" => ModelKind::DecisionTree,
            "randomforest" | "rf" | "forest" => ModelKind::RandomForest,
            "knearestneighbors" | "knn" => ModelKind::KNearestNeighbors,
            "gradientboosting" | "gb" | "gbm" => ModelKind::GradientBoosting,
            "gaussiannaivebayes" | "gaussiannb" | "nb" | "naivebayes" => ModelKind::GaussianNaiveBayes,
            "supportvectormachine" | "svm" | "linearsvm" => ModelKind::SupportVectorMachine,
            _ => return Err(MlError::InvalidParameter(format!("unknown model kind {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => sqrt_features(d),
            MaxFeatures::All => d,
            MaxFeatures::Count(c) => c.clamp(1, d.max(1)),
        }
    }
}

/// Hyperparameters for every kind; each kind reads its own fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Params {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub forest_max_features: MaxFeatures,
    pub k: usize,
    pub gb_stages: usize,
    pub gb_learning_rate: f64,
    pub gb_max_depth: usize,
    pub lr_iterations: usize,
    pub lr_learning_rate: f64,
    pub lr_l2: f64,
    pub svm_iterations: usize,
    pub svm_learning_rate: f64,
    pub svm_l2: f64,
    pub nb_var_floor: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            forest_max_features: MaxFeatures::Sqrt,
            k: 5,
            gb_stages: 100,
            gb_learning_rate: 0.1,
            gb_max_depth: 3,
            lr_iterations: 1000,
            lr_learning_rate: 0.5,
            lr_l2: 1e-4,
            svm_iterations: 1000,
            svm_learning_rate: 0.1,
            svm_l2: 1e-3,
            nb_var_floor: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "state")]
pub enum Fitted {
    LogisticRegression(LinearOvr),
    DecisionTree(Tree),
    RandomForest(Forest),
    KNearestNeighbors(Knn),
    GradientBoosting(Boosting),
    GaussianNaiveBayes(GaussianNb),
    SupportVectorMachine(LinearOvr),
}

/// Anything that maps a feature vector to a probability vector over the
/// three target groups.
pub trait Classifier: Send + Sync {
    fn predict_proba(&self, x: &[f64]) -> Vec<f64>;
}

/// Index of the largest probability; ties go to the lowest class index.
pub fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in p.iter().enumerate() {
        if *v > p[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub kind: ModelKind,
    pub params: Params,
    pub seed: u64,
    pub n_features: usize,
    pub fitted: Fitted,
}

fn validate(x: &[Vec<f64>], y: &[usize]) -> Result<usize, MlError> {
    if x.len() != y.len() {
        return Err(MlError::InvalidParameter(format!("{} rows but {} labels", x.len(), y.len())));
    }
    if x.is_empty() {
        return Err(MlError::TooFewSamples { needed: 1, got: 0 });
    }
    let d = x[0].len();
    if x.iter().any(|r| r.len() != d) {
        return Err(MlError::InvalidParameter("ragged feature matrix".into()));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(MlError::SingularInput("non-finite feature value".into()));
    }
    if let Some(bad) = y.iter().find(|&&c| c >= N_CLASSES) {
        return Err(MlError::InvalidParameter(format!("label {bad} outside the {N_CLASSES}-class space")));
    }
    Ok(d)
}

pub fn train(kind: ModelKind, x: &[Vec<f64>], y: &[usize], params: &Params, seed: u64) -> Result<Model, MlError> {
    use rand::SeedableRng;
    let d = validate(x, y)?;
    let tree_params = |max_features: Option<usize>| TreeParams {
        max_depth: params.max_depth,
        min_samples_split: params.min_samples_split,
        max_features,
    };
    let fitted = match kind {
        ModelKind::LogisticRegression => Fitted::LogisticRegression(LinearOvr::fit(
            x,
            y,
            N_CLASSES,
            Loss::Logistic,
            params.lr_iterations,
            params.lr_learning_rate,
            params.lr_l2,
        )),
        ModelKind::SupportVectorMachine => Fitted::SupportVectorMachine(LinearOvr::fit(
            x,
            y,
            N_CLASSES,
            Loss::Hinge,
            params.svm_iterations,
            params.svm_learning_rate,
            params.svm_l2,
        )),
        ModelKind::DecisionTree => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            Fitted::DecisionTree(fit_classifier(x, y, (0..x.len()).collect(), N_CLASSES, &tree_params(None), &mut rng))
        }
        ModelKind::RandomForest => Fitted::RandomForest(Forest::fit(
            x,
            y,
            N_CLASSES,
            params.n_trees.max(1),
            &tree_params(Some(params.forest_max_features.resolve(d))),
            seed,
        )),
        ModelKind::KNearestNeighbors => Fitted::KNearestNeighbors(Knn::fit(x, y, N_CLASSES, params.k)),
        ModelKind::GradientBoosting => Fitted::GradientBoosting(Boosting::fit(
            x,
            y,
            N_CLASSES,
            params.gb_stages,
            params.gb_learning_rate,
            params.gb_max_depth,
            seed,
        )),
        ModelKind::GaussianNaiveBayes => {
            Fitted::GaussianNaiveBayes(GaussianNb::fit(x, y, N_CLASSES, params.nb_var_floor))
        }
    };
    Ok(Model {
        kind,
        params: params.clone(),
        seed,
        n_features: d,
        fitted,
    })
}

impl Model {
    fn raw_proba(&self, x: &[f64]) -> Vec<f64> {
        match &self.fitted {
            Fitted::LogisticRegression(m) | Fitted::SupportVectorMachine(m) => m.predict_proba(x),
            Fitted::DecisionTree(t) => t.leaf_value(x).to_vec(),
            Fitted::RandomForest(f) => f.predict_proba(x),
            Fitted::KNearestNeighbors(m) => m.predict_proba(x),
            Fitted::GradientBoosting(m) => m.predict_proba(x),
            Fitted::GaussianNaiveBayes(m) => m.predict_proba(x),
        }
    }

    pub fn proba(&self, x: &[f64]) -> Result<Vec<f64>, MlError> {
        if x.len() != self.n_features {
            return Err(MlError::EncoderMismatch {
                expected: self.n_features,
                got: x.len(),
            });
        }
        Ok(self.raw_proba(x))
    }

    pub fn predict(&self, x: &[f64]) -> Result<ClassLabel, MlError> {
        let p = self.proba(x)?;
        let i = argmax(&p);
        Ok(ClassLabel {
            group: MembraneGroup::TARGETS[i],
            confidence: p[i],
        })
    }

    pub fn predict_index(&self, x: &[f64]) -> usize {
        argmax(&self.raw_proba(x))
    }

    /// Impurity-based importances for tree models.
    pub fn feature_importances(&self) -> Option<Vec<f64>> {
        match &self.fitted {
            Fitted::RandomForest(f) => Some(f.feature_importances()),
            Fitted::DecisionTree(t) => Some(t.normalized_importance()),
            _ => None,
        }
    }
}

impl Classifier for Model {
    fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        self.raw_proba(x)
    }
}
