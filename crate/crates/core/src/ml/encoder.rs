//! OPM features to model vectors: three standardized numerics followed by
//! one-hot blocks for topology_in and topology_out.

use serde::{Deserialize, Serialize};

use crate::error::MlError;
use crate::model::OpmFeatures;

pub const NUMERIC_FEATURES: [&str; 3] = ["thickness", "tilt", "subunit_segments"];
pub const CATEGORICAL_FEATURES: [&str; 2] = ["topology_in", "topology_out"];
/// The five input features as seen by importance and Shapley grouping.
pub const FEATURE_NAMES: [&str; 5] = ["thickness", "tilt", "subunit_segments", "topology_in", "topology_out"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    pub means: [f64; 3],
    pub stds: [f64; 3],
    /// Sorted category vocabularies seen at fit time.
    pub topology_in: Vec<String>,
    pub topology_out: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoded {
    pub vector: Vec<f64>,
    pub warnings: Vec<String>,
}

struct Complete<'a> {
    numeric: [f64; 3],
    topology_in: &'a str,
    topology_out: &'a str,
}

fn complete(f: &OpmFeatures) -> Result<Complete<'_>, MlError> {
    let missing = f.missing_ml_fields();
    if !missing.is_empty() {
        return Err(MlError::IncompleteFeatures(missing.into_iter().map(String::from).collect()));
    }
    Ok(Complete {
        numeric: [f.thickness.unwrap(), f.tilt.unwrap(), f64::from(f.subunit_segments.unwrap())],
        topology_in: f.topology_in.as_deref().unwrap(),
        topology_out: f.topology_out.as_deref().unwrap(),
    })
}

fn vocabulary<'a>(values: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut v: Vec<String> = values.map(str::to_string).collect();
    v.sort();
    v.dedup();
    v
}

impl Encoder {
    pub fn fit(rows: &[&OpmFeatures]) -> Result<Self, MlError> {
        if rows.is_empty() {
            return Err(MlError::TooFewSamples { needed: 1, got: 0 });
        }
        let rows: Vec<Complete> = rows.iter().map(|f| complete(f)).collect::<Result<_, _>>()?;
        let n = rows.len() as f64;
        let mut means = [0.0; 3];
        let mut stds = [1.0; 3];
        for j in 0..3 {
            means[j] = rows.iter().map(|r| r.numeric[j]).sum::<f64>() / n;
            if rows.len() > 1 {
                let var = rows.iter().map(|r| (r.numeric[j] - means[j]).powi(2)).sum::<f64>() / (n - 1.0);
                // A constant column is centred but left unscaled.
                if var > 0.0 {
                    stds[j] = var.sqrt();
                }
            }
        }
        Ok(Encoder {
            means,
            stds,
            topology_in: vocabulary(rows.iter().map(|r| r.topology_in)),
            topology_out: vocabulary(rows.iter().map(|r| r.topology_out)),
        })
    }

    pub fn dim(&self) -> usize {
        3 + self.topology_in.len() + self.topology_out.len()
    }

    /// Column names, e.g. `topology_in=Cytoplasmic`.
    pub fn feature_names(&self) -> Vec<String> {
        let mut names: Vec<String> = NUMERIC_FEATURES.iter().map(|s| s.to_string()).collect();
        names.extend(self.topology_in.iter().map(|c| format!("topology_in={c}")));
        names.extend(self.topology_out.iter().map(|c| format!("topology_out={c}")));
        names
    }

    /// Column indices for each of the five input features.
    pub fn players(&self) -> Vec<Vec<usize>> {
        let a = 3 + self.topology_in.len();
        vec![vec![0], vec![1], vec![2], (3..a).collect(), (a..self.dim()).collect()]
    }

    pub fn encode(&self, f: &OpmFeatures) -> Result<Encoded, MlError> {
        let c = complete(f)?;
        let mut vector: Vec<f64> = (0..3).map(|j| (c.numeric[j] - self.means[j]) / self.stds[j]).collect();
        let mut warnings = Vec::new();
        for (name, vocab, value) in [
            ("topology_in", &self.topology_in, c.topology_in),
            ("topology_out", &self.topology_out, c.topology_out),
        ] {
            let hit = vocab.iter().position(|v| v == value);
            if hit.is_none() {
                warnings.push(format!("unseen {name} category {value:?}; block left all-zero"));
            }
            vector.extend((0..vocab.len()).map(|i| if Some(i) == hit { 1.0 } else { 0.0 }));
        }
        Ok(Encoded { vector, warnings })
    }
}
