//! Versioned JSON persistence for a fitted model and its encoder.

use serde::{Deserialize, Serialize};

use super::data::training_digest;
use super::encoder::Encoder;
use super::model::{train, Classifier, Fitted, Model, ModelKind, Params};
use crate::error::MlError;
use crate::model::{ClassLabel, OpmFeatures};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u32,
    pub kind: ModelKind,
    pub params: Params,
    pub seed: u64,
    pub n_features: usize,
    pub fitted: Fitted,
    pub encoder: Encoder,
    pub training_digest: String,
}

/// A model bundled with the encoder it was trained behind.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedClassifier {
    pub model: Model,
    pub encoder: Encoder,
    pub training_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: ClassLabel,
    pub probabilities: Vec<f64>,
    pub warnings: Vec<String>,
}

impl TrainedClassifier {
    pub fn fit(
        kind: ModelKind,
        encoder: Encoder,
        x: &[Vec<f64>],
        y: &[usize],
        params: &Params,
        seed: u64,
    ) -> Result<Self, MlError> {
        if let Some(r) = x.first() {
            if r.len() != encoder.dim() {
                return Err(MlError::EncoderMismatch {
                    expected: encoder.dim(),
                    got: r.len(),
                });
            }
        }
        Ok(TrainedClassifier {
            model: train(kind, x, y, params, seed)?,
            encoder,
            training_digest: training_digest(x, y),
        })
    }

    pub fn classify(&self, features: &OpmFeatures) -> Result<Prediction, MlError> {
        let enc = self.encoder.encode(features)?;
        let label = self.model.predict(&enc.vector)?;
        Ok(Prediction {
            label,
            probabilities: self.model.predict_proba(&enc.vector),
            warnings: enc.warnings,
        })
    }

    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            format_version: FORMAT_VERSION,
            kind: self.model.kind,
            params: self.model.params.clone(),
            seed: self.model.seed,
            n_features: self.model.n_features,
            fitted: self.model.fitted.clone(),
            encoder: self.encoder.clone(),
            training_digest: self.training_digest.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("model documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, MlError> {
        let doc: ModelDocument = serde_json::from_str(text).map_err(|e| MlError::Document(e.to_string()))?;
        if doc.format_version != FORMAT_VERSION {
            return Err(MlError::Document(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                doc.format_version
            )));
        }
        if doc.n_features != doc.encoder.dim() {
            return Err(MlError::EncoderMismatch {
                expected: doc.encoder.dim(),
                got: doc.n_features,
            });
        }
        Ok(TrainedClassifier {
            model: Model {
                kind: doc.kind,
                params: doc.params,
                seed: doc.seed,
                n_features: doc.n_features,
                fitted: doc.fitted,
            },
            encoder: doc.encoder,
            training_digest: doc.training_digest,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opm(thickness: f64, tilt: f64, segs: u32, tin: &str) -> OpmFeatures {
        OpmFeatures {
            thickness: Some(thickness),
            tilt: Some(tilt),
            subunit_segments: Some(segs),
            topology_in: Some(tin.into()),
            topology_out: Some("out".into()),
            ..Default::default()
        }
    }

    fn fixture() -> (Encoder, Vec<Vec<f64>>, Vec<usize>) {
        let rows: Vec<(OpmFeatures, usize)> = (0..30)
            .map(|i| {
                let c = i % 3;
                (opm(20.0 + 5.0 * c as f64 + (i % 4) as f64 * 0.3, 10.0 * c as f64, 1 + 6 * c as u32, if c == 0 { "a" } else { "b" }), c)
            })
            .collect();
        let enc = Encoder::fit(&rows.iter().map(|r| &r.0).collect::<Vec<_>>()).unwrap();
        let x = rows.iter().map(|r| enc.encode(&r.0).unwrap().vector).collect();
        (enc, x, rows.iter().map(|r| r.1).collect())
    }

    #[test]
    fn json_round_trip_predicts_identically() {
        let (enc, x, y) = fixture();
        for kind in ModelKind::ALL {
            let params = Params { n_trees: 10, gb_stages: 10, ..Default::default() };
            let tc = TrainedClassifier::fit(kind, enc.clone(), &x, &y, &params, 7).unwrap();
            let back = TrainedClassifier::from_json(&tc.to_json()).unwrap();
            assert_eq!(back, tc, "{kind}");
            let q = opm(26.0, 9.0, 6, "b");
            assert_eq!(back.classify(&q).unwrap(), tc.classify(&q).unwrap());
        }
    }

    #[test]
    fn rejects_other_versions() {
        let (enc, x, y) = fixture();
        let tc = TrainedClassifier::fit(ModelKind::GaussianNaiveBayes, enc, &x, &y, &Params::default(), 0).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&tc.to_json()).unwrap();
        v["format_version"] = 99.into();
        assert!(matches!(TrainedClassifier::from_json(&v.to_string()), Err(MlError::Document(_))));
        assert!(matches!(TrainedClassifier::from_json("{"), Err(MlError::Document(_))));
    }

    #[test]
    fn classify_reports_unseen_category() {
        let (enc, x, y) = fixture();
        let tc = TrainedClassifier::fit(ModelKind::KNearestNeighbors, enc, &x, &y, &Params::default(), 0).unwrap();
        let p = tc.classify(&opm(25.0, 10.0, 7, "zzz")).unwrap();
        assert_eq!(p.warnings.len(), 1);
        assert!((p.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert_eq!(p.label.confidence, p.probabilities.iter().copied().fold(0.0, f64::max));
    }
}
