//! Training-set assembly from merged entries.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::encoder::Encoder;
use crate::analytics::{detect_outliers, OutlierConfig, DEFAULT_FEATURES};
use crate::discrepancy::canonical_group;
use crate::error::MlError;
use crate::model::{MembraneGroup, OpmFeatures, PdbCode, ProteinEntry, SourceTag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub pdb_code: PdbCode,
    pub features: OpmFeatures,
    /// Target index from the MPstruc group; `None` puts the row in the
    /// unlabeled pool.
    pub label: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub pdb_code: PdbCode,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MlDataset {
    pub rows: Vec<DatasetRow>,
    pub excluded: Vec<Exclusion>,
    pub warnings: Vec<String>,
}

fn exclude(out: &mut MlDataset, code: &PdbCode, reason: impl Into<String>) {
    out.excluded.push(Exclusion {
        pdb_code: code.clone(),
        reason: reason.into(),
    });
}

/// Keeps entries with complete, in-range OPM features, drops expert
/// Bitopic / non-membrane entries and the analytic outliers, and labels the
/// rest by their canonical MPstruc group.
pub fn prepare_dataset(entries: &[ProteinEntry], outliers: &OutlierConfig) -> MlDataset {
    let mut out = MlDataset::default();
    let features: Vec<String> = DEFAULT_FEATURES.iter().map(|s| s.to_string()).collect();
    let flagged = match detect_outliers(entries, &features, outliers) {
        Ok(report) => {
            out.warnings.extend(report.warnings);
            report.outliers
        }
        Err(e) => {
            out.warnings.push(format!("outlier filter skipped: {e}"));
            Vec::new()
        }
    };
    for e in entries {
        let code = &e.pdb_code;
        let Some(opm) = e.opm.as_ref().filter(|_| e.is_ml_eligible()) else {
            exclude(&mut out, code, "incomplete or out-of-range OPM features");
            continue;
        };
        if matches!(
            e.group(SourceTag::Expert),
            Some(MembraneGroup::Bitopic | MembraneGroup::NotAMembraneProtein)
        ) {
            exclude(&mut out, code, "expert label outside the three target groups");
            continue;
        }
        if flagged.contains(code) {
            exclude(&mut out, code, "analytic outlier");
            continue;
        }
        let label = match e.group(SourceTag::MPstruc).map(canonical_group) {
            None => None,
            Some(g) => match g.target_index() {
                Some(i) => Some(i),
                None => {
                    exclude(&mut out, code, format!("MPstruc group {} is not a target", g.label()));
                    continue;
                }
            },
        };
        out.rows.push(DatasetRow {
            pdb_code: code.clone(),
            features: opm.clone(),
            label,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub codes: Vec<PdbCode>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<usize>,
    pub warnings: Vec<String>,
}

impl MlDataset {
    pub fn labeled(&self) -> impl Iterator<Item = &DatasetRow> {
        self.rows.iter().filter(|r| r.label.is_some())
    }

    pub fn unlabeled(&self) -> impl Iterator<Item = &DatasetRow> {
        self.rows.iter().filter(|r| r.label.is_none())
    }

    /// Encoder fitted on the labeled rows.
    pub fn fit_encoder(&self) -> Result<Encoder, MlError> {
        Encoder::fit(&self.labeled().map(|r| &r.features).collect::<Vec<_>>())
    }

    pub fn labeled_matrix(&self, encoder: &Encoder) -> Result<Matrix, MlError> {
        encode_rows(encoder, self.labeled())
    }

    pub fn unlabeled_matrix(&self, encoder: &Encoder) -> Result<Matrix, MlError> {
        encode_rows(encoder, self.unlabeled())
    }
}

fn encode_rows<'a>(encoder: &Encoder, rows: impl Iterator<Item = &'a DatasetRow>) -> Result<Matrix, MlError> {
    let mut m = Matrix {
        codes: Vec::new(),
        x: Vec::new(),
        y: Vec::new(),
        warnings: Vec::new(),
    };
    for r in rows {
        let enc = encoder.encode(&r.features)?;
        m.warnings.extend(enc.warnings.into_iter().map(|w| format!("{}: {w}", r.pdb_code)));
        m.codes.push(r.pdb_code.clone());
        m.x.push(enc.vector);
        if let Some(l) = r.label {
            m.y.push(l);
        }
    }
    Ok(m)
}

/// SHA-256 over the training matrix and labels.
pub fn training_digest(x: &[Vec<f64>], y: &[usize]) -> String {
    let mut h = Sha256::new();
    for (row, label) in x.iter().zip(y) {
        for v in row {
            h.update(v.to_le_bytes());
        }
        h.update((*label as u64).to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
