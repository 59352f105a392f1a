//! standardize → PCA → DBSCAN, composed for the outlier-detection view.

use serde::{Deserialize, Serialize};

use super::dbscan::{dbscan, ClusterLabels};
use super::pca::{pca, standardize, PcaResult};
use crate::error::AnalyticsError;
use crate::model::{PdbCode, ProteinEntry};

/// Default scatter-plot-matrix features.
pub const DEFAULT_FEATURES: [&str; 3] = ["exptl_crystal_density_matthews", "resolution", "molecular_weight"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterSpace {
    /// DBSCAN over the first `k` principal-component scores.
    Pca,
    /// DBSCAN over the standardized features directly.
    Standardized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierConfig {
    pub eps: f64,
    pub min_pts: usize,
    pub k: usize,
    pub space: ClusterSpace,
}

impl Default for OutlierConfig {
    fn default() -> Self {
        OutlierConfig {
            eps: 0.9,
            min_pts: 5,
            k: 2,
            space: ClusterSpace::Pca,
        }
    }
}

/// Everything the linked outlier charts need: raw values, scores, labels.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutlierReport {
    pub features: Vec<String>,
    /// Codes of the analysed entries, aligned with `values`, `labels` and
    /// the PCA projections.
    pub codes: Vec<PdbCode>,
    pub values: Vec<Vec<f64>>,
    pub outliers: Vec<PdbCode>,
    pub pca: Option<PcaResult>,
    pub labels: Option<ClusterLabels>,
    /// Entries missing at least one feature; never imputed.
    pub excluded: usize,
    pub warnings: Vec<String>,
}

pub fn detect_outliers(
    entries: &[ProteinEntry],
    features: &[String],
    config: &OutlierConfig,
) -> Result<OutlierReport, AnalyticsError> {
    if features.is_empty() {
        return Err(AnalyticsError::InvalidParameter("no features selected".into()));
    }
    let mut report = OutlierReport {
        features: features.to_vec(),
        ..Default::default()
    };
    for e in entries {
        let row: Option<Vec<f64>> = features.iter().map(|f| e.numeric(f)).collect();
        match row {
            Some(r) if r.iter().all(|v| v.is_finite()) => {
                report.codes.push(e.pdb_code.clone());
                report.values.push(r);
            }
            _ => report.excluded += 1,
        }
    }
    if report.values.len() < 2 {
        return Ok(report);
    }
    let z = standardize(&report.values)?;
    report.warnings.extend(z.warnings.iter().cloned());
    if z.retained.is_empty() {
        report.warnings.push("every feature is constant; no outliers".into());
        return Ok(report);
    }
    let k = config.k.min(z.retained.len()).max(1);
    if k != config.k {
        report.warnings.push(format!("k reduced from {} to {k}", config.k));
    }
    let p = pca(&z.rows, k)?;
    let space = match config.space {
        ClusterSpace::Pca => &p.projections,
        ClusterSpace::Standardized => &z.rows,
    };
    let labels = dbscan(space, config.eps, config.min_pts)?;
    report.outliers = labels.noise().into_iter().map(|i| report.codes[i].clone()).collect();
    report.pca = Some(p);
    report.labels = Some(labels);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Scalar;

    fn typical(i: usize) -> ProteinEntry {
        let mut e = ProteinEntry::new(PdbCode::parse(&format!("{}T{:02}", 1 + i % 9, i)).unwrap(), "x", 2015);
        let t = i as f64 / 30.0;
        e.resolution = Some(2.0 + 2.0 * t);
        e.molecular_weight = Some(80.0 + 40.0 * ((i * 7) % 30) as f64 / 30.0);
        e.extra.insert(
            "exptl_crystal_density_matthews".into(),
            Scalar::Float(2.2 + 0.8 * ((i * 11) % 30) as f64 / 30.0),
        );
        e
    }

    fn default_features() -> Vec<String> {
        DEFAULT_FEATURES.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn forty_angstrom_entry_is_noise() {
        let mut es: Vec<_> = (0..30).map(typical).collect();
        let mut far = typical(99);
        far.pdb_code = PdbCode::parse("6ZG5").unwrap();
        far.resolution = Some(40.0);
        es.push(far);
        let r = detect_outliers(&es, &default_features(), &OutlierConfig::default()).unwrap();
        assert!(r.outliers.iter().any(|c| c.as_str() == "6ZG5"), "{:?}", r.outliers);
    }

    #[test]
    fn empty_input_and_incomplete_rows() {
        let r = detect_outliers(&[], &default_features(), &OutlierConfig::default()).unwrap();
        assert!(r.outliers.is_empty() && r.pca.is_none());
        let mut es: Vec<_> = (0..10).map(typical).collect();
        es[0].molecular_weight = None;
        let r = detect_outliers(&es, &default_features(), &OutlierConfig::default()).unwrap();
        assert_eq!(r.excluded, 1);
        assert_eq!(r.codes.len(), 9);
    }

    #[test]
    fn k_is_clamped_to_retained_columns() {
        let es: Vec<_> = (0..10).map(typical).collect();
        let cfg = OutlierConfig { k: 5, ..Default::default() };
        let r = detect_outliers(&es, &default_features(), &cfg).unwrap();
        assert_eq!(r.pca.unwrap().components.len(), 3);
        assert!(r.warnings.iter().any(|w| w.contains("k reduced")));
    }
}
