use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::stats::{pearson, spearman, Correlation};
use crate::error::BenchmarkError;
use crate::model::{PdbCode, ProteinEntry, SourceTag};

/// ΔTM = predicted − reference.
pub fn delta_tm(predicted: Option<u32>, reference: Option<u32>) -> Result<i64, BenchmarkError> {
    match (predicted, reference) {
        (Some(p), Some(r)) => Ok(i64::from(p) - i64::from(r)),
        _ => Err(BenchmarkError::MissingAnnotation),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub pair: (SourceTag, SourceTag),
    pub n: usize,
    pub exact_matches: usize,
    pub exact_match_pct: f64,
    /// Mean |ΔTM|.
    pub mae: f64,
    /// Sample std of |ΔTM|; absent when n < 2.
    pub std: Option<f64>,
    pub spearman_rho: Correlation,
    pub pearson_r: Correlation,
    /// Entries where only one side (or neither) had a count.
    pub uncomparable: usize,
    /// Per-entry ΔTM = a − b.
    pub deltas: Vec<(PdbCode, i64)>,
}

/// Compares the TM counts of `a` (predictor) against `b` (reference).
pub fn benchmark_pair(entries: &[ProteinEntry], a: SourceTag, b: SourceTag) -> Result<BenchmarkReport, BenchmarkError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut deltas = Vec::new();
    let mut uncomparable = 0;
    for e in entries {
        match delta_tm(e.tm_count(a), e.tm_count(b)) {
            Ok(d) => {
                xs.push(f64::from(e.tm_count(a).unwrap_or_default()));
                ys.push(f64::from(e.tm_count(b).unwrap_or_default()));
                deltas.push((e.pdb_code.clone(), d));
            }
            Err(_) => uncomparable += 1,
        }
    }
    let n = deltas.len();
    if n == 0 {
        return Err(BenchmarkError::NoComparableEntries(a.to_string(), b.to_string()));
    }
    let abs: Vec<f64> = deltas.iter().map(|(_, d)| d.unsigned_abs() as f64).collect();
    let exact_matches = deltas.iter().filter(|(_, d)| *d == 0).count();
    let mae = abs.iter().sum::<f64>() / n as f64;
    let std = (n >= 2).then(|| {
        let ss: f64 = abs.iter().map(|x| (x - mae).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    });
    let (spearman_rho, pearson_r) = if n >= 2 {
        (spearman(&xs, &ys)?, pearson(&xs, &ys)?)
    } else {
        (Correlation::Undefined, Correlation::Undefined)
    };
    Ok(BenchmarkReport {
        pair: (a, b),
        n,
        exact_matches,
        exact_match_pct: 100.0 * exact_matches as f64 / n as f64,
        mae,
        std,
        spearman_rho,
        pearson_r,
        uncomparable,
        deltas,
    })
}

/// Entries where TMbed and DeepTMHMM report the same count.
pub fn high_confidence_subset(entries: &[ProteinEntry]) -> BTreeSet<PdbCode> {
    entries
        .iter()
        .filter(|e| {
            matches!(
                (e.tm_count(SourceTag::TMbed), e.tm_count(SourceTag::DeepTMHMM)),
                (Some(a), Some(b)) if a == b
            )
        })
        .map(|e| e.pdb_code.clone())
        .collect()
}

pub const REPORT_CSV_HEADER: &str = "predictor_pair,n,exact_matches,exact_match_pct,mae,std,spearman_rho,pearson_r";

/// Table-style CSV, one row per report.
pub fn reports_to_csv(reports: &[BenchmarkReport]) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&format!(
            "{}->{},{},{},{:.2},{:.4},{},{},{}\n",
            r.pair.0,
            r.pair.1,
            r.n,
            r.exact_matches,
            r.exact_match_pct,
            r.mae,
            r.std.map(|s| format!("{s:.4}")).unwrap_or_default(),
            fmt_corr(r.spearman_rho),
            fmt_corr(r.pearson_r),
        ));
    }
    out
}

fn fmt_corr(c: Correlation) -> String {
    match c {
        Correlation::Value(v) => format!("{v:.4}"),
        Correlation::Undefined => "undefined".into(),
    }
}
