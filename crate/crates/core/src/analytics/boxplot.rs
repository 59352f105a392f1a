use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::stats::quantile_sorted;
use crate::model::{canonical_method, MembraneGroup, PdbCode, ProteinEntry, SourceTag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub n: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub iqr: f64,
    pub lower_whisker: f64,
    pub upper_whisker: f64,
    pub outliers: Vec<(PdbCode, f64)>,
}

pub const WHISKER_FACTOR: f64 = 1.5;

/// Tukey box statistics. Whiskers sit on the most extreme observations within
/// 1.5·IQR of the quartiles; anything past the fences is an outlier.
///
/// Returns `None` for an empty input.
pub fn boxplot_stats(values: &[(PdbCode, f64)]) -> Option<BoxStats> {
    if values.is_empty() {
        return None;
    }
    let mut sorted: Vec<f64> = values.iter().map(|(_, v)| *v).collect();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let median = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let lo_fence = q1 - WHISKER_FACTOR * iqr;
    let hi_fence = q3 + WHISKER_FACTOR * iqr;
    let inside = |v: f64| v >= lo_fence && v <= hi_fence;
    // q1 and q3 are interpolated between observations, so at least one
    // observation lies in each fence band and both whiskers exist.
    let lower_whisker = sorted.iter().copied().find(|v| inside(*v)).unwrap_or(q1);
    let upper_whisker = sorted.iter().rev().copied().find(|v| inside(*v)).unwrap_or(q3);
    let mut outliers: Vec<(PdbCode, f64)> = values
        .iter()
        .filter(|(_, v)| !inside(*v))
        .cloned()
        .collect();
    outliers.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    Some(BoxStats {
        n: sorted.len(),
        q1,
        median,
        q3,
        iqr,
        lower_whisker,
        upper_whisker,
        outliers,
    })
}

/// Box statistics of `attribute` per MPstruc group, restricted to one
/// experimental method when `method` is given.
pub fn group_boxplots(
    entries: &[ProteinEntry],
    attribute: &str,
    method: Option<&str>,
) -> BTreeMap<MembraneGroup, BoxStats> {
    let wanted = method.map(canonical_method);
    let mut per_group: BTreeMap<MembraneGroup, Vec<(PdbCode, f64)>> = BTreeMap::new();
    for e in entries {
        if let Some(w) = &wanted {
            let m = e.experimental_method.as_deref().map(canonical_method);
            if !m.is_some_and(|m| m.eq_ignore_ascii_case(w)) {
                continue;
            }
        }
        if let (Some(g), Some(v)) = (e.group(SourceTag::MPstruc), e.numeric(attribute)) {
            per_group.entry(g).or_default().push((e.pdb_code.clone(), v));
        }
    }
    per_group
        .into_iter()
        .filter_map(|(g, vs)| boxplot_stats(&vs).map(|b| (g, b)))
        .collect()
}
