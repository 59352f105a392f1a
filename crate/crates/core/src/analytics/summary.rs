//! Distributions, temporal trends and geography over the entry store.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::stats::{mean, sample_std};
use crate::error::AnalyticsError;
use crate::model::{canonical_method, ProteinEntry};

pub const MISSING: &str = "(missing)";

/// Dimensions of the summary-statistics view and how each is bucketed.
enum Dimension {
    Nominal(&'static str),
    Binned { attribute: &'static str, width: f64 },
}

fn dimension(attribute: &str) -> Option<Dimension> {
    Some(match attribute {
        "experimental_method" | "method" => Dimension::Nominal("experimental_method"),
        "molecular_type" => Dimension::Nominal("molecular_type"),
        "expressed_in" | "expression_organism" => Dimension::Nominal("expressed_in"),
        "software" => Dimension::Nominal("software"),
        "space_group" => Dimension::Nominal("space_group"),
        "group" => Dimension::Nominal("group"),
        "journal" => Dimension::Nominal("journal"),
        "growth_method" => Dimension::Nominal("exptl_crystal_grow_method"),
        "taxonomic_domain" => Dimension::Nominal("taxonomic_domain"),
        "country" => Dimension::Nominal("country"),
        "subgroup" => Dimension::Nominal("subgroup"),
        "resolution" => Dimension::Binned {
            attribute: "resolution",
            width: 1.0,
        },
        "molecular_weight" => Dimension::Binned {
            attribute: "molecular_weight",
            width: 50.0,
        },
        "atom_count" => Dimension::Binned {
            attribute: "atom_count",
            width: 5000.0,
        },
        _ => return None,
    })
}

/// One bucket of a distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub category: String,
    pub count: usize,
}

/// Counts entries per category (or numeric bin) of `attribute`. Nominal
/// categories are ordered by descending count then name, bins ascending;
/// missing values form a trailing `(missing)` bucket.
pub fn summary_distribution(entries: &[ProteinEntry], attribute: &str) -> Result<Vec<Bucket>, AnalyticsError> {
    let dim = dimension(attribute).ok_or_else(|| AnalyticsError::UnknownAttribute(attribute.to_string()))?;
    let mut missing = 0usize;
    let mut out = match dim {
        Dimension::Nominal(attr) => {
            let mut counts: BTreeMap<String, usize> = BTreeMap::new();
            for e in entries {
                match e.text(attr) {
                    Some(v) => *counts.entry(v).or_default() += 1,
                    None => missing += 1,
                }
            }
            let mut buckets: Vec<Bucket> = counts
                .into_iter()
                .map(|(category, count)| Bucket { category, count })
                .collect();
            buckets.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.category.cmp(&b.category)));
            buckets
        }
        Dimension::Binned { attribute, width } => {
            let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
            for e in entries {
                match e.numeric(attribute) {
                    Some(v) => *counts.entry((v / width).floor() as i64).or_default() += 1,
                    None => missing += 1,
                }
            }
            counts
                .into_iter()
                .map(|(bin, count)| Bucket {
                    category: format!("[{}, {})", bin as f64 * width, (bin + 1) as f64 * width),
                    count,
                })
                .collect()
        }
    };
    if missing > 0 {
        out.push(Bucket {
            category: MISSING.to_string(),
            count: missing,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub year: i32,
    pub mean: f64,
    /// Present only when `n ≥ 2`.
    pub std: Option<f64>,
    pub n: usize,
}

/// Per-year mean and sample std of resolution for one experimental method.
/// Method names are compared after canonicalization ("cryo-EM" = "EM").
pub fn resolution_trend(entries: &[ProteinEntry], method: &str) -> Vec<TrendPoint> {
    let wanted = canonical_method(method);
    let mut by_year: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
    for e in entries {
        let matches = e
            .experimental_method
            .as_deref()
            .is_some_and(|m| canonical_method(m).eq_ignore_ascii_case(&wanted));
        if let (true, Some(r)) = (matches, e.resolution) {
            by_year.entry(e.year).or_default().push(r);
        }
    }
    by_year
        .into_iter()
        .map(|(year, rs)| TrendPoint {
            year,
            mean: mean(&rs).expect("non-empty year"),
            std: sample_std(&rs),
            n: rs.len(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Share {
    pub country: String,
    pub proportion: f64,
    pub count: usize,
}

/// Proportion of entries per country among those with a known country,
/// largest first.
pub fn country_share(entries: &[ProteinEntry]) -> Vec<Share> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for e in entries {
        if let Some(c) = e.country.as_deref() {
            *counts.entry(c).or_default() += 1;
        }
    }
    let total: usize = counts.values().sum();
    let mut out: Vec<Share> = counts
        .into_iter()
        .map(|(country, count)| Share {
            country: country.to_string(),
            proportion: count as f64 / total as f64,
            count,
        })
        .collect();
    out.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.country.cmp(&b.country)));
    out
}

/// Cumulative count per facet value for every year between the first and
/// last year present in `entries`.
pub type CumulativeSeries = BTreeMap<String, Vec<(i32, usize)>>;

pub fn cumulative_by_year(entries: &[ProteinEntry], facet: &str) -> Result<CumulativeSeries, AnalyticsError> {
    let attr = match facet {
        "taxonomic_domain" | "group" | "experimental_method" => facet,
        other => return Err(AnalyticsError::UnknownAttribute(other.to_string())),
    };
    let mut per_facet: BTreeMap<String, BTreeMap<i32, usize>> = BTreeMap::new();
    for e in entries {
        let key = e.text(attr).unwrap_or_else(|| MISSING.to_string());
        *per_facet.entry(key).or_default().entry(e.year).or_default() += 1;
    }
    let (Some(first), Some(last)) = (
        entries.iter().map(|e| e.year).min(),
        entries.iter().map(|e| e.year).max(),
    ) else {
        return Ok(BTreeMap::new());
    };
    Ok(per_facet
        .into_iter()
        .map(|(key, per_year)| {
            let mut running = 0;
            let series = (first..=last)
                .map(|y| {
                    running += per_year.get(&y).copied().unwrap_or(0);
                    (y, running)
                })
                .collect();
            (key, series)
        })
        .collect())
}
