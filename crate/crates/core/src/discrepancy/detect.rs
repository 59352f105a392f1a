use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::DiscrepancyError;
use crate::model::{MembraneGroup, PdbCode, ProteinEntry, SourceTag};

/// Bitopic proteins are single-span alpha-helical transmembrane proteins.
pub fn canonical_group(raw: MembraneGroup) -> MembraneGroup {
    match raw {
        MembraneGroup::Bitopic => MembraneGroup::TransmembraneAlphaHelical,
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DiscrepancyKind {
    GroupMismatch,
    TmMismatch,
}

/// What a source said: a raw group label or a segment count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Observed {
    Count(u32),
    Label(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyRecord {
    pub pdb_code: PdbCode,
    pub year: i32,
    pub kind: DiscrepancyKind,
    pub values: BTreeMap<SourceTag, Observed>,
    pub magnitude: f64,
    pub resolved: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution_note: Option<String>,
}

impl DiscrepancyRecord {
    /// Sources compared by this record.
    pub fn sources(&self) -> Vec<SourceTag> {
        self.values.keys().copied().collect()
    }

    /// Identity within a register: one record per entry, kind and source set.
    pub fn key(&self) -> (PdbCode, DiscrepancyKind, Vec<SourceTag>) {
        (self.pdb_code.clone(), self.kind, self.sources())
    }
}

/// Flags `entry` when the canonical groups of any pair in `pairs` differ.
/// Pairs where either source is silent are skipped. The magnitude is the
/// number of distinct canonical groups among the compared sources minus one.
pub fn detect_group_discrepancy(entry: &ProteinEntry, pairs: &[(SourceTag, SourceTag)]) -> Option<DiscrepancyRecord> {
    let mut values = BTreeMap::new();
    let mut groups = BTreeSet::new();
    let mut differs = false;
    for &(a, b) in pairs {
        let (Some(la), Some(lb)) = (entry.group_by_source.get(&a), entry.group_by_source.get(&b)) else {
            continue;
        };
        let (ga, gb) = (canonical_group(la.group), canonical_group(lb.group));
        values.insert(a, Observed::Label(la.raw.clone()));
        values.insert(b, Observed::Label(lb.raw.clone()));
        groups.insert(ga);
        groups.insert(gb);
        differs |= ga != gb;
    }
    differs.then(|| DiscrepancyRecord {
        pdb_code: entry.pdb_code.clone(),
        year: entry.year,
        kind: DiscrepancyKind::GroupMismatch,
        values,
        magnitude: (groups.len() - 1) as f64,
        resolved: false,
        resolution_note: None,
    })
}

/// Outcome of comparing one reference/predictor pair of TM counts.
#[derive(Debug, Clone, PartialEq)]
pub enum TmComparison {
    Flagged(DiscrepancyRecord),
    Agrees,
    /// At least one side has no count.
    Uncomparable,
}

pub fn compare_tm(entry: &ProteinEntry, reference: SourceTag, predictor: SourceTag, threshold: u32) -> TmComparison {
    let (Some(r), Some(p)) = (entry.tm_count(reference), entry.tm_count(predictor)) else {
        return TmComparison::Uncomparable;
    };
    let delta = r.abs_diff(p);
    if delta <= threshold {
        return TmComparison::Agrees;
    }
    TmComparison::Flagged(DiscrepancyRecord {
        pdb_code: entry.pdb_code.clone(),
        year: entry.year,
        kind: DiscrepancyKind::TmMismatch,
        values: BTreeMap::from([(reference, Observed::Count(r)), (predictor, Observed::Count(p))]),
        magnitude: delta as f64,
        resolved: false,
        resolution_note: None,
    })
}

pub fn detect_tm_discrepancy(
    entry: &ProteinEntry,
    reference: SourceTag,
    predictor: SourceTag,
    threshold: u32,
) -> Option<DiscrepancyRecord> {
    match compare_tm(entry, reference, predictor, threshold) {
        TmComparison::Flagged(r) => Some(r),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionConfig {
    pub group_pairs: Vec<(SourceTag, SourceTag)>,
    pub tm_reference: SourceTag,
    pub tm_predictors: Vec<SourceTag>,
    pub tm_threshold: u32,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            group_pairs: vec![(SourceTag::OPM, SourceTag::MPstruc)],
            tm_reference: SourceTag::Expert,
            tm_predictors: vec![SourceTag::TMbed, SourceTag::DeepTMHMM],
            tm_threshold: 0,
        }
    }
}

/// All records for `entries` plus the number of TM comparisons that were
/// skipped because a count was absent.
pub fn detect_all(entries: &[ProteinEntry], config: &DetectionConfig) -> (Vec<DiscrepancyRecord>, usize) {
    let mut out = Vec::new();
    let mut uncomparable = 0;
    for e in entries {
        out.extend(detect_group_discrepancy(e, &config.group_pairs));
        for &p in &config.tm_predictors {
            match compare_tm(e, config.tm_reference, p, config.tm_threshold) {
                TmComparison::Flagged(r) => out.push(r),
                TmComparison::Agrees => {}
                TmComparison::Uncomparable => uncomparable += 1,
            }
        }
    }
    (out, uncomparable)
}

/// Descending magnitude; ties by code, then kind, then source set.
pub fn rank_discrepancies(records: &[DiscrepancyRecord]) -> Vec<DiscrepancyRecord> {
    let mut out = records.to_vec();
    out.sort_by(|a, b| {
        b.magnitude
            .total_cmp(&a.magnitude)
            .then_with(|| a.key().cmp(&b.key()))
    });
    out
}

/// Count per year for every year in `from..=to`, zeros included.
pub fn yearly_discrepancy_counts(
    records: &[DiscrepancyRecord],
    from: i32,
    to: i32,
) -> Result<Vec<(i32, usize)>, DiscrepancyError> {
    if from > to {
        return Err(DiscrepancyError::InvalidRange { from, to });
    }
    let mut counts: BTreeMap<i32, usize> = (from..=to).map(|y| (y, 0)).collect();
    for r in records {
        if let Some(c) = counts.get_mut(&r.year) {
            *c += 1;
        }
    }
    Ok(counts.into_iter().collect())
}
