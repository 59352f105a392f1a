//! The discrepancy register: records detected at load time, re-evaluated as
//! curators submit expert resolutions, with an append-only audit trail.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::detect::{canonical_group, compare_tm, detect_all, DetectionConfig, DiscrepancyKind, DiscrepancyRecord, TmComparison};
use crate::error::DiscrepancyError;
use crate::model::{GroupLabel, PdbCode, ProteinEntry, SourceTag, TmAnnotation};

/// Body of a resolution submission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolutionRequest {
    /// Group label text, e.g. "Transmembrane proteins:beta-barrel".
    pub expert_group: String,
    #[serde(default)]
    pub expert_tm: Option<u32>,
    pub note: String,
    pub author: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertState {
    pub group: Option<GroupLabel>,
    pub tm: Option<TmAnnotation>,
}

impl ExpertState {
    fn of(entry: &ProteinEntry) -> Self {
        ExpertState {
            group: entry.group_by_source.get(&SourceTag::Expert).cloned(),
            tm: entry.tm.iter().find(|a| a.source == SourceTag::Expert).cloned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub timestamp: String,
    pub pdb_code: PdbCode,
    pub author: String,
    pub note: String,
    pub before: ExpertState,
    pub after: ExpertState,
}

/// Sets the Expert annotations of `entry`. Source annotations are never
/// touched. A missing `expert_tm` keeps the current Expert count.
pub fn apply_expert_resolution(
    entry: &ProteinEntry,
    request: &ResolutionRequest,
) -> Result<(ProteinEntry, AuditRecord), DiscrepancyError> {
    if request.note.trim().is_empty() {
        return Err(DiscrepancyError::Validation("resolution note must not be empty".into()));
    }
    if request.author.trim().is_empty() {
        return Err(DiscrepancyError::Validation("author must not be empty".into()));
    }
    let label = GroupLabel::parse(&request.expert_group)
        .map_err(|e| DiscrepancyError::Validation(e.to_string()))?;
    let before = ExpertState::of(entry);
    let mut updated = entry.clone();
    updated.group_by_source.insert(SourceTag::Expert, label);
    if let Some(tm) = request.expert_tm {
        updated.set_tm(SourceTag::Expert, Some(tm), None);
    }
    let audit = AuditRecord {
        timestamp: chrono::Utc::now().to_rfc3339(),
        pdb_code: entry.pdb_code.clone(),
        author: request.author.trim().to_string(),
        note: request.note.trim().to_string(),
        before,
        after: ExpertState::of(&updated),
    };
    Ok((updated, audit))
}

/// True while the expert label still disagrees with every source compared by
/// a group record, or when there is no expert label yet.
pub fn group_record_open(entry: &ProteinEntry, record: &DiscrepancyRecord) -> bool {
    let Some(expert) = entry.group(SourceTag::Expert).map(canonical_group) else {
        return true;
    };
    !record
        .sources()
        .into_iter()
        .filter_map(|s| entry.group(s))
        .any(|g| canonical_group(g) == expert)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Register {
    pub config: DetectionConfig,
    pub records: Vec<DiscrepancyRecord>,
    pub uncomparable: usize,
}

impl Register {
    pub fn build(entries: &[ProteinEntry], config: DetectionConfig) -> Self {
        let (records, uncomparable) = detect_all(entries, &config);
        let mut reg = Register {
            config,
            records,
            uncomparable,
        };
        // Group records already adjudicated by an existing expert label.
        let by_code: BTreeMap<&PdbCode, &ProteinEntry> = entries.iter().map(|e| (&e.pdb_code, e)).collect();
        for r in reg.records.iter_mut().filter(|r| r.kind == DiscrepancyKind::GroupMismatch) {
            if let Some(e) = by_code.get(&r.pdb_code) {
                if !group_record_open(e, r) {
                    r.resolved = true;
                    r.resolution_note = Some("expert annotation present at load".into());
                }
            }
        }
        reg
    }

    pub fn unresolved(&self) -> impl Iterator<Item = &DiscrepancyRecord> {
        self.records.iter().filter(|r| !r.resolved)
    }

    pub fn for_entry<'a>(&'a self, code: &'a PdbCode) -> impl Iterator<Item = &'a DiscrepancyRecord> + 'a {
        self.records.iter().filter(move |r| &r.pdb_code == code)
    }

    /// Re-evaluates every record of `entry` after its Expert annotations
    /// changed. TM mismatches against the new expert count are added.
    pub fn reevaluate(&mut self, entry: &ProteinEntry, note: &str) {
        for r in self.records.iter_mut().filter(|r| r.pdb_code == entry.pdb_code) {
            match r.kind {
                DiscrepancyKind::GroupMismatch => {
                    let open = group_record_open(entry, r);
                    r.resolved = !open;
                    r.resolution_note = (!open).then(|| note.to_string());
                }
                DiscrepancyKind::TmMismatch => {}
            }
        }
        for &p in &self.config.tm_predictors.clone() {
            let sources = {
                let mut s = vec![self.config.tm_reference, p];
                s.sort();
                s
            };
            let existing = self.records.iter().position(|r| {
                r.pdb_code == entry.pdb_code && r.kind == DiscrepancyKind::TmMismatch && r.sources() == sources
            });
            match (compare_tm(entry, self.config.tm_reference, p, self.config.tm_threshold), existing) {
                (TmComparison::Flagged(fresh), Some(i)) => {
                    let r = &mut self.records[i];
                    r.values = fresh.values;
                    r.magnitude = fresh.magnitude;
                    r.resolved = false;
                    r.resolution_note = None;
                }
                (TmComparison::Flagged(fresh), None) => self.records.push(fresh),
                (TmComparison::Agrees, Some(i)) => {
                    let r = &mut self.records[i];
                    r.resolved = true;
                    r.resolution_note = Some(note.to_string());
                }
                _ => {}
            }
        }
    }

    /// Applies `request` to the entry `code` in `entries`, re-evaluates its
    /// records and returns the audit record.
    pub fn resolve(
        &mut self,
        entries: &mut BTreeMap<PdbCode, ProteinEntry>,
        code: &PdbCode,
        request: &ResolutionRequest,
    ) -> Result<AuditRecord, DiscrepancyError> {
        let entry = entries
            .get(code)
            .ok_or_else(|| DiscrepancyError::UnknownEntry(code.to_string()))?;
        let (updated, audit) = apply_expert_resolution(entry, request)?;
        self.reevaluate(&updated, &audit.note);
        entries.insert(code.clone(), updated);
        Ok(audit)
    }
}
