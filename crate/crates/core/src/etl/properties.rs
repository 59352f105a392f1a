//! Executable ETL invariants, shared by the unit suite and the acceptance
//! runner. Each check recomputes its expectation directly rather than
//! through the pipeline helpers it is checking.

use std::collections::{BTreeMap, BTreeSet};

use super::incremental::incremental_update;
use super::pipeline::{stage_record, EtlRun, SourceBundle};
use super::staging::{NormalizationTable, RemapTable};
use crate::model::{PdbCode, ProteinEntry, SourceTag};

/// Staging a staged record changes nothing.
pub fn check_staging_idempotent(bundle: &SourceBundle, tables: &NormalizationTable, remap: &RemapTable) -> Result<(), String> {
    for r in bundle
        .mpstruc
        .records
        .iter()
        .chain(&bundle.pdb.records)
        .chain(&bundle.opm.records)
        .chain(&bundle.uniprot.records)
    {
        let (once, _, _) = stage_record(r, tables, remap);
        let (twice, gaps, old) = stage_record(&once, tables, remap);
        if once != twice {
            return Err(format!("{}: second staging pass changed the record", r.key_label()));
        }
        if old.is_some() {
            return Err(format!("{}: remapped twice", r.key_label()));
        }
        // Gaps may repeat for unmapped values, but must not introduce new text.
        for g in gaps {
            if once.get(&g.attribute) != Some(g.raw.as_str()) {
                return Err(format!("{}: gap report disagrees with record", r.key_label()));
            }
        }
    }
    Ok(())
}

fn master_codes(bundle: &SourceBundle, remap: &RemapTable) -> BTreeSet<PdbCode> {
    let table: BTreeMap<&PdbCode, &PdbCode> = remap.pairs().collect();
    bundle
        .mpstruc
        .records
        .iter()
        .filter_map(|r| r.pdb_code.as_ref())
        .map(|c| table.get(c).map_or_else(|| c.clone(), |n| (*n).clone()))
        .collect()
}

/// Every merged entry comes from the remapped MPstruc master list, and no
/// code appears twice.
pub fn check_join_completeness(bundle: &SourceBundle, run: &EtlRun, remap: &RemapTable) -> Result<(), String> {
    let master = master_codes(bundle, remap);
    let mut seen = BTreeSet::new();
    for e in &run.entries {
        if !master.contains(&e.pdb_code) {
            return Err(format!("{} is not in the MPstruc master list", e.pdb_code));
        }
        if !seen.insert(&e.pdb_code) {
            return Err(format!("{} merged twice", e.pdb_code));
        }
    }
    Ok(())
}

/// |MPstruc input| = |entries| + |MPstruc rejects|.
pub fn check_no_record_loss(bundle: &SourceBundle, run: &EtlRun) -> Result<(), String> {
    let input = bundle.mpstruc.records.len() + bundle.mpstruc.rejects.len();
    let rejected = run.rejects.iter().filter(|r| r.source == SourceTag::MPstruc).count();
    if input != run.entries.len() + rejected {
        return Err(format!(
            "{input} MPstruc records in, {} entries + {rejected} rejects out",
            run.entries.len()
        ));
    }
    Ok(())
}

/// Applying the changeset between two snapshots reproduces the second, and
/// its three parts are disjoint.
pub fn check_changeset_round_trip(current: &[ProteinEntry], fresh: &[ProteinEntry]) -> Result<(), String> {
    let cur: BTreeMap<PdbCode, ProteinEntry> = current.iter().map(|e| (e.pdb_code.clone(), e.clone())).collect();
    let want: BTreeMap<PdbCode, ProteinEntry> = fresh.iter().map(|e| (e.pdb_code.clone(), e.clone())).collect();
    let cs = incremental_update(&cur, fresh);
    let added: BTreeSet<&PdbCode> = cs.added.keys().collect();
    let modified: BTreeSet<&PdbCode> = cs.modified.keys().collect();
    let removed: BTreeSet<&PdbCode> = cs.removed_or_withdrawn.keys().collect();
    if !added.is_disjoint(&modified) || !added.is_disjoint(&removed) || !modified.is_disjoint(&removed) {
        return Err("changeset parts overlap".into());
    }
    let applied = cs.apply(&cur).map_err(|e| format!("apply failed: {e}"))?;
    if applied != want {
        let differing: Vec<String> = want
            .keys()
            .chain(applied.keys())
            .filter(|k| applied.get(*k) != want.get(*k))
            .map(|k| k.to_string())
            .collect();
        return Err(format!("apply(current, diff) differs from fresh at {differing:?}"));
    }
    Ok(())
}
