//! End-to-end staging: extract → cleanse → normalize → remap → filter →
//! expand → merge, with JSON-lines logs of everything set aside.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::merge::{merge_sources, Conflict, MergeConfig, QcFlag};
use super::record::{Extracted, Reject, SourceRecord};
use super::sources::{parse_mpstruc, parse_source_json, SourceClient};
use super::staging::{cleanse, expand_column, normalize_record, remap_record, NormalizationGap, NormalizationTable, RemapTable};
use crate::error::EtlError;
use crate::model::{PdbCode, ProteinEntry, SourceTag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtlConfig {
    pub merge: MergeConfig,
    /// Composite columns split into prefixed children.
    pub expand_columns: Vec<String>,
}

impl Default for EtlConfig {
    fn default() -> Self {
        EtlConfig {
            merge: MergeConfig::default(),
            expand_columns: vec!["exptl_crystal_grow".to_string()],
        }
    }
}

/// Raw extraction results for the four sources.
#[derive(Debug, Clone, Default)]
pub struct SourceBundle {
    pub mpstruc: Extracted,
    pub pdb: Extracted,
    pub opm: Extracted,
    pub uniprot: Extracted,
}

pub fn extract(client: &dyn SourceClient) -> Result<SourceBundle, EtlError> {
    Ok(SourceBundle {
        mpstruc: parse_mpstruc(&client.fetch(SourceTag::MPstruc)?)?,
        pdb: parse_source_json(SourceTag::PDB, &client.fetch(SourceTag::PDB)?)?,
        opm: parse_source_json(SourceTag::OPM, &client.fetch(SourceTag::OPM)?)?,
        uniprot: parse_source_json(SourceTag::UniProt, &client.fetch(SourceTag::UniProt)?)?,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Remapped {
    pub source: SourceTag,
    pub old: PdbCode,
    pub new: PdbCode,
}

#[derive(Debug, Clone, Default)]
pub struct EtlRun {
    pub entries: Vec<ProteinEntry>,
    pub rejects: Vec<Reject>,
    pub conflicts: Vec<Conflict>,
    pub gaps: Vec<NormalizationGap>,
    pub qc_flags: Vec<QcFlag>,
    pub remapped: Vec<Remapped>,
    pub warnings: Vec<String>,
}

/// cleanse, then normalize, then remap one record.
pub fn stage_record(
    record: &SourceRecord,
    tables: &NormalizationTable,
    remap: &RemapTable,
) -> (SourceRecord, Vec<NormalizationGap>, Option<PdbCode>) {
    let cleaned = cleanse(record);
    let (normalized, gaps) = normalize_record(&cleaned, tables);
    let (remapped, old) = remap_record(&normalized, remap);
    (remapped, gaps, old)
}

struct Staged {
    records: Vec<SourceRecord>,
    gaps: Vec<NormalizationGap>,
    remapped: Vec<Remapped>,
}

fn stage_all(records: &[SourceRecord], tables: &NormalizationTable, remap: &RemapTable) -> Staged {
    let results: Vec<_> = records
        .par_iter()
        .map(|r| stage_record(r, tables, remap))
        .collect();
    let mut staged = Staged {
        records: Vec::with_capacity(results.len()),
        gaps: Vec::new(),
        remapped: Vec::new(),
    };
    for (record, mut gaps, old) in results {
        if let (Some(old), Some(new)) = (old, record.pdb_code.clone()) {
            staged.remapped.push(Remapped {
                source: record.source,
                old,
                new,
            });
        }
        staged.gaps.append(&mut gaps);
        staged.records.push(record);
    }
    staged
}

pub fn run_pipeline(
    bundle: &SourceBundle,
    tables: &NormalizationTable,
    remap: &RemapTable,
    config: &EtlConfig,
) -> EtlRun {
    let mut run = EtlRun::default();
    for extracted in [&bundle.mpstruc, &bundle.pdb, &bundle.opm, &bundle.uniprot] {
        run.rejects.extend(extracted.rejects.iter().cloned());
    }

    let mut streams = Vec::new();
    for extracted in [&bundle.mpstruc, &bundle.pdb, &bundle.opm, &bundle.uniprot] {
        let mut staged = stage_all(&extracted.records, tables, remap);
        run.gaps.append(&mut staged.gaps);
        run.remapped.append(&mut staged.remapped);
        streams.push(staged.records);
    }
    let uniprot = streams.pop().expect("four streams");
    let opm = streams.pop().expect("four streams");
    let pdb = streams.pop().expect("four streams");
    let mpstruc = streams.pop().expect("four streams");

    let master: BTreeSet<PdbCode> = mpstruc.iter().filter_map(|r| r.pdb_code.clone()).collect();
    let pdb = super::staging::filter_records(&pdb, &master);
    let opm = super::staging::filter_records(&opm, &master);
    let linked_accessions: BTreeSet<&str> = pdb
        .iter()
        .chain(mpstruc.iter())
        .filter_map(|r| r.uniprot_id.as_deref())
        .collect();
    let uniprot: Vec<SourceRecord> = uniprot
        .iter()
        .filter(|r| {
            r.pdb_code.as_ref().is_some_and(|c| master.contains(c))
                || r.uniprot_id.as_deref().is_some_and(|a| linked_accessions.contains(a))
        })
        .cloned()
        .collect();

    let expand = |records: Vec<SourceRecord>, warnings: &mut Vec<String>| -> Vec<SourceRecord> {
        records
            .into_iter()
            .map(|mut r| {
                for column in &config.expand_columns {
                    match expand_column(&r, column) {
                        Ok(e) => r = e,
                        Err(e) => warnings.push(format!("{}: {e}", r.key_label())),
                    }
                }
                r
            })
            .collect()
    };
    let pdb = expand(pdb, &mut run.warnings);

    let merged = merge_sources(&mpstruc, &pdb, &opm, &uniprot, &config.merge);
    run.entries = merged.entries;
    run.rejects.extend(merged.rejects);
    run.conflicts = merged.conflicts;
    run.qc_flags = merged.qc_flags;
    run
}

#[derive(Serialize)]
struct LogLine<'a, T: Serialize> {
    timestamp: &'a str,
    #[serde(flatten)]
    item: &'a T,
}

/// Writes `items` as JSON lines, each stamped with the current UTC time.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), EtlError> {
    let io = |e: std::io::Error| EtlError::Io {
        path: path.display().to_string(),
        source: e,
    };
    let timestamp = chrono::Utc::now().to_rfc3339();
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    for item in items {
        let line = serde_json::to_string(&LogLine {
            timestamp: &timestamp,
            item,
        })
        .expect("log items serialize");
        writeln!(out, "{line}").map_err(io)?;
    }
    out.flush().map_err(io)
}

impl EtlRun {
    /// Writes `rejects.jsonl`, `conflicts.jsonl`, `normalization_gaps.jsonl`
    /// and `qc_flags.jsonl` into `dir`.
    pub fn write_logs(&self, dir: &Path) -> Result<(), EtlError> {
        std::fs::create_dir_all(dir).map_err(|e| EtlError::Io {
            path: dir.display().to_string(),
            source: e,
        })?;
        write_jsonl(&dir.join("rejects.jsonl"), &self.rejects)?;
        write_jsonl(&dir.join("conflicts.jsonl"), &self.conflicts)?;
        write_jsonl(&dir.join("normalization_gaps.jsonl"), &self.gaps)?;
        write_jsonl(&dir.join("qc_flags.jsonl"), &self.qc_flags)?;
        Ok(())
    }
}

/// Optional expert/predictor annotation table read alongside the snapshots.
pub const ANNOTATION_FILE: &str = "annotations.csv";

/// Runs the pipeline over a snapshot directory. When the directory also
/// holds an annotation table, its rows are attached to the merged entries;
/// rows with no entry become warnings.
pub fn run_directory(
    dir: &Path,
    tables: &NormalizationTable,
    remap: &RemapTable,
    config: &EtlConfig,
) -> Result<EtlRun, EtlError> {
    let bundle = extract(&super::sources::FixtureClient::new(dir))?;
    let mut run = run_pipeline(&bundle, tables, remap, config);
    let path = dir.join(ANNOTATION_FILE);
    if path.exists() {
        let text = std::fs::read_to_string(&path).map_err(|e| EtlError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let rows = crate::benchmark::parse_annotation_table(&text).map_err(|e| EtlError::Parse {
            source_name: ANNOTATION_FILE.into(),
            line: 0,
            message: e.to_string(),
        })?;
        let mut map: std::collections::BTreeMap<PdbCode, ProteinEntry> =
            run.entries.drain(..).map(|e| (e.pdb_code.clone(), e)).collect();
        for code in crate::benchmark::attach_annotations(&mut map, &rows) {
            run.warnings.push(format!("{ANNOTATION_FILE}: no entry for {code}"));
        }
        run.entries = map.into_values().collect();
    }
    Ok(run)
}
