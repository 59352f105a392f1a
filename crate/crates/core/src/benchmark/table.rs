//! Reader for expert annotation tables: a year column, a PDB code column,
//! `Group (<source>)` columns and `TM (<source>)` columns.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::BenchmarkError;
use crate::model::{GroupLabel, PdbCode, ProteinEntry, SourceTag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TmCell {
    pub count: u32,
    /// Cell text when it carried more than the count, e.g. "0**".
    pub raw: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRow {
    pub pdb_code: PdbCode,
    pub year: Option<i32>,
    pub groups: BTreeMap<SourceTag, GroupLabel>,
    pub tm: BTreeMap<SourceTag, TmCell>,
}

impl AnnotationRow {
    /// Minimal entry carrying only this row's annotations.
    pub fn to_entry(&self) -> ProteinEntry {
        let mut e = ProteinEntry::new(self.pdb_code.clone(), self.pdb_code.as_str(), self.year.unwrap_or(0));
        self.annotate(&mut e);
        e
    }

    pub fn annotate(&self, e: &mut ProteinEntry) {
        for (src, label) in &self.groups {
            e.group_by_source.insert(*src, label.clone());
        }
        for (src, cell) in &self.tm {
            e.set_tm(*src, Some(cell.count), cell.raw.clone());
        }
    }
}

fn fold(header: &str) -> String {
    header
        .to_lowercase()
        .chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect()
}

enum Column {
    Year,
    Code,
    Group(SourceTag),
    Tm(SourceTag),
    Other,
}

fn classify(header: &str) -> Result<Column, BenchmarkError> {
    let f = fold(header);
    let source = |rest: &str| {
        rest.parse::<SourceTag>()
            .map_err(|_| BenchmarkError::Table(format!("unknown source in column {header:?}")))
    };
    Ok(match f.as_str() {
        "year" => Column::Year,
        "pdbcode" | "pdb" | "pdbid" | "code" => Column::Code,
        _ => {
            if let Some(rest) = f.strip_prefix("group") {
                Column::Group(source(rest)?)
            } else if let Some(rest) = f.strip_prefix("tm") {
                Column::Tm(source(rest)?)
            } else {
                Column::Other
            }
        }
    })
}

/// Leading integer of a TM cell; "0**" → 0, "1 *" → 1.
fn tm_cell(text: &str) -> Option<TmCell> {
    let t = text.trim();
    let digits: String = t.chars().take_while(|c| c.is_ascii_digit()).collect();
    let count = digits.parse().ok()?;
    Some(TmCell {
        count,
        raw: (t != digits).then(|| t.to_string()),
    })
}

pub fn parse_annotation_table(text: &str) -> Result<Vec<AnnotationRow>, BenchmarkError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| BenchmarkError::Table(e.to_string()))?
        .clone();
    let columns: Vec<Column> = headers.iter().map(classify).collect::<Result<_, _>>()?;
    if !columns.iter().any(|c| matches!(c, Column::Code)) {
        return Err(BenchmarkError::Table("no PDB code column".into()));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| BenchmarkError::Table(format!("line {line}: {e}")))?;
        let mut code = None;
        let mut year = None;
        let mut groups = BTreeMap::new();
        let mut tm = BTreeMap::new();
        for (col, cell) in columns.iter().zip(record.iter()) {
            let cell = cell.trim();
            if cell.is_empty() {
                continue;
            }
            match col {
                Column::Year => {
                    year = Some(cell.parse().map_err(|_| BenchmarkError::Table(format!("line {line}: bad year {cell:?}")))?)
                }
                Column::Code => {
                    code = Some(PdbCode::parse(cell).map_err(|e| BenchmarkError::Table(format!("line {line}: {e}")))?)
                }
                Column::Group(src) => {
                    let label = GroupLabel::parse(cell).map_err(|e| BenchmarkError::Table(format!("line {line}: {e}")))?;
                    groups.insert(*src, label);
                }
                Column::Tm(src) => {
                    let c = tm_cell(cell)
                        .ok_or_else(|| BenchmarkError::Table(format!("line {line}: bad TM count {cell:?}")))?;
                    tm.insert(*src, c);
                }
                Column::Other => {}
            }
        }
        let pdb_code = code.ok_or_else(|| BenchmarkError::Table(format!("line {line}: missing PDB code")))?;
        rows.push(AnnotationRow { pdb_code, year, groups, tm });
    }
    Ok(rows)
}

/// Adds each row's annotations to the matching entry. Returns the codes of
/// rows with no entry.
pub fn attach_annotations(entries: &mut BTreeMap<PdbCode, ProteinEntry>, rows: &[AnnotationRow]) -> Vec<PdbCode> {
    let mut unmatched = Vec::new();
    for row in rows {
        match entries.get_mut(&row.pdb_code) {
            Some(e) => row.annotate(e),
            None => unmatched.push(row.pdb_code.clone()),
        }
    }
    unmatched
}
