//! Staging-area transforms: cleansing, filtering, normalization, column
//! expansion and accession remapping.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::record::SourceRecord;
use crate::error::EtlError;
use crate::model::PdbCode;

fn is_zero_width(c: char) -> bool {
    matches!(c, '\u{200B}' | '\u{200C}' | '\u{200D}' | '\u{2060}' | '\u{FEFF}' | '\u{00AD}')
}

/// Trims, strips control and zero-width characters and collapses internal
/// whitespace runs to one space.
pub fn cleanse_value(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for c in raw.chars() {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if c.is_control() || is_zero_width(c) {
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        out.push(c);
    }
    out
}

/// Cleanses every attribute value. Attributes that end up empty are dropped:
/// absence is represented by a missing key, never by an empty string.
pub fn cleanse(record: &SourceRecord) -> SourceRecord {
    let mut out = record.clone();
    out.attributes = record
        .attributes
        .iter()
        .filter_map(|(k, v)| {
            let v = cleanse_value(v);
            (!v.is_empty()).then(|| (k.trim().to_string(), v))
        })
        .collect();
    out.uniprot_id = record
        .uniprot_id
        .as_deref()
        .map(cleanse_value)
        .filter(|s| !s.is_empty());
    out
}

/// Keeps the records whose PDB code belongs to the master list.
pub fn filter_records(records: &[SourceRecord], master_keys: &BTreeSet<PdbCode>) -> Vec<SourceRecord> {
    records
        .iter()
        .filter(|r| r.pdb_code.as_ref().is_some_and(|c| master_keys.contains(c)))
        .cloned()
        .collect()
}

fn fold(raw: &str) -> String {
    cleanse_value(raw).to_lowercase()
}

/// Per-attribute lookup of raw spellings to canonical values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NormalizationTable {
    entries: BTreeMap<String, HashMap<String, String>>,
}

/// A value with no mapping in a table that covers its attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationGap {
    pub attribute: String,
    pub raw: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
}

impl NormalizationTable {
    /// The tables shipped with the crate.
    pub fn builtin() -> Self {
        let mut table = NormalizationTable::default();
        table
            .add_text("expressed_in", include_str!("../../tables/normalization/expressed_in.tsv"))
            .expect("builtin expressed_in table");
        table
            .add_text(
                "experimental_method",
                include_str!("../../tables/normalization/experimental_method.tsv"),
            )
            .expect("builtin experimental_method table");
        table
    }

    /// Adds `raw<TAB>canonical` lines for one attribute. `#` starts a comment.
    pub fn add_text(&mut self, attribute: &str, text: &str) -> Result<(), EtlError> {
        let map = self.entries.entry(attribute.to_string()).or_default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let Some((raw, canonical)) = line.split_once('\t') else {
                return Err(EtlError::Table {
                    name: attribute.to_string(),
                    message: format!("line {}: expected raw<TAB>canonical", i + 1),
                });
            };
            let canonical = cleanse_value(canonical);
            if canonical.is_empty() {
                return Err(EtlError::Table {
                    name: attribute.to_string(),
                    message: format!("line {}: empty canonical value", i + 1),
                });
            }
            map.insert(fold(raw), canonical.clone());
            map.insert(fold(&canonical), canonical);
        }
        // canonical values must be fixed points
        for canonical in map.values() {
            if map.get(&fold(canonical)) != Some(canonical) {
                return Err(EtlError::Table {
                    name: attribute.to_string(),
                    message: format!("canonical value {canonical:?} is not a fixed point"),
                });
            }
        }
        Ok(())
    }

    /// Loads every `<attribute>.tsv` file in `dir` on top of the current table.
    pub fn load_dir(&mut self, dir: &Path) -> Result<(), EtlError> {
        let io = |e: std::io::Error| EtlError::Io {
            path: dir.display().to_string(),
            source: e,
        };
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "tsv" || x == "txt"))
            .collect();
        paths.sort();
        for path in paths {
            let attribute = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            let text = std::fs::read_to_string(&path).map_err(|e| EtlError::Io {
                path: path.display().to_string(),
                source: e,
            })?;
            self.add_text(&attribute, &text)?;
        }
        Ok(())
    }

    pub fn covers(&self, attribute: &str) -> bool {
        self.entries.contains_key(attribute)
    }

    pub fn attributes(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    fn lookup(&self, attribute: &str, raw: &str) -> Option<&str> {
        self.entries
            .get(attribute)
            .and_then(|m| m.get(&fold(raw)))
            .map(String::as_str)
    }
}

/// Result of normalizing one value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub value: String,
    pub gap: Option<NormalizationGap>,
}

/// Maps `raw` to its canonical form. Values of uncovered attributes pass
/// through untouched; unmapped values of covered attributes pass through and
/// produce a gap entry.
pub fn normalize_value(attribute: &str, raw: &str, table: &NormalizationTable) -> Normalized {
    if !table.covers(attribute) {
        return Normalized {
            value: raw.to_string(),
            gap: None,
        };
    }
    match table.lookup(attribute, raw) {
        Some(canonical) => Normalized {
            value: canonical.to_string(),
            gap: None,
        },
        None => Normalized {
            value: raw.to_string(),
            gap: Some(NormalizationGap {
                attribute: attribute.to_string(),
                raw: raw.to_string(),
                key: None,
            }),
        },
    }
}

/// Normalizes every covered attribute of a record, collecting gaps.
pub fn normalize_record(record: &SourceRecord, table: &NormalizationTable) -> (SourceRecord, Vec<NormalizationGap>) {
    let mut out = record.clone();
    let mut gaps = Vec::new();
    for (attribute, value) in out.attributes.iter_mut() {
        let n = normalize_value(attribute, value, table);
        *value = n.value;
        if let Some(mut gap) = n.gap {
            gap.key = Some(record.key_label());
            gaps.push(gap);
        }
    }
    (out, gaps)
}

fn parse_ph(segment: &str) -> Option<String> {
    let lower = segment.to_ascii_lowercase();
    let rest = lower.strip_prefix("ph")?;
    let rest = rest.trim_start_matches(|c: char| c.is_whitespace() || c == '=' || c == ':');
    let num: String = rest
        .chars()
        .take_while(|c| c.is_ascii_digit() || *c == '.')
        .collect();
    (!num.is_empty() && num.parse::<f64>().is_ok() && rest[num.len()..].trim().is_empty()).then_some(num)
}

fn parse_temperature(segment: &str) -> Option<String> {
    let s = segment.trim();
    let body = s.strip_suffix('K').or_else(|| s.strip_suffix('k'))?.trim_end();
    let body = body
        .strip_prefix("temperature")
        .or_else(|| body.strip_prefix("Temperature"))
        .unwrap_or(body)
        .trim_start_matches(|c: char| c.is_whitespace() || c == '=' || c == ':');
    body.parse::<f64>().is_ok().then(|| body.to_string())
}

/// Splits a semicolon-delimited composite column into four prefixed children
/// (`_method`, `_p_h`, `_temp`, `_pdbx_details`). `pH n` and `nK` segments are
/// recognized by label; the first unlabeled segment is the method and later
/// unlabeled segments are joined into the details. The parent is kept.
pub fn expand_column(record: &SourceRecord, column: &str) -> Result<SourceRecord, EtlError> {
    let Some(value) = record.get(column) else {
        return Ok(record.clone());
    };
    let mut method = None;
    let mut ph = None;
    let mut temp = None;
    let mut details: Vec<&str> = Vec::new();
    for segment in value.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        if ph.is_none() {
            if let Some(p) = parse_ph(segment) {
                ph = Some(p);
                continue;
            }
        }
        if temp.is_none() {
            if let Some(t) = parse_temperature(segment) {
                temp = Some(t);
                continue;
            }
        }
        if method.is_none() {
            method = Some(segment.to_string());
        } else {
            details.push(segment);
        }
    }
    if method.is_none() && ph.is_none() && temp.is_none() && details.is_empty() {
        return Err(EtlError::Expansion {
            column: column.to_string(),
            reason: format!("no recognizable sub-structure in {value:?}"),
        });
    }
    let mut out = record.clone();
    let mut put = |suffix: &str, v: Option<String>| {
        if let Some(v) = v {
            out.attributes.insert(format!("{column}_{suffix}"), v);
        }
    };
    put("method", method);
    put("p_h", ph);
    put("temp", temp);
    put("pdbx_details", (!details.is_empty()).then(|| details.join("; ")));
    Ok(out)
}

/// Superseded accession codes and their replacements.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemapTable {
    pairs: BTreeMap<PdbCode, PdbCode>,
}

impl RemapTable {
    /// The sixteen published remappings.
    pub fn published() -> Self {
        Self::parse(include_str!("../../tables/remap.tsv")).expect("builtin remap table")
    }

    /// Parses `OLD<TAB>NEW` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, EtlError> {
        let mut pairs = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(|c: char| c == '\t' || c.is_whitespace()).filter(|s| !s.is_empty());
            let (Some(old), Some(new), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(EtlError::Table {
                    name: "remap".into(),
                    message: format!("line {}: expected OLD<TAB>NEW", i + 1),
                });
            };
            pairs.insert(PdbCode::parse(old)?, PdbCode::parse(new)?);
        }
        Self::from_pairs(pairs)
    }

    pub fn from_pairs(pairs: BTreeMap<PdbCode, PdbCode>) -> Result<Self, EtlError> {
        if let Some(new) = pairs.values().find(|n| pairs.contains_key(*n)) {
            return Err(EtlError::Table {
                name: "remap".into(),
                message: format!("chained remapping through {new}"),
            });
        }
        Ok(RemapTable { pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&PdbCode, &PdbCode)> {
        self.pairs.iter()
    }
}

pub fn remap_pdb_code(code: &PdbCode, table: &RemapTable) -> PdbCode {
    table.pairs.get(code).cloned().unwrap_or_else(|| code.clone())
}

/// Remaps the record key; returns the old code when it changed.
pub fn remap_record(record: &SourceRecord, table: &RemapTable) -> (SourceRecord, Option<PdbCode>) {
    let mut out = record.clone();
    let mut changed = None;
    if let Some(code) = &record.pdb_code {
        let new = remap_pdb_code(code, table);
        if &new != code {
            changed = Some(code.clone());
            out.pdb_code = Some(new);
        }
    }
    (out, changed)
}
