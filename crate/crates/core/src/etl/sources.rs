//! Extraction from the four source snapshot formats.

use std::path::{Path, PathBuf};

use quick_xml::events::Event;
use quick_xml::Reader;
use serde_json::Value;

use super::record::{Extracted, Reject, SourceRecord};
use crate::error::EtlError;
use crate::model::{PdbCode, SourceTag};

fn line_of(text: &str, byte_pos: usize) -> usize {
    let end = byte_pos.min(text.len());
    text.as_bytes()[..end].iter().filter(|b| **b == b'\n').count() + 1
}

fn snake_case(name: &str) -> String {
    let mut out = String::with_capacity(name.len() + 4);
    for (i, c) in name.chars().enumerate() {
        if c.is_ascii_uppercase() {
            if i > 0 {
                out.push('_');
            }
            out.push(c.to_ascii_lowercase());
        } else if c == '-' {
            out.push('_');
        } else {
            out.push(c);
        }
    }
    out
}

fn mpstruc_attribute(element: &str) -> String {
    match element {
        "pdbCode" => "pdb_code".to_string(),
        "taxonomicDomain" => "taxonomic_domain".to_string(),
        "expressedInSpecies" => "expressed_in".to_string(),
        other => snake_case(other),
    }
}

#[derive(Default)]
struct ProteinDraft {
    depth: usize,
    line: usize,
    fields: Vec<(String, String)>,
}

/// Parses an MPstruc XML export (`groups/group/subgroups/subgroup/proteins/protein`).
///
/// Each `protein` directly under a subgroup yields one record carrying the
/// enclosing group and subgroup names. Nested elements inside a protein
/// (bibliography, member proteins) are skipped. Proteins without a usable
/// `pdbCode` are returned as rejects.
pub fn parse_mpstruc(document: &str) -> Result<Extracted, EtlError> {
    let mut reader = Reader::from_str(document);
    reader.config_mut().trim_text(true);

    let mut out = Extracted::default();
    let mut stack: Vec<String> = Vec::new();
    let mut group_name: Option<String> = None;
    let mut subgroup_name: Option<String> = None;
    let mut protein: Option<ProteinDraft> = None;
    let mut text = String::new();

    let parse_err = |pos: u64, message: String| EtlError::Parse {
        source_name: "MPstruc".to_string(),
        line: line_of(document, pos as usize),
        message,
    };

    loop {
        let event = reader
            .read_event()
            .map_err(|e| parse_err(reader.error_position(), e.to_string()))?;
        match event {
            Event::Start(e) => {
                let name = String::from_utf8_lossy(e.name().as_ref()).into_owned();
                text.clear();
                if name == "protein" && protein.is_none() && stack.last().map(String::as_str) == Some("proteins") {
                    protein = Some(ProteinDraft {
                        depth: stack.len() + 1,
                        line: line_of(document, reader.buffer_position() as usize),
                        fields: Vec::new(),
                    });
                }
                stack.push(name);
            }
            Event::Text(t) => {
                let value = t
                    .unescape()
                    .map_err(|e| parse_err(reader.buffer_position(), e.to_string()))?;
                text.push_str(&value);
            }
            Event::CData(t) => {
                text.push_str(&String::from_utf8_lossy(&t.into_inner()));
            }
            Event::End(e) => {
                let name = String::from_utf8_lossy(e.name().as_ref()).into_owned();
                let depth = stack.len();
                stack.pop();
                let parent = stack.last().map(String::as_str);
                if name == "name" && protein.is_none() {
                    match parent {
                        Some("group") => group_name = Some(text.trim().to_string()),
                        Some("subgroup") => subgroup_name = Some(text.trim().to_string()),
                        _ => {}
                    }
                }
                if let Some(draft) = protein.as_mut() {
                    if depth == draft.depth + 1 {
                        draft.fields.push((mpstruc_attribute(&name), text.trim().to_string()));
                    } else if depth == draft.depth && name == "protein" {
                        let draft = protein.take().expect("draft present");
                        finish_protein(draft, group_name.as_deref(), subgroup_name.as_deref(), &mut out);
                    }
                }
                match name.as_str() {
                    "group" => {
                        group_name = None;
                        subgroup_name = None;
                    }
                    "subgroup" => subgroup_name = None,
                    _ => {}
                }
                text.clear();
            }
            Event::Eof => {
                if !stack.is_empty() {
                    return Err(parse_err(
                        document.len() as u64,
                        format!("unexpected end of document inside <{}>", stack.join("><")),
                    ));
                }
                break;
            }
            _ => {}
        }
    }
    Ok(out)
}

fn finish_protein(
    draft: ProteinDraft,
    group: Option<&str>,
    subgroup: Option<&str>,
    out: &mut Extracted,
) {
    let mut record = SourceRecord::new(SourceTag::MPstruc, None);
    if let Some(g) = group {
        record.attributes.insert("group".into(), g.to_string());
    }
    if let Some(s) = subgroup {
        record.attributes.insert("subgroup".into(), s.to_string());
    }
    let mut raw_code = None;
    for (k, v) in draft.fields {
        if v.is_empty() {
            continue;
        }
        if k == "pdb_code" {
            raw_code = Some(v);
        } else {
            record.attributes.entry(k).or_insert(v);
        }
    }
    match raw_code.as_deref().map(PdbCode::parse) {
        Some(Ok(code)) => {
            record.pdb_code = Some(code);
            out.records.push(record);
        }
        Some(Err(e)) => out.rejects.push(Reject {
            source: SourceTag::MPstruc,
            key: raw_code,
            reason: "malformed_pdb_code".into(),
            context: Some(format!("line {}: {e}", draft.line)),
        }),
        None => out.rejects.push(Reject {
            source: SourceTag::MPstruc,
            key: record.get("name").map(str::to_string),
            reason: "missing_pdb_code".into(),
            context: Some(format!("line {}", draft.line)),
        }),
    }
}

fn value_text(v: &Value) -> Option<String> {
    match v {
        Value::Null => None,
        Value::String(s) => Some(s.clone()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        other => Some(other.to_string()),
    }
}

const PDB_KEYS: [&str; 4] = ["pdb_code", "pdb_id", "pdbCode", "pdbid"];
const UNIPROT_KEYS: [&str; 3] = ["uniprot_id", "accession", "uniprotId"];

/// Parses a PDB, OPM or UniProt JSON snapshot: an array of flat objects keyed
/// by `pdb_code` (UniProt rows may be keyed by `uniprot_id` alone). Nested
/// values are carried as their JSON text.
pub fn parse_source_json(source: SourceTag, document: &str) -> Result<Extracted, EtlError> {
    if !matches!(source, SourceTag::PDB | SourceTag::OPM | SourceTag::UniProt) {
        return Err(EtlError::Parse {
            source_name: source.to_string(),
            line: 0,
            message: "JSON snapshots are only read for PDB, OPM and UniProt".into(),
        });
    }
    let value: Value = serde_json::from_str(document).map_err(|e| EtlError::Parse {
        source_name: source.to_string(),
        line: e.line(),
        message: e.to_string(),
    })?;
    let rows = value.as_array().ok_or_else(|| EtlError::Parse {
        source_name: source.to_string(),
        line: 1,
        message: "expected a top-level array".into(),
    })?;

    let mut out = Extracted::default();
    for (i, row) in rows.iter().enumerate() {
        let Some(obj) = row.as_object() else {
            out.rejects.push(Reject {
                source,
                key: None,
                reason: "not_an_object".into(),
                context: Some(format!("row {i}")),
            });
            continue;
        };
        let mut record = SourceRecord::new(source, None);
        let mut raw_code = None;
        for (k, v) in obj {
            let Some(text) = value_text(v) else { continue };
            if PDB_KEYS.contains(&k.as_str()) {
                raw_code = Some(text);
            } else if UNIPROT_KEYS.contains(&k.as_str()) {
                record.uniprot_id = Some(text.trim().to_string()).filter(|s| !s.is_empty());
            } else {
                record.attributes.insert(k.clone(), text);
            }
        }
        if let Some(raw) = raw_code {
            match PdbCode::parse(&raw) {
                Ok(code) => record.pdb_code = Some(code),
                Err(e) => {
                    out.rejects.push(Reject {
                        source,
                        key: Some(raw),
                        reason: "malformed_pdb_code".into(),
                        context: Some(format!("row {i}: {e}")),
                    });
                    continue;
                }
            }
        }
        let keyed = record.pdb_code.is_some()
            || (source == SourceTag::UniProt && record.uniprot_id.is_some());
        if keyed {
            out.records.push(record);
        } else {
            out.rejects.push(Reject {
                source,
                key: None,
                reason: "missing_key".into(),
                context: Some(format!("row {i}")),
            });
        }
    }
    Ok(out)
}

/// Retrieval point for source snapshots.
pub trait SourceClient {
    /// Returns the raw snapshot document for `source`.
    fn fetch(&self, source: SourceTag) -> Result<String, EtlError>;
}

/// Replays snapshot files from a local directory:
/// `mpstruc.xml`, `pdb.json`, `opm.json`, `uniprot.json`.
#[derive(Debug, Clone)]
pub struct FixtureClient {
    dir: PathBuf,
}

impl FixtureClient {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FixtureClient { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn file_name(source: SourceTag) -> Option<&'static str> {
        match source {
            SourceTag::MPstruc => Some("mpstruc.xml"),
            SourceTag::PDB => Some("pdb.json"),
            SourceTag::OPM => Some("opm.json"),
            SourceTag::UniProt => Some("uniprot.json"),
            _ => None,
        }
    }
}

impl SourceClient for FixtureClient {
    fn fetch(&self, source: SourceTag) -> Result<String, EtlError> {
        let name = Self::file_name(source).ok_or_else(|| EtlError::Parse {
            source_name: source.to_string(),
            line: 0,
            message: "no snapshot file for this source".into(),
        })?;
        let path = self.dir.join(name);
        std::fs::read_to_string(&path).map_err(|e| EtlError::Io {
            path: path.display().to_string(),
            source: e,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXCERPT: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<mpstruc>
  <groups>
    <group>
      <name>TRANSMEMBRANE PROTEINS: BETA-BARREL</name>
      <subgroups>
        <subgroup>
          <name>Beta-Barrel Membrane Proteins: Pore-forming toxins</name>
          <proteins>
            <protein>
              <pdbCode>1PFO</pdbCode>
              <name>Perfringolysin O</name>
              <species>Clostridium perfringens</species>
              <taxonomicDomain>Bacteria</taxonomicDomain>
              <expressedInSpecies>E. coli</expressedInSpecies>
              <resolution>2.7</resolution>
              <bibliography><pubMedId>9182756</pubMedId></bibliography>
              <memberProteins>
                <memberProtein><pdbCode>2BK1</pdbCode></memberProtein>
              </memberProteins>
            </protein>
            <protein>
              <name>Unnamed toxin fragment</name>
              <resolution>3.1</resolution>
            </protein>
          </proteins>
        </subgroup>
      </subgroups>
    </group>
    <group>
      <name>MONOTOPIC MEMBRANE PROTEINS</name>
      <subgroups>
        <subgroup>
          <name>Signal peptidases</name>
          <proteins>
            <protein>
              <pdbCode>1b12</pdbCode>
              <name>Signal peptidase I</name>
              <species>Escherichia coli</species>
              <taxonomicDomain>Bacteria</taxonomicDomain>
              <resolution>1.95</resolution>
            </protein>
          </proteins>
        </subgroup>
      </subgroups>
    </group>
  </groups>
</mpstruc>"#;

    #[test]
    fn mpstruc_records_and_rejects() {
        let out = parse_mpstruc(EXCERPT).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.rejects.len(), 1);
        assert_eq!(out.rejects[0].reason, "missing_pdb_code");

        let pfo = &out.records[0];
        assert_eq!(pfo.pdb_code.as_ref().unwrap().as_str(), "1PFO");
        assert_eq!(pfo.get("group"), Some("TRANSMEMBRANE PROTEINS: BETA-BARREL"));
        assert_eq!(
            pfo.get("subgroup"),
            Some("Beta-Barrel Membrane Proteins: Pore-forming toxins")
        );
        assert_eq!(pfo.get("name"), Some("Perfringolysin O"));
        assert_eq!(pfo.get("species"), Some("Clostridium perfringens"));
        assert_eq!(pfo.get("taxonomic_domain"), Some("Bacteria"));
        assert_eq!(pfo.get("resolution"), Some("2.7"));
        assert_eq!(pfo.get("expressed_in"), Some("E. coli"));
        // nested member protein codes never leak into the parent record
        assert!(pfo.attributes.values().all(|v| v != "2BK1"));

        let b12 = &out.records[1];
        assert_eq!(b12.pdb_code.as_ref().unwrap().as_str(), "1B12");
        assert_eq!(b12.get("group"), Some("MONOTOPIC MEMBRANE PROTEINS"));
    }

    #[test]
    fn empty_groups_document() {
        let out = parse_mpstruc("<mpstruc><groups/></mpstruc>").unwrap();
        assert!(out.records.is_empty());
        assert!(out.rejects.is_empty());
    }

    #[test]
    fn malformed_xml_reports_line() {
        let doc = "<mpstruc>\n<groups>\n<group>\n</groups>\n</mpstruc>";
        match parse_mpstruc(doc) {
            Err(EtlError::Parse { line, .. }) => assert!(line >= 3, "line {line}"),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(
            parse_mpstruc("<mpstruc><groups>"),
            Err(EtlError::Parse { .. })
        ));
    }

    #[test]
    fn opm_json_exposes_features() {
        let doc = r#"[{"pdb_code": "1pfo", "thickness": 31.4, "thicknesserror": 1.2,
                       "tilt": 12, "subunit_segments": 0, "membrane_topology_in": "Intracellular",
                       "membrane_topology_out": "Extracellular", "group": "Monotopic membrane proteins"}]"#;
        let out = parse_source_json(SourceTag::OPM, doc).unwrap();
        assert_eq!(out.records.len(), 1);
        let r = &out.records[0];
        assert_eq!(r.pdb_code.as_ref().unwrap().as_str(), "1PFO");
        assert_eq!(r.get("thickness"), Some("31.4"));
        assert_eq!(r.get("thicknesserror"), Some("1.2"));
        assert_eq!(r.get("tilt"), Some("12"));
        assert_eq!(r.get("subunit_segments"), Some("0"));
    }

    #[test]
    fn uniprot_json_keyed_by_accession() {
        let doc = r#"[{"uniprot_id": "P0C2E9", "sequence_length": 500, "sequence_mass": 55000,
                       "nested": {"a": 1}}]"#;
        let out = parse_source_json(SourceTag::UniProt, doc).unwrap();
        let r = &out.records[0];
        assert_eq!(r.uniprot_id.as_deref(), Some("P0C2E9"));
        assert_eq!(r.get("sequence_length"), Some("500"));
        assert_eq!(r.get("sequence_mass"), Some("55000"));
        assert_eq!(r.get("nested"), Some(r#"{"a":1}"#));
    }

    #[test]
    fn empty_and_malformed_json() {
        assert!(parse_source_json(SourceTag::PDB, "[]").unwrap().records.is_empty());
        assert!(matches!(
            parse_source_json(SourceTag::PDB, "[{"),
            Err(EtlError::Parse { .. })
        ));
        let out = parse_source_json(SourceTag::PDB, r#"[{"title": "no key"}, {"pdb_code": "XY"}]"#).unwrap();
        assert_eq!(out.rejects.len(), 2);
    }

    #[test]
    fn fixture_client_reads_files() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("pdb.json"), "[]").unwrap();
        let client = FixtureClient::new(dir.path());
        assert_eq!(client.fetch(SourceTag::PDB).unwrap(), "[]");
        assert!(matches!(client.fetch(SourceTag::OPM), Err(EtlError::Io { .. })));
        assert!(client.fetch(SourceTag::Expert).is_err());
    }
}
