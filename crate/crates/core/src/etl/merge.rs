//! Merging staged source records into [`ProteinEntry`] values.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::record::{Reject, SourceRecord};
use crate::model::{
    canonical_taxon, GroupLabel, OpmFeatures, PdbCode, ProteinEntry, Scalar, SourceTag,
    FIRST_STRUCTURE_YEAR,
};

/// Two sources disagreeing on one scalar; the higher-precedence value wins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conflict {
    pub pdb_code: PdbCode,
    pub field: String,
    pub kept_source: SourceTag,
    pub kept_value: String,
    pub discarded_source: SourceTag,
    pub discarded_value: String,
}

/// A value that was kept but needs curator attention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcFlag {
    pub pdb_code: PdbCode,
    pub field: String,
    pub value: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeConfig {
    /// Lowercased PDB status → reject reason.
    pub excluded_statuses: BTreeMap<String, String>,
}

impl Default for MergeConfig {
    fn default() -> Self {
        let mut excluded_statuses = BTreeMap::new();
        excluded_statuses.insert("under review or embargoed".to_string(), "unreleased".to_string());
        excluded_statuses.insert("wdrn".to_string(), "withdrawn".to_string());
        MergeConfig { excluded_statuses }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MergeOutput {
    pub entries: Vec<ProteinEntry>,
    pub rejects: Vec<Reject>,
    pub conflicts: Vec<Conflict>,
    pub qc_flags: Vec<QcFlag>,
}

/// Precedence order for scalar conflicts.
pub const PRECEDENCE: [SourceTag; 4] = [SourceTag::MPstruc, SourceTag::PDB, SourceTag::OPM, SourceTag::UniProt];

const TYPED_FIELDS: [&str; 12] = [
    "name",
    "subgroup",
    "species",
    "taxonomic_domain",
    "expressed_in",
    "resolution",
    "experimental_method",
    "year",
    "country",
    "molecular_weight",
    "atom_count",
    "uniprot_id",
];

fn opm_field(attribute: &str) -> Option<&'static str> {
    Some(match attribute {
        "thickness" => "thickness",
        "thicknesserror" | "thickness_error" => "thickness_error",
        "tilt" => "tilt",
        "tilterror" | "tilt_error" => "tilt_error",
        "subunit_segments" | "subunitsegments" => "subunit_segments",
        "gibbs" => "gibbs",
        "membrane_topology_in" | "topology_in" => "topology_in",
        "membrane_topology_out" | "topology_out" => "topology_out",
        _ => return None,
    })
}

const CONTROL_ATTRIBUTES: [&str; 4] = ["status", "group", "release_date", "deposition_date"];

fn values_agree(a: &str, b: &str) -> bool {
    match (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a.trim().eq_ignore_ascii_case(b.trim()),
    }
}

struct Candidates<'a> {
    code: &'a PdbCode,
    sources: Vec<&'a SourceRecord>,
    conflicts: Vec<Conflict>,
}

impl<'a> Candidates<'a> {
    /// Highest-precedence value for `attribute`, logging disagreements.
    fn resolve(&mut self, attribute: &str) -> Option<String> {
        let mut present = self
            .sources
            .iter()
            .filter_map(|r| r.get(attribute).map(|v| (r.source, v)));
        let (kept_source, kept) = present.next()?;
        for (source, value) in present {
            if !values_agree(kept, value) {
                self.conflicts.push(Conflict {
                    pdb_code: self.code.clone(),
                    field: attribute.to_string(),
                    kept_source,
                    kept_value: kept.to_string(),
                    discarded_source: source,
                    discarded_value: value.to_string(),
                });
            }
        }
        Some(kept.to_string())
    }
}

fn year_of(raw: &str) -> Option<i32> {
    let digits: String = raw.trim().chars().take(4).collect();
    (digits.len() == 4).then(|| digits.parse().ok()).flatten()
}

/// Merges staged records into entries keyed by the MPstruc master list.
///
/// One entry is produced per MPstruc record that has a released PDB
/// counterpart; every other MPstruc record lands in `rejects`, so the MPstruc
/// input count always equals `entries + rejects` from that stream. OPM and
/// UniProt rows attach when their keys match.
pub fn merge_sources(
    mpstruc: &[SourceRecord],
    pdb: &[SourceRecord],
    opm: &[SourceRecord],
    uniprot: &[SourceRecord],
    config: &MergeConfig,
) -> MergeOutput {
    let by_code = |records: &'_ [SourceRecord]| -> HashMap<PdbCode, usize> {
        let mut m = HashMap::new();
        for (i, r) in records.iter().enumerate() {
            if let Some(c) = &r.pdb_code {
                m.entry(c.clone()).or_insert(i);
            }
        }
        m
    };
    let pdb_idx = by_code(pdb);
    let opm_idx = by_code(opm);
    let uniprot_by_code = by_code(uniprot);
    let mut uniprot_by_acc: HashMap<&str, usize> = HashMap::new();
    for (i, r) in uniprot.iter().enumerate() {
        if let Some(acc) = &r.uniprot_id {
            uniprot_by_acc.entry(acc.as_str()).or_insert(i);
        }
    }

    let mut out = MergeOutput::default();
    let mut seen = std::collections::HashSet::new();
    let current_year = {
        use chrono::Datelike;
        chrono::Utc::now().year()
    };

    for m in mpstruc {
        let reject = |reason: &str, context: Option<String>| Reject {
            source: SourceTag::MPstruc,
            key: m.pdb_code.as_ref().map(|c| c.to_string()),
            reason: reason.to_string(),
            context,
        };
        let Some(code) = m.pdb_code.clone() else {
            out.rejects.push(reject("missing_pdb_code", None));
            continue;
        };
        if !seen.insert(code.clone()) {
            out.rejects.push(reject("duplicate_pdb_code", None));
            continue;
        }
        let Some(p) = pdb_idx.get(&code).map(|&i| &pdb[i]) else {
            out.rejects.push(reject("missing_in_pdb", None));
            continue;
        };
        if let Some(status) = p.get("status") {
            if let Some(reason) = config.excluded_statuses.get(&status.trim().to_lowercase()) {
                out.rejects.push(reject(reason, Some(format!("PDB status {status:?}"))));
                continue;
            }
        }
        let o = opm_idx.get(&code).map(|&i| &opm[i]);
        let uniprot_acc = m.uniprot_id.as_deref().or(p.uniprot_id.as_deref());
        let u = uniprot_acc
            .and_then(|acc| uniprot_by_acc.get(acc))
            .or_else(|| uniprot_by_code.get(&code))
            .map(|&i| &uniprot[i]);

        let mut sources = vec![m, p];
        sources.extend(o);
        sources.extend(u);
        let mut cand = Candidates {
            code: &code,
            sources,
            conflicts: Vec::new(),
        };

        // keys carried outside the attribute maps take part in precedence too
        let uniprot_id = [m, p]
            .iter()
            .filter_map(|r| r.uniprot_id.clone())
            .chain(u.and_then(|r| r.uniprot_id.clone()))
            .next();

        let Some(name) = cand.resolve("name").or_else(|| p.get("title").map(str::to_string)) else {
            out.rejects.push(reject("missing_name", None));
            continue;
        };
        let year = cand
            .resolve("year")
            .and_then(|y| y.trim().parse::<i32>().ok())
            .or_else(|| p.get("release_date").and_then(year_of))
            .or_else(|| p.get("deposition_date").and_then(year_of));
        let Some(year) = year else {
            out.rejects.push(reject("missing_year", None));
            continue;
        };
        if year < FIRST_STRUCTURE_YEAR || year > current_year {
            out.rejects.push(reject("invalid_year", Some(year.to_string())));
            continue;
        }

        let mut entry = ProteinEntry::new(code.clone(), name, year);
        let flag = |field: &str, value: &str, reason: &str, flags: &mut Vec<QcFlag>| {
            flags.push(QcFlag {
                pdb_code: code.clone(),
                field: field.to_string(),
                value: value.to_string(),
                reason: reason.to_string(),
            })
        };
        let mut flags = Vec::new();

        entry.subgroup = cand.resolve("subgroup");
        entry.species = cand.resolve("species");
        entry.taxonomic_domain = canonical_taxon(&cand.resolve("taxonomic_domain").unwrap_or_default());
        entry.expressed_in = cand.resolve("expressed_in");
        entry.experimental_method = cand.resolve("experimental_method");
        entry.country = cand.resolve("country");
        entry.uniprot_id = uniprot_id;
        if let Some(v) = cand.resolve("resolution") {
            match v.trim().parse::<f64>() {
                Ok(r) if r > 0.0 && r.is_finite() => entry.resolution = Some(r),
                _ => flag("resolution", &v, "unparseable", &mut flags),
            }
        }
        if let Some(v) = cand.resolve("molecular_weight") {
            match v.trim().parse::<f64>() {
                Ok(w) if w >= 0.0 => entry.molecular_weight = Some(w),
                _ => flag("molecular_weight", &v, "unparseable", &mut flags),
            }
        }
        if let Some(v) = cand.resolve("atom_count") {
            match v.trim().parse::<u64>() {
                Ok(a) => entry.atom_count = Some(a),
                _ => flag("atom_count", &v, "unparseable", &mut flags),
            }
        }

        for (source, record) in [(SourceTag::MPstruc, Some(m)), (SourceTag::OPM, o)] {
            if let Some(raw) = record.and_then(|r| r.get("group")) {
                match GroupLabel::parse(raw) {
                    Ok(label) => {
                        entry.group_by_source.insert(source, label);
                    }
                    Err(_) => flag(&format!("group_{}", source.slug()), raw, "unknown_group", &mut flags),
                }
            }
        }

        if let Some(o) = o {
            let mut f = OpmFeatures::default();
            for (attr, value) in &o.attributes {
                let Some(field) = opm_field(attr) else { continue };
                let num = value.trim().parse::<f64>().ok();
                match field {
                    "thickness" => f.thickness = num,
                    "thickness_error" => f.thickness_error = num,
                    "tilt" => f.tilt = num,
                    "tilt_error" => f.tilt_error = num,
                    "gibbs" => f.gibbs = num,
                    "subunit_segments" => {
                        f.subunit_segments = num.filter(|n| *n >= 0.0 && n.fract() == 0.0).map(|n| n as u32)
                    }
                    "topology_in" => f.topology_in = Some(value.clone()),
                    "topology_out" => f.topology_out = Some(value.clone()),
                    _ => {}
                }
                if num.is_none() && !matches!(field, "topology_in" | "topology_out") {
                    flag(field, value, "unparseable", &mut flags);
                }
            }
            for (field, value) in f.range_violations() {
                flag(field, &value.to_string(), "out_of_range", &mut flags);
            }
            entry.opm = Some(f);
        }

        // remaining columns, precedence-resolved
        let mut extra_keys: Vec<&str> = cand
            .sources
            .iter()
            .flat_map(|r| {
                r.attributes.keys().map(String::as_str).filter(move |k| {
                    !TYPED_FIELDS.contains(k)
                        && !CONTROL_ATTRIBUTES.contains(k)
                        && !(r.source == SourceTag::OPM && opm_field(k).is_some())
                })
            })
            .collect();
        extra_keys.sort_unstable();
        extra_keys.dedup();
        for key in extra_keys {
            if let Some(v) = cand.resolve(key) {
                entry.extra.insert(key.to_string(), Scalar::infer(&v));
            }
        }

        out.conflicts.append(&mut cand.conflicts);
        out.qc_flags.append(&mut flags);
        out.entries.push(entry);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MembraneGroup, TaxonomicDomain};

    fn code(s: &str) -> PdbCode {
        PdbCode::parse(s).unwrap()
    }

    fn mp(c: &str) -> SourceRecord {
        SourceRecord::new(SourceTag::MPstruc, Some(code(c)))
            .with("name", &format!("protein {c}"))
            .with("group", "MONOTOPIC MEMBRANE PROTEINS")
            .with("taxonomic_domain", "bacteria")
    }

    fn pdb(c: &str) -> SourceRecord {
        SourceRecord::new(SourceTag::PDB, Some(code(c)))
            .with("year", "2004")
            .with("status", "REL")
    }

    #[test]
    fn unreleased_entry_is_rejected() {
        let out = merge_sources(
            &[mp("7ROW"), mp("1PFO")],
            &[pdb("7ROW").with("status", "under review or embargoed"), pdb("1PFO")],
            &[],
            &[],
            &MergeConfig::default(),
        );
        assert_eq!(out.entries.len(), 1);
        assert_eq!(out.rejects.len(), 1);
        assert_eq!(out.rejects[0].key.as_deref(), Some("7ROW"));
        assert_eq!(out.rejects[0].reason, "unreleased");
    }

    #[test]
    fn withdrawn_and_missing_are_rejected() {
        let out = merge_sources(
            &[mp("1AAA"), mp("1BBB"), mp("1CCC")],
            &[pdb("1AAA").with("status", "WDRN"), pdb("1CCC")],
            &[],
            &[],
            &MergeConfig::default(),
        );
        let reasons: Vec<_> = out.rejects.iter().map(|r| r.reason.as_str()).collect();
        assert_eq!(reasons, vec!["withdrawn", "missing_in_pdb"]);
        assert_eq!(out.entries.len() + out.rejects.len(), 3);
    }

    #[test]
    fn all_four_sources_merge_into_one_entry() {
        let m = mp("1PFO").with("resolution", "2.7").with("uniprot_id_hint", "x");
        let mut p = pdb("1PFO").with("experimental_method", "X-ray").with("molecular_weight", "53.4");
        p.uniprot_id = Some("P0C2E9".into());
        let o = SourceRecord::new(SourceTag::OPM, Some(code("1PFO")))
            .with("thickness", "31.4")
            .with("tilt", "12")
            .with("subunit_segments", "0")
            .with("membrane_topology_in", "Intracellular")
            .with("membrane_topology_out", "Extracellular")
            .with("group", "Monotopic membrane proteins");
        let mut u = SourceRecord::new(SourceTag::UniProt, None)
            .with("sequence_length", "500")
            .with("sequence_mass", "55000");
        u.uniprot_id = Some("P0C2E9".into());
        let out = merge_sources(&[m], &[p], &[o], &[u], &MergeConfig::default());
        assert_eq!(out.entries.len(), 1);
        let e = &out.entries[0];
        assert_eq!(e.resolution, Some(2.7));
        assert_eq!(e.year, 2004);
        assert_eq!(e.taxonomic_domain, TaxonomicDomain::Bacteria);
        assert_eq!(e.uniprot_id.as_deref(), Some("P0C2E9"));
        assert_eq!(e.group(SourceTag::MPstruc), Some(MembraneGroup::Monotopic));
        assert_eq!(e.group(SourceTag::OPM), Some(MembraneGroup::Monotopic));
        let opm = e.opm.as_ref().unwrap();
        assert_eq!(opm.subunit_segments, Some(0));
        assert_eq!(opm.topology_in.as_deref(), Some("Intracellular"));
        assert_eq!(e.extra.get("sequence_length"), Some(&Scalar::Int(500)));
        assert_eq!(e.extra.get("sequence_mass"), Some(&Scalar::Int(55000)));
        assert!(out.conflicts.is_empty());
    }

    #[test]
    fn numeric_equality_is_not_a_conflict() {
        let out = merge_sources(
            &[mp("1PFO").with("resolution", "3.5")],
            &[pdb("1PFO").with("resolution", "3.50")],
            &[],
            &[],
            &MergeConfig::default(),
        );
        assert!(out.conflicts.is_empty());
        assert_eq!(out.entries[0].resolution, Some(3.5));
    }

    #[test]
    fn precedence_and_conflict_log() {
        let out = merge_sources(
            &[mp("1PFO").with("resolution", "2.7")],
            &[pdb("1PFO").with("resolution", "2.9")],
            &[],
            &[],
            &MergeConfig::default(),
        );
        assert_eq!(out.entries[0].resolution, Some(2.7));
        assert_eq!(out.conflicts.len(), 1);
        let c = &out.conflicts[0];
        assert_eq!((c.kept_source, c.discarded_source), (SourceTag::MPstruc, SourceTag::PDB));
        assert_eq!(c.field, "resolution");
    }

    #[test]
    fn out_of_range_opm_is_flagged_not_dropped() {
        let o = SourceRecord::new(SourceTag::OPM, Some(code("1PFO")))
            .with("thickness", "140")
            .with("tilt", "12");
        let out = merge_sources(&[mp("1PFO")], &[pdb("1PFO")], &[o], &[], &MergeConfig::default());
        assert_eq!(out.entries.len(), 1);
        assert_eq!(out.entries[0].opm.as_ref().unwrap().thickness, Some(140.0));
        assert!(out.qc_flags.iter().any(|f| f.field == "thickness" && f.reason == "out_of_range"));
    }

    #[test]
    fn year_falls_back_to_release_date() {
        let p = SourceRecord::new(SourceTag::PDB, Some(code("1PFO"))).with("release_date", "1997-05-07");
        let out = merge_sources(&[mp("1PFO")], &[p], &[], &[], &MergeConfig::default());
        assert_eq!(out.entries[0].year, 1997);
        let p = SourceRecord::new(SourceTag::PDB, Some(code("1PFO")));
        let out = merge_sources(&[mp("1PFO")], &[p], &[], &[], &MergeConfig::default());
        assert_eq!(out.rejects[0].reason, "missing_year");
    }
}
