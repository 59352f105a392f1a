//! Field-level changesets between a stored snapshot and a fresh one.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::model::{PdbCode, ProteinEntry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDiff {
    /// Top-level field name, or `extra.<key>` for merged columns.
    pub field: String,
    pub old: Value,
    pub new: Value,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Changeset {
    pub added: BTreeMap<PdbCode, ProteinEntry>,
    pub modified: BTreeMap<PdbCode, Vec<FieldDiff>>,
    /// Code → reason.
    pub removed_or_withdrawn: BTreeMap<PdbCode, String>,
}

impl Changeset {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.modified.is_empty() && self.removed_or_withdrawn.is_empty()
    }

    /// Applies the changeset, returning the updated snapshot.
    pub fn apply(
        &self,
        current: &BTreeMap<PdbCode, ProteinEntry>,
    ) -> Result<BTreeMap<PdbCode, ProteinEntry>, serde_json::Error> {
        let mut next = current.clone();
        for code in self.removed_or_withdrawn.keys() {
            next.remove(code);
        }
        for (code, diffs) in &self.modified {
            let Some(entry) = next.get(code) else { continue };
            let mut obj = entry_object(entry);
            for d in diffs {
                match d.field.strip_prefix("extra.") {
                    Some(key) => {
                        let extra = obj
                            .entry("extra")
                            .or_insert_with(|| Value::Object(Map::new()))
                            .as_object_mut()
                            .expect("extra is an object");
                        if d.new.is_null() {
                            extra.remove(key);
                        } else {
                            extra.insert(key.to_string(), d.new.clone());
                        }
                    }
                    None => {
                        obj.insert(d.field.clone(), d.new.clone());
                    }
                }
            }
            next.insert(code.clone(), serde_json::from_value(Value::Object(obj))?);
        }
        for (code, entry) in &self.added {
            next.insert(code.clone(), entry.clone());
        }
        Ok(next)
    }
}

fn entry_object(entry: &ProteinEntry) -> Map<String, Value> {
    match serde_json::to_value(entry).expect("entries always serialize") {
        Value::Object(m) => m,
        _ => unreachable!("entries serialize to objects"),
    }
}

/// Field-level diff of two entries with the same code.
pub fn diff_entries(old: &ProteinEntry, new: &ProteinEntry) -> Vec<FieldDiff> {
    let a = entry_object(old);
    let b = entry_object(new);
    let mut diffs = Vec::new();
    let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    for key in keys {
        let va = a.get(key).cloned().unwrap_or(Value::Null);
        let vb = b.get(key).cloned().unwrap_or(Value::Null);
        if key == "extra" {
            let ea = va.as_object().cloned().unwrap_or_default();
            let eb = vb.as_object().cloned().unwrap_or_default();
            let mut ekeys: Vec<&String> = ea.keys().chain(eb.keys()).collect();
            ekeys.sort();
            ekeys.dedup();
            for k in ekeys {
                let x = ea.get(k).cloned().unwrap_or(Value::Null);
                let y = eb.get(k).cloned().unwrap_or(Value::Null);
                if x != y {
                    diffs.push(FieldDiff {
                        field: format!("extra.{k}"),
                        old: x,
                        new: y,
                    });
                }
            }
        } else if va != vb {
            diffs.push(FieldDiff {
                field: key.clone(),
                old: va,
                new: vb,
            });
        }
    }
    diffs
}

/// Computes the changeset that turns `current` into `fresh`.
pub fn incremental_update(current: &BTreeMap<PdbCode, ProteinEntry>, fresh: &[ProteinEntry]) -> Changeset {
    let mut cs = Changeset::default();
    let mut fresh_codes = std::collections::BTreeSet::new();
    for entry in fresh {
        fresh_codes.insert(entry.pdb_code.clone());
        match current.get(&entry.pdb_code) {
            None => {
                cs.added.insert(entry.pdb_code.clone(), entry.clone());
            }
            Some(old) => {
                let diffs = diff_entries(old, entry);
                if !diffs.is_empty() {
                    cs.modified.insert(entry.pdb_code.clone(), diffs);
                }
            }
        }
    }
    for code in current.keys() {
        if !fresh_codes.contains(code) {
            cs.removed_or_withdrawn
                .insert(code.clone(), "absent from fresh snapshot".to_string());
        }
    }
    cs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Scalar;

    fn entry(c: &str) -> ProteinEntry {
        ProteinEntry::new(PdbCode::parse(c).unwrap(), format!("p {c}"), 2010)
    }

    fn snapshot(es: &[ProteinEntry]) -> BTreeMap<PdbCode, ProteinEntry> {
        es.iter().map(|e| (e.pdb_code.clone(), e.clone())).collect()
    }

    #[test]
    fn identical_is_empty() {
        let es = vec![entry("1AAA"), entry("1BBB")];
        assert!(incremental_update(&snapshot(&es), &es).is_empty());
    }

    #[test]
    fn new_structure_is_added() {
        let es = vec![entry("1AAA")];
        let fresh = vec![entry("1AAA"), entry("1BBB")];
        let cs = incremental_update(&snapshot(&es), &fresh);
        assert_eq!(cs.added.keys().map(|c| c.as_str()).collect::<Vec<_>>(), vec!["1BBB"]);
        assert!(cs.modified.is_empty() && cs.removed_or_withdrawn.is_empty());
    }

    #[test]
    fn resolution_correction_is_a_field_diff() {
        let mut old = entry("1AAA");
        old.resolution = Some(3.1);
        let mut new = old.clone();
        new.resolution = Some(2.9);
        let current = snapshot(&[old]);
        let cs = incremental_update(&current, &[new.clone()]);
        let diffs = &cs.modified[&new.pdb_code];
        assert_eq!(diffs.len(), 1);
        assert_eq!(diffs[0].field, "resolution");
        assert_eq!(diffs[0].old, serde_json::json!(3.1));
        assert_eq!(diffs[0].new, serde_json::json!(2.9));
        assert_eq!(cs.apply(&current).unwrap(), snapshot(&[new]));
    }

    #[test]
    fn extra_columns_diff_per_key() {
        let mut old = entry("1AAA");
        old.extra.insert("space_group".into(), Scalar::Text("P 1".into()));
        old.extra.insert("gone".into(), Scalar::Int(3));
        let mut new = old.clone();
        new.extra.insert("space_group".into(), Scalar::Text("C 2".into()));
        new.extra.remove("gone");
        new.extra.insert("added".into(), Scalar::Float(1.5));
        let current = snapshot(&[old]);
        let cs = incremental_update(&current, &[new.clone()]);
        let fields: Vec<_> = cs.modified[&new.pdb_code].iter().map(|d| d.field.as_str()).collect();
        assert_eq!(fields, vec!["extra.added", "extra.gone", "extra.space_group"]);
        assert_eq!(cs.apply(&current).unwrap(), snapshot(&[new]));
    }

    #[test]
    fn removal_has_reason() {
        let current = snapshot(&[entry("1AAA"), entry("1BBB")]);
        let cs = incremental_update(&current, &[entry("1AAA")]);
        assert_eq!(cs.removed_or_withdrawn.len(), 1);
        assert_eq!(cs.apply(&current).unwrap().len(), 1);
    }
}
