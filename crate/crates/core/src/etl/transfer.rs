use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::model::{PdbCode, ProteinEntry};

/// Outcome of comparing staged entries against what the store holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferReport {
    pub staged_count: usize,
    pub loaded_count: usize,
    pub missing_keys: BTreeSet<PdbCode>,
    /// Present on both sides but with different content.
    pub mismatched_keys: BTreeSet<PdbCode>,
    /// Loaded but never staged.
    pub unexpected_keys: BTreeSet<PdbCode>,
    pub checksum_match: bool,
}

/// SHA-256 over the canonical JSON encoding of an entry, hex encoded.
pub fn entry_digest(entry: &ProteinEntry) -> String {
    let bytes = serde_json::to_vec(entry).expect("entries always serialize");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn verify_transfer(staged: &[ProteinEntry], loaded: &BTreeMap<PdbCode, ProteinEntry>) -> TransferReport {
    let mut missing_keys = BTreeSet::new();
    let mut mismatched_keys = BTreeSet::new();
    let mut staged_keys = BTreeSet::new();
    for entry in staged {
        staged_keys.insert(entry.pdb_code.clone());
        match loaded.get(&entry.pdb_code) {
            None => {
                missing_keys.insert(entry.pdb_code.clone());
            }
            Some(l) if entry_digest(l) != entry_digest(entry) => {
                mismatched_keys.insert(entry.pdb_code.clone());
            }
            Some(_) => {}
        }
    }
    let unexpected_keys: BTreeSet<_> = loaded.keys().filter(|k| !staged_keys.contains(*k)).cloned().collect();
    let checksum_match = missing_keys.is_empty()
        && mismatched_keys.is_empty()
        && unexpected_keys.is_empty()
        && staged.len() == loaded.len();
    TransferReport {
        staged_count: staged.len(),
        loaded_count: loaded.len(),
        missing_keys,
        mismatched_keys,
        unexpected_keys,
        checksum_match,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entries() -> Vec<ProteinEntry> {
        ["1PFO", "1B12", "1AFO"]
            .iter()
            .map(|c| ProteinEntry::new(PdbCode::parse(c).unwrap(), format!("p {c}"), 2000))
            .collect()
    }

    fn load(es: &[ProteinEntry]) -> BTreeMap<PdbCode, ProteinEntry> {
        es.iter().map(|e| (e.pdb_code.clone(), e.clone())).collect()
    }

    #[test]
    fn identical_sets_match() {
        let es = entries();
        let r = verify_transfer(&es, &load(&es));
        assert!(r.checksum_match);
        assert_eq!((r.staged_count, r.loaded_count), (3, 3));
    }

    #[test]
    fn dropped_entry_is_missing() {
        let es = entries();
        let mut loaded = load(&es);
        loaded.remove(&PdbCode::parse("1B12").unwrap());
        let r = verify_transfer(&es, &loaded);
        assert!(!r.checksum_match);
        assert_eq!(r.missing_keys.iter().map(|c| c.as_str()).collect::<Vec<_>>(), vec!["1B12"]);
    }

    #[test]
    fn mutated_entry_is_listed() {
        let es = entries();
        let mut loaded = load(&es);
        loaded.get_mut(&PdbCode::parse("1AFO").unwrap()).unwrap().resolution = Some(9.9);
        let r = verify_transfer(&es, &loaded);
        assert!(!r.checksum_match);
        assert!(r.missing_keys.is_empty());
        assert_eq!(r.mismatched_keys.iter().map(|c| c.as_str()).collect::<Vec<_>>(), vec!["1AFO"]);
    }
}
