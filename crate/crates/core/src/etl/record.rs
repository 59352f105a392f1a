use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{PdbCode, SourceTag};

/// One raw record as extracted from a source snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceRecord {
    pub source: SourceTag,
    pub pdb_code: Option<PdbCode>,
    pub uniprot_id: Option<String>,
    pub attributes: BTreeMap<String, String>,
}

impl SourceRecord {
    pub fn new(source: SourceTag, pdb_code: Option<PdbCode>) -> Self {
        SourceRecord {
            source,
            pdb_code,
            uniprot_id: None,
            attributes: BTreeMap::new(),
        }
    }

    pub fn with(mut self, attribute: &str, value: &str) -> Self {
        self.attributes.insert(attribute.to_string(), value.to_string());
        self
    }

    pub fn get(&self, attribute: &str) -> Option<&str> {
        self.attributes.get(attribute).map(String::as_str)
    }

    /// Human-readable key for logs.
    pub fn key_label(&self) -> String {
        match (&self.pdb_code, &self.uniprot_id) {
            (Some(c), _) => c.to_string(),
            (None, Some(u)) => u.clone(),
            (None, None) => "<no key>".to_string(),
        }
    }
}

/// A record that could not enter the merged store, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub source: SourceTag,
    pub key: Option<String>,
    pub reason: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
}

/// Records extracted from one source document, plus those rejected on the way.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Extracted {
    pub records: Vec<SourceRecord>,
    pub rejects: Vec<Reject>,
}
