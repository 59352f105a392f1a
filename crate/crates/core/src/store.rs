//! Entry storage. Readers take an `Arc` to an immutable snapshot; writers
//! are serialized, build the next snapshot and swap it in.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};

use crate::discrepancy::{AuditRecord, DetectionConfig, Register, ResolutionRequest};
use crate::error::StoreError;
use crate::model::{PdbCode, ProteinEntry};

pub const STORE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StoreSnapshot {
    /// Bumped by every committed write.
    pub version: u64,
    /// Sorted by pdb_code, codes unique.
    pub entries: Vec<ProteinEntry>,
    pub register: Register,
    pub audit: Vec<AuditRecord>,
}

impl StoreSnapshot {
    pub fn get(&self, code: &PdbCode) -> Option<&ProteinEntry> {
        self.entries
            .binary_search_by(|e| e.pdb_code.cmp(code))
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub trait EntryStore: Send + Sync {
    fn snapshot(&self) -> Arc<StoreSnapshot>;

    /// Replaces the contents with `entries` and rebuilds the register.
    fn load(&self, entries: Vec<ProteinEntry>) -> Result<u64, StoreError>;

    /// Applies an expert resolution; returns the audit record and the new
    /// version.
    fn resolve(&self, code: &PdbCode, request: &ResolutionRequest) -> Result<(AuditRecord, u64), StoreError>;
}

fn check_entries(mut entries: Vec<ProteinEntry>) -> Result<Vec<ProteinEntry>, StoreError> {
    entries.sort_by(|a, b| a.pdb_code.cmp(&b.pdb_code));
    let mut seen = BTreeSet::new();
    for e in &entries {
        if !seen.insert(&e.pdb_code) {
            return Err(StoreError::Validation(format!("duplicate pdb_code {}", e.pdb_code)));
        }
        e.validate()
            .map_err(|err| StoreError::Validation(format!("{}: {err}", e.pdb_code)))?;
    }
    Ok(entries)
}

#[derive(Serialize, Deserialize)]
struct StoreFile {
    format_version: u32,
    #[serde(flatten)]
    snapshot: StoreSnapshot,
}

/// In-memory store with optional JSON-file persistence.
pub struct MemoryStore {
    current: RwLock<Arc<StoreSnapshot>>,
    writer: Mutex<()>,
    path: Option<PathBuf>,
    detection: DetectionConfig,
}

impl MemoryStore {
    pub fn new(detection: DetectionConfig) -> Self {
        MemoryStore {
            current: RwLock::new(Arc::new(StoreSnapshot {
                register: Register::build(&[], detection.clone()),
                ..Default::default()
            })),
            writer: Mutex::new(()),
            path: None,
            detection,
        }
    }

    pub fn with_entries(entries: Vec<ProteinEntry>, detection: DetectionConfig) -> Result<Self, StoreError> {
        let store = Self::new(detection);
        store.load(entries)?;
        Ok(store)
    }

    /// Opens `path`, or starts empty if it does not exist. Every write is
    /// persisted there.
    pub fn open(path: impl Into<PathBuf>, detection: DetectionConfig) -> Result<Self, StoreError> {
        let path = path.into();
        let mut store = Self::new(detection);
        if path.exists() {
            let text = std::fs::read_to_string(&path).map_err(|e| io(&path, e))?;
            let file: StoreFile = serde_json::from_str(&text).map_err(|e| corrupt(&path, e.to_string()))?;
            if file.format_version != STORE_FORMAT_VERSION {
                return Err(corrupt(&path, format!("unsupported format_version {}", file.format_version)));
            }
            let entries = check_entries(file.snapshot.entries.clone()).map_err(|e| corrupt(&path, e.to_string()))?;
            if entries != file.snapshot.entries {
                return Err(corrupt(&path, "entries not sorted by pdb_code".into()));
            }
            store.current = RwLock::new(Arc::new(file.snapshot));
        }
        store.path = Some(path);
        Ok(store)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    fn commit(&self, next: StoreSnapshot) -> Result<u64, StoreError> {
        if let Some(path) = &self.path {
            persist(path, &next)?;
        }
        let version = next.version;
        *self.current.write().expect("store lock poisoned") = Arc::new(next);
        Ok(version)
    }
}

fn io(path: &Path, e: std::io::Error) -> StoreError {
    StoreError::Io {
        path: path.display().to_string(),
        source: e,
    }
}

fn corrupt(path: &Path, message: String) -> StoreError {
    StoreError::Corrupt {
        path: path.display().to_string(),
        message,
    }
}

/// Writes to a sibling temp file and renames it over `path`.
fn persist(path: &Path, snapshot: &StoreSnapshot) -> Result<(), StoreError> {
    #[derive(Serialize)]
    struct Out<'a> {
        format_version: u32,
        #[serde(flatten)]
        snapshot: &'a StoreSnapshot,
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    }
    let body = serde_json::to_vec(&Out {
        format_version: STORE_FORMAT_VERSION,
        snapshot,
    })
    .expect("snapshots serialize");
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, body).map_err(|e| io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| io(path, e))
}

impl EntryStore for MemoryStore {
    fn snapshot(&self) -> Arc<StoreSnapshot> {
        self.current.read().expect("store lock poisoned").clone()
    }

    fn load(&self, entries: Vec<ProteinEntry>) -> Result<u64, StoreError> {
        let _guard = self.writer.lock().expect("writer lock poisoned");
        let entries = check_entries(entries)?;
        let prev = self.snapshot();
        self.commit(StoreSnapshot {
            version: prev.version + 1,
            register: Register::build(&entries, self.detection.clone()),
            entries,
            audit: prev.audit.clone(),
        })
    }

    fn resolve(&self, code: &PdbCode, request: &ResolutionRequest) -> Result<(AuditRecord, u64), StoreError> {
        let _guard = self.writer.lock().expect("writer lock poisoned");
        let prev = self.snapshot();
        let mut map: BTreeMap<PdbCode, ProteinEntry> =
            prev.entries.iter().map(|e| (e.pdb_code.clone(), e.clone())).collect();
        let mut register = prev.register.clone();
        let audit = register.resolve(&mut map, code, request)?;
        let mut log = prev.audit.clone();
        log.push(audit.clone());
        let version = self.commit(StoreSnapshot {
            version: prev.version + 1,
            entries: map.into_values().collect(),
            register,
            audit: log,
        })?;
        Ok((audit, version))
    }
}
