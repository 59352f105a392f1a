//! Response bodies shared by the service and its clients that have no other
//! home in the model.

use serde::{Deserialize, Serialize};

use crate::discrepancy::{AuditRecord, DiscrepancyRecord};
use crate::ml::{ModelDocument, N_CLASSES};

/// Body of every error response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub store_version: u64,
    pub entries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolutionAck {
    pub audit: AuditRecord,
    pub store_version: u64,
    /// The entry's register records after the resolution.
    pub records: Vec<DiscrepancyRecord>,
}

/// How the served classifier was trained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub store_version: u64,
    pub labeled: usize,
    pub unlabeled: usize,
    pub pseudo_labeled: usize,
    pub excluded: usize,
    pub class_counts: [usize; N_CLASSES],
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    pub summary: TrainingSummary,
    pub document: ModelDocument,
}
