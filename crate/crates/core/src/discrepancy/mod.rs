//! Cross-source inconsistencies: detection, ranking, expert resolution and
//! agreement matrices.

pub mod agreement;
pub mod detect;
pub mod register;

pub use agreement::{agreement_matrix, AgreementCell, AgreementOptions};
pub use detect::{
    canonical_group, compare_tm, detect_all, detect_group_discrepancy, detect_tm_discrepancy, rank_discrepancies,
    yearly_discrepancy_counts, DetectionConfig, DiscrepancyKind, DiscrepancyRecord, Observed, TmComparison,
};
pub use register::{apply_expert_resolution, group_record_open, AuditRecord, ExpertState, Register, ResolutionRequest};
