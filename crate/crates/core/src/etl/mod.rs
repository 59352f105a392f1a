//! Extract, stage, merge and load.

pub mod incremental;
pub mod merge;
pub mod pipeline;
pub mod properties;
pub mod record;
pub mod sources;
pub mod staging;
pub mod synthetic;
pub mod transfer;

pub use incremental::{diff_entries, incremental_update, Changeset, FieldDiff};
pub use merge::{merge_sources, Conflict, MergeConfig, MergeOutput, QcFlag};
pub use pipeline::{extract, run_directory, run_pipeline, ANNOTATION_FILE, stage_record, EtlConfig, EtlRun, Remapped, SourceBundle};
pub use record::{Extracted, Reject, SourceRecord};
pub use sources::{parse_mpstruc, parse_source_json, FixtureClient, SourceClient};
pub use staging::{
    cleanse, expand_column, filter_records, normalize_value, remap_pdb_code, NormalizationGap,
    NormalizationTable, RemapTable,
};
pub use transfer::{entry_digest, verify_transfer, TransferReport};
