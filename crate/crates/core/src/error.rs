use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("malformed PDB code {0:?}: expected 4 alphanumeric characters starting with a digit")]
    MalformedCode(String),
    #[error("unknown membrane group label {0:?}")]
    UnknownGroup(String),
    #[error("unknown source tag {0:?}")]
    UnknownSource(String),
    #[error("year {0} outside the supported range")]
    InvalidYear(i32),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum EtlError {
    #[error("parse error in {source_name} at line {line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },
    #[error("cannot expand column {column}: {reason}")]
    Expansion { column: String, reason: String },
    #[error("invalid table {name}: {message}")]
    Table { name: String, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("unknown attribute {0:?}")]
    UnknownAttribute(String),
    #[error("empty matrix")]
    EmptyMatrix,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscrepancyError {
    #[error("unknown entry {0}")]
    UnknownEntry(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("invalid year range {from}..={to}")]
    InvalidRange { from: i32, to: i32 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MlError {
    #[error("incomplete features, missing: {}", .0.join(", "))]
    IncompleteFeatures(Vec<String>),
    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("class {class} has {count} members, fewer than {folds} folds")]
    TooFewPerClass {
        class: usize,
        count: usize,
        folds: usize,
    },
    #[error("encoder mismatch: expected dimension {expected}, got {got}")]
    EncoderMismatch { expected: usize, got: usize },
    #[error("singular input: {0}")]
    SingularInput(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("model document: {0}")]
    Document(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchmarkError {
    #[error("missing TM annotation")]
    MissingAnnotation,
    #[error("no comparable entries for {0} vs {1}")]
    NoComparableEntries(String, String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 observations, got {0}")]
    TooFewObservations(usize),
    #[error("SUS answer {value} at position {position} outside 1..=5")]
    OutOfRange { position: usize, value: u8 },
    #[error("SUS response needs at least 10 answers, got {0}")]
    TooFewAnswers(usize),
    #[error("annotation table: {0}")]
    Table(String),
}

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("bad filter on {attribute}: {message}")]
    BadFilter { attribute: String, message: String },
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("unknown entry {0}")]
    UnknownEntry(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt store file {path}: {message}")]
    Corrupt { path: String, message: String },
}

impl From<DiscrepancyError> for StoreError {
    fn from(e: DiscrepancyError) -> Self {
        match e {
            DiscrepancyError::UnknownEntry(c) => StoreError::UnknownEntry(c),
            other => StoreError::Validation(other.to_string()),
        }
    }
}
