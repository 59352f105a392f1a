use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;

pub use metamp_core::wire::ErrorBody;
use metamp_core::error::{AnalyticsError, BenchmarkError, DiscrepancyError, MlError, ModelError, QueryError, StoreError};


#[derive(Debug, Clone, PartialEq)]
pub enum ApiError {
    UnknownEntry(String),
    UnknownView(String),
    BadFilter { attribute: String, message: String },
    Validation(String),
    /// The classifier cannot be trained on the current store.
    InsufficientData(String),
    Internal(String),
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::UnknownEntry(_) | ApiError::UnknownView(_) => StatusCode::NOT_FOUND,
            ApiError::BadFilter { .. } | ApiError::Validation(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::InsufficientData(_) => StatusCode::SERVICE_UNAVAILABLE,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn body(&self) -> ErrorBody {
        let (error, message, attribute) = match self {
            ApiError::UnknownEntry(c) => ("unknown_entry", format!("no entry {c}"), None),
            ApiError::UnknownView(v) => ("unknown_view", format!("no view named {v:?}"), None),
            ApiError::BadFilter { attribute, message } => ("bad_filter", message.clone(), Some(attribute.clone())),
            ApiError::Validation(m) => ("validation", m.clone(), None),
            ApiError::InsufficientData(m) => ("insufficient_training_data", m.clone(), None),
            ApiError::Internal(m) => ("internal", m.clone(), None),
        };
        ErrorBody {
            error: error.into(),
            message,
            attribute,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if let ApiError::Internal(m) = &self {
            tracing::error!("internal error: {m}");
        }
        (self.status(), Json(self.body())).into_response()
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        match e {
            QueryError::BadFilter { attribute, message } => ApiError::BadFilter { attribute, message },
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::UnknownEntry(c) => ApiError::UnknownEntry(c),
            StoreError::Validation(m) => ApiError::Validation(m),
            other => ApiError::Internal(other.to_string()),
        }
    }
}

impl From<DiscrepancyError> for ApiError {
    fn from(e: DiscrepancyError) -> Self {
        match e {
            DiscrepancyError::UnknownEntry(c) => ApiError::UnknownEntry(c),
            other => ApiError::Validation(other.to_string()),
        }
    }
}

impl From<AnalyticsError> for ApiError {
    fn from(e: AnalyticsError) -> Self {
        ApiError::Validation(e.to_string())
    }
}

impl From<BenchmarkError> for ApiError {
    fn from(e: BenchmarkError) -> Self {
        ApiError::Validation(e.to_string())
    }
}

impl From<ModelError> for ApiError {
    fn from(e: ModelError) -> Self {
        ApiError::Validation(e.to_string())
    }
}

impl From<MlError> for ApiError {
    fn from(e: MlError) -> Self {
        match e {
            MlError::TooFewSamples { .. } | MlError::TooFewPerClass { .. } => ApiError::InsufficientData(e.to_string()),
            MlError::Document(m) => ApiError::Internal(m),
            other => ApiError::Validation(other.to_string()),
        }
    }
}
