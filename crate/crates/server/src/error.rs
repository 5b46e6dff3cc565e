use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;
use tgforge_core::{FilterError, LayoutError};

/// Error body: `{"error": {"code": str, "message": str}}`.
#[derive(Debug, Clone)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }

    pub fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

impl From<FilterError> for ApiError {
    fn from(e: FilterError) -> Self {
        let code = match e {
            FilterError::UnknownNode(_) => "unknown_node",
            FilterError::UnknownKind(_) => "unknown_kind",
            FilterError::Invalid(_) => "invalid_filter",
        };
        ApiError::bad_request(code, e.to_string())
    }
}

impl From<LayoutError> for ApiError {
    fn from(e: LayoutError) -> Self {
        match e {
            LayoutError::InvalidParam { field, .. } => {
                ApiError::bad_request("invalid_params", format!("{field}: {e}"))
            }
            other => ApiError::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                "layout_failed",
                other.to_string(),
            ),
        }
    }
}
