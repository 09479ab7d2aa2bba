use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use hybrid_miner::ParamError;
use serde::Serialize;

/// A rejected request field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl From<ParamError> for FieldError {
    fn from(e: ParamError) -> Self {
        FieldError { field: e.field.to_string(), message: e.message }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("unknown session {0}")]
    NotFound(String),
    #[error("invalid parameters")]
    InvalidParams(Vec<FieldError>),
    #[error("{0}")]
    BadRequest(String),
    #[error("request body exceeds {0} bytes")]
    TooLarge(usize),
    #[error("{0}")]
    Internal(String),
}

impl ApiError {
    pub fn field(field: &str, message: impl Into<String>) -> Self {
        ApiError::InvalidParams(vec![FieldError { field: field.into(), message: message.into() }])
    }

    pub fn params(errors: Vec<ParamError>) -> Self {
        ApiError::InvalidParams(errors.into_iter().map(FieldError::from).collect())
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::InvalidParams(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::TooLarge(_) => StatusCode::PAYLOAD_TOO_LARGE,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    fn code(&self) -> &'static str {
        match self {
            ApiError::NotFound(_) => "not_found",
            ApiError::InvalidParams(_) => "invalid_parameters",
            ApiError::BadRequest(_) => "bad_request",
            ApiError::TooLarge(_) => "payload_too_large",
            ApiError::Internal(_) => "internal",
        }
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'static str,
    message: String,
    #[serde(skip_serializing_if = "<[FieldError]>::is_empty")]
    fields: &'a [FieldError],
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let fields: &[FieldError] = match &self {
            ApiError::InvalidParams(f) => f,
            _ => &[],
        };
        let body = ErrorBody { error: self.code(), message: self.to_string(), fields };
        (self.status(), Json(body)).into_response()
    }
}
