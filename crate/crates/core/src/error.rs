use thiserror::Error;

use crate::activity::ActivityId;

/// Failures while ingesting or transforming event logs.
#[derive(Debug, Error)]
pub enum LogError {
    #[error("empty log")]
    Empty,
    #[error("malformed XML: {0}")]
    Xml(String),
    #[error("event {event} of trace {trace} has no activity name")]
    MissingActivity { trace: usize, event: usize },
    #[error("reserved activity label {label:?} used by the input")]
    ReservedLabel { label: String },
    #[error("trace does not have the shape <▷, a1, ..., an, □>: {0}")]
    MalformedTrace(String),
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("row {row}: cannot parse timestamp {value:?}")]
    Timestamp { row: usize, value: String },
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("projection must keep the start and end activities")]
    ProjectionDropsEndpoints,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A rejected parameter, naming the offending field.
#[derive(Debug, Clone, Error, PartialEq, serde::Serialize)]
#[error("{field}: {message}")]
pub struct ParamError {
    pub field: &'static str,
    pub message: String,
}

impl ParamError {
    pub fn new(field: &'static str, message: impl Into<String>) -> Self {
        ParamError { field, message: message.into() }
    }
}

/// Failures of net construction, firing and import.
#[derive(Debug, Error)]
pub enum NetError {
    #[error("unknown transition {0}")]
    UnknownTransition(ActivityId),
    #[error("transition {0} is not enabled")]
    NotEnabled(ActivityId),
    #[error("arc references unknown place #{0}")]
    UnknownPlace(usize),
    #[error("activity {0} is both a place name and a transition")]
    NameClash(String),
    #[error("invalid net document: {0}")]
    Invalid(String),
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}
