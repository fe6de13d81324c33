use thiserror::Error;

/// All failure modes of the engine.
///
/// Each variant carries a stable machine-readable code (see [`Error::code`])
/// that front ends print as `ERROR <code>: <detail>`.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("weight error: {0}")]
    Weight(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("unknown attribute: {0}")]
    UnknownAttribute(String),

    #[error("non-positive value: {0}")]
    NonPositiveValue(String),

    #[error("duplicate service: {0}")]
    DuplicateService(String),

    #[error("catalog contains no services")]
    EmptyCatalog,

    #[error("no service matches the functional requirements")]
    EmptyMatch,

    #[error("service {service} has no value for attribute {attribute}")]
    MissingQoSValue { service: String, attribute: String },

    #[error("attribute {0} has close/exact tendency but no requested target value")]
    MissingRequestedValue(String),

    #[error("eigensolver did not converge within {iterations} iterations (residual {residual})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
}

impl Error {
    /// Stable code for machine-parsable diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse(_) => "ParseError",
            Error::Schema(_) => "SchemaError",
            Error::Weight(_) => "WeightError",
            Error::Io(_) => "IoError",
            Error::UnknownAttribute(_) => "UnknownAttribute",
            Error::NonPositiveValue(_) => "NonPositiveValue",
            Error::DuplicateService(_) => "DuplicateService",
            Error::EmptyCatalog => "EmptyCatalog",
            Error::EmptyMatch => "EmptyMatch",
            Error::MissingQoSValue { .. } => "MissingQoSValue",
            Error::MissingRequestedValue(_) => "MissingRequestedValue",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::UnsupportedFormat(_) => "UnsupportedFormat",
        }
    }
}

/// Maps a serde_json error to `Parse` (syntax/eof) or `Schema` (data shape).
pub(crate) fn from_json_err(err: serde_json::Error, context: &str) -> Error {
    match err.classify() {
        serde_json::error::Category::Data => Error::Schema(format!("{context}: {err}")),
        _ => Error::Parse(format!("{context}: {err}")),
    }
}
