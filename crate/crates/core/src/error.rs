use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the reconstruction toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("crop removed every element")]
    EmptyMesh,

    #[error(
        "element {element} is inverted (jacobian determinant {det:e} at quadrature point {point})"
    )]
    InvertedElement {
        element: usize,
        point: usize,
        det: f64,
    },

    #[error("conformance error: {0}")]
    Conformance(String),

    #[error("numerical failure: {reason} (relative residual {residual:e})")]
    NumericalFailure { reason: String, residual: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("circle fit failed: {0}")]
    FitFailure(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("indenter does not touch the gel: {0}")]
    NoContact(String),

    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("format error in {what}: {message}")]
    Format { what: String, message: String },

    #[error("checksum mismatch: expected {expected}, found {found}")]
    Checksum { expected: String, found: String },

    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn format(what: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            what: what.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
