use std::path::PathBuf;

use umt_core::cantor::CantorError;
use umt_core::deform::DeformError;
use umt_core::distort::DistortError;
use umt_core::embed::EmbedError;
use umt_core::props::PropsError;
use umt_core::rational::RationalError;
use umt_core::ultrametrize::UltrametrizeError;
use umt_core::MetricError;

/// Everything that ends a run with exit code 1.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    InvalidParams(String),
    #[error("{0}")]
    NotFound(String),
    #[error("{what} exceeds the limit of {limit}")]
    SizeLimitExceeded { what: String, limit: u64 },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Cantor(#[from] CantorError),
    #[error(transparent)]
    Rational(#[from] RationalError),
    #[error(transparent)]
    Deform(#[from] DeformError),
    #[error(transparent)]
    Props(#[from] PropsError),
    #[error(transparent)]
    Ultrametrize(#[from] UltrametrizeError),
    #[error(transparent)]
    Distort(#[from] DistortError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

impl Error {
    /// Stable machine-readable name of the error.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "Io",
            Error::Json { .. } => "Json",
            Error::Format(_) => "Format",
            Error::InvalidParams(_) => "InvalidParams",
            Error::NotFound(_) => "NotFound",
            Error::SizeLimitExceeded { .. } => "SizeLimitExceeded",
            Error::Metric(_) => "InvalidMetric",
            Error::Cantor(CantorError::SizeLimitExceeded { .. }) => "SizeLimitExceeded",
            Error::Cantor(_) => "InvalidCantorSpace",
            Error::Rational(_) => "InvalidRational",
            Error::Deform(DeformError::TooFewPoints { .. }) => "TooFewPoints",
            Error::Deform(_) => "InvalidMetric",
            Error::Props(PropsError::ExactSearchTooLarge { .. }) => "ExactSearchTooLarge",
            Error::Ultrametrize(_) | Error::Embed(EmbedError::NotUltrametric(_)) => "NotUltrametric",
            Error::Distort(DistortError::TooLarge { .. }) => "TooLarge",
            Error::Distort(_) => "InvalidMap",
            Error::Embed(EmbedError::AlphabetTooSmall { .. }) => "AlphabetTooSmall",
            Error::Embed(EmbedError::DegenerateInput { .. }) => "DegenerateInput",
            Error::Embed(_) => "EmbedFailed",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({ "error": self.kind(), "message": self.to_string() });
        if let Error::Embed(EmbedError::AlphabetTooSmall { required, .. }) = self {
            v["minimal_k"] = (*required).into();
        }
        v
    }
}

pub type Result<T> = std::result::Result<T, Error>;
