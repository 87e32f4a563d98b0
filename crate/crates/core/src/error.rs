use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("enumeration cap exceeded: {0}")]
    SizeCap(String),

    #[error("empty support: {0}")]
    EmptySupport(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("invariant breach: {0}")]
    Invariant(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
