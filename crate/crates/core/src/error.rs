//! Crate-wide error type.

use crate::image::GridShape;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid configuration value, with the violated constraint spelled out.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Two grids that must share a shape do not.
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch { expected: GridShape, got: GridShape },

    /// Guide dimensions are not an integer multiple of the depth dimensions.
    #[error("non-integer upsampling factor: guide {guide:?} is not an integer multiple of depth {depth:?}")]
    NonIntegerFactor { guide: GridShape, depth: GridShape },

    /// A value fell outside its declared range (rejected, never clamped).
    #[error("value out of range: {0}")]
    OutOfRange(String),

    /// A coordinate argument violated a domain precondition.
    #[error("{0}")]
    Domain(String),

    /// Malformed file contents.
    #[error("parse error in {path}: {msg}")]
    Parse { path: String, msg: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
