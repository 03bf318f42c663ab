use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Zero or negative disparity: the point sits at or beyond infinity.
    #[error("non-positive disparity {0} px")]
    Disparity(f64),
    #[error("point is behind the camera (z = {0} m)")]
    BehindCamera(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid injection schedule: {0}")]
    Schedule(String),
    #[error("scenario parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("malformed file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
