//! On-disk formats for every pipeline artifact.
//!
//! Everything is plain text or a dead-simple binary (PGM P5) so results
//! stay inspectable and diffable in golden-file tests. Floats in CSV files
//! are written with 17 significant digits, which round-trips `f64`
//! exactly; JSON goes through `serde_json`, whose shortest-round-trip
//! float encoding gives the same determinism guarantee.

pub mod calib;
pub mod csvio;
pub mod pgm;
pub mod ply;
pub mod svg;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("format: {0}")]
    Format(String),
}

impl From<csv::Error> for IoError {
    fn from(e: csv::Error) -> Self {
        // csv wraps io errors; unwrap them so exit-code mapping stays honest
        if e.is_io_error() {
            match e.into_kind() {
                csv::ErrorKind::Io(io) => IoError::Io(io),
                other => IoError::Format(format!("{other:?}")),
            }
        } else {
            IoError::Format(e.to_string())
        }
    }
}

/// 17 significant digits: enough to reproduce any f64 bit-exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
