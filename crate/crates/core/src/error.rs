use std::io;

use thiserror::Error;

/// Errors produced by the tracking toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bounding box: {0}")]
    InvalidBox(String),

    #[error("invalid detection: {0}")]
    InvalidDetection(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("score file references unknown detection (frame {frame}, index {index})")]
    DanglingDetection { frame: u32, index: usize },

    #[error("no score for pair (frame {frame_a}, index {index_a}) -> (frame {frame_b}, index {index_b})")]
    MissingScore {
        frame_a: u32,
        index_a: usize,
        frame_b: u32,
        index_b: usize,
    },

    #[error("model format: {0}")]
    ModelFormat(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("internal flow error: {0}")]
    Flow(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
