use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CccError {
    #[error("vertex count mismatch: expected {expected}, got {got}")]
    VertexCountMismatch { expected: usize, got: usize },

    #[error("vertex {vertex} out of range for n={n}")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("color {color} out of range for L={num_colors}")]
    ColorOutOfRange { color: usize, num_colors: usize },

    #[error("self-pair ({0}, {0}) is not a valid edge")]
    SelfPair(usize),

    #[error("row domains differ: {left} vs {right}")]
    DomainMismatch { left: usize, right: usize },

    #[error("invalid parameter {name}={value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{what}: n={n} exceeds cap {cap}")]
    TooLarge {
        what: &'static str,
        n: usize,
        cap: usize,
    },

    #[error("invalid clustering: {}", .0.join("; "))]
    InvalidClustering(Vec<String>),

    #[error("infeasible {what}: {detail}")]
    Infeasible { what: &'static str, detail: String },

    #[error("LP solver: {0}")]
    Solver(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, CccError>;

pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(CccError::InvalidParameter {
            name,
            value,
            reason: "must lie in [0, 1]",
        });
    }
    Ok(())
}
