//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by parsing, geometry, assembly and metric routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text (SDF, PDB, vocabulary, trajectory).
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Output cannot be represented in the target format.
    #[error("serialization error: {0}")]
    Serialize(String),

    /// A molecule violates a structural invariant (valence, connectivity,
    /// bond indices, coordinates).
    #[error("invalid molecule{}: {msg}", name_suffix(.name))]
    InvalidMolecule { name: String, msg: String },

    /// Degenerate or mismatched geometry input.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Connection sites of different kinds, or an attachment that would
    /// break valence or merge mismatched bonds.
    #[error("attachment error: {0}")]
    Attach(String),

    /// Placed atoms come closer to the pocket than the clash floor.
    #[error("steric clash: {0}")]
    Clash(String),

    /// No clash-free first-motif pose found within the retry budget.
    #[error("placement failed: {0}")]
    Placement(String),

    /// A policy returned a choice outside the offered candidate set.
    #[error("policy contract violation: {0}")]
    PolicyContract(String),

    /// Metric preconditions not met (bin mismatch, graph mismatch,
    /// degenerate weight range, unknown angle pattern).
    #[error("metric error: {0}")]
    Metric(String),
}

fn name_suffix(name: &str) -> String {
    if name.is_empty() {
        String::new()
    } else {
        format!(" '{name}'")
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
