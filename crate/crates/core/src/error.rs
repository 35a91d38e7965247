use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// Position in a model source, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// Errors in a model: parse failures, ill-formed reactions, and model faults
/// that only surface during reaction discovery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{location}: syntax error: {message}")]
    Syntax { location: Location, message: String },

    #[error("{location}: {message}")]
    Semantic { location: Location, message: String },

    #[error("invalid reaction: {0}")]
    InvalidReaction(String),

    #[error("arity mismatch on channel `{channel}` between {sender} (sends {sent}) and {receiver} (expects {expected})")]
    CommunicationArity {
        channel: String,
        sender: String,
        receiver: String,
        sent: usize,
        expected: usize,
    },

    #[error("unknown species `{0}`")]
    UnknownSpecies(String),

    #[error("unknown calculus tag `{0}`")]
    UnknownTag(String),

    #[error("calculus tag `{0}` is already registered")]
    DuplicateTag(String),

    #[error("{path}: {source}", path = path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<ModelError>,
    },

    #[error("{path}: {message}", path = path.display())]
    Io { path: PathBuf, message: String },
}

impl ModelError {
    pub fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        ModelError::Syntax {
            location: Location { line, column },
            message: message.into(),
        }
    }

    pub fn semantic(line: usize, column: usize, message: impl Into<String>) -> Self {
        ModelError::Semantic {
            location: Location { line, column },
            message: message.into(),
        }
    }

    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        ModelError::InFile {
            path: path.into(),
            source: Box::new(self),
        }
    }
}

/// Failures while running the machine.
#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] ModelError),

    #[error("cannot remove `{0}`: population is zero or species unknown")]
    EmptyPopulation(String),

    #[error("invalid run parameters: {0}")]
    InvalidRun(String),

    #[error("validation failed at t = {time}: {}", violations.join("; "))]
    Validation { time: f64, violations: Vec<String> },
}
