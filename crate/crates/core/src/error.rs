use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while ingesting or querying the triple store.
#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}:{line}: expected 3 tab-separated fields, found {found}")]
    Malformed {
        path: PathBuf,
        line: usize,
        found: usize,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown entity id {0}")]
    UnknownEntity(u32),
    #[error("unknown predicate {0}")]
    UnknownPredicate(String),
}

/// Errors raised by the rule language: malformed paths, rule text, or rule shapes.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum RuleError {
    #[error("path rejected: {0}")]
    InvalidPath(&'static str),
    #[error("invalid rule: {0}")]
    InvalidRule(&'static str),
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
}

/// Errors raised by grounding, scoring and learning.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum LearnError {
    #[error("{0} rules cannot be grounded in this mode")]
    WrongKind(&'static str),
    #[error("rule was not derived from the template whose groundings were supplied")]
    TemplateMismatch,
    #[error("unknown target predicate id {0}")]
    UnknownTarget(u32),
    #[error(transparent)]
    Rule(#[from] RuleError),
}
