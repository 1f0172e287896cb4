//! First-order CNF sentences, the native text format, and grounding.

mod ground;
mod parse;
mod syntax;

use thiserror::Error;

pub use ground::{ground, ground_count, ground_with, AtomTable, GroundConfig, GroundProblem};
pub use parse::{parse_model, parse_sentence, ModelFile};
pub(crate) use parse::is_identifier;
pub use syntax::{Clause, Literal, PredId, Predicate, Role, Sentence, Term, Witness};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FolError {
    #[error("duplicate declaration of predicate '{0}'")]
    DuplicatePredicate(String),
    #[error("undeclared predicate '{0}'")]
    UnknownPredicate(String),
    #[error("arity mismatch for '{predicate}': declared {expected}, used with {found} argument(s)")]
    ArityMismatch {
        predicate: String,
        expected: usize,
        found: usize,
    },
    #[error("invalid weight on '{predicate}': {reason}")]
    InvalidWeight { predicate: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: String) -> Self {
        ParseError { line, column, message }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error("domain size must be at least 1")]
    EmptyDomain,
    #[error("grounding exceeds the cap of {0} clauses")]
    ClauseLimit(usize),
    #[error("too many ground atoms for 32-bit variable ids")]
    TooManyAtoms,
    #[error("constant {constant} outside domain 1..{domain}")]
    ConstantOutOfDomain { constant: u32, domain: u32 },
    #[error("variable '{0}' is not bound")]
    UnboundVariable(String),
}
