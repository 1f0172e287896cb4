//! Front ends producing weighted sentences: Markov logic networks, tight
//! ProbLog programs, and the Skolemization both rely on.

pub mod formula;
pub mod mln;
pub mod problog;
pub mod skolem;

use thiserror::Error;

use crate::fol::{FolError, ParseError};

pub use formula::{CnfBuilder, Formula};
pub use mln::{encode_mln, exp_rational, parse_mln, EncodedRule, MlnEncoding, MlnOptions, MlnProgram, MlnRule, RuleWeight};
pub use problog::{encode_problog, parse_problog, ProblogEncoding, ProblogProgram};
pub use skolem::{skolemize, ExistsBlock, QuantifiedClause, QuantifiedSentence};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Fol(#[from] FolError),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("program is not tight: {0}")]
    NotTight(String),
    #[error("rule head {0} is also a probabilistic fact")]
    FactHead(String),
}
