//! Anytime lower and upper bounds on the symmetric weighted first-order
//! model count of a universally quantified CNF over a finite domain.
//!
//! The bounds come from an unweighted (projected) model counting oracle
//! applied to the grounding conjoined with cardinality constraints on the
//! number of true groundings of each weighted predicate.

pub mod cardenc;
pub mod encoders;
pub mod engine;
pub mod fol;
pub mod oracle;
pub mod rational;

/// Signed propositional literal (DIMACS convention).
pub type Lit = i32;
/// Propositional variable id, starting at 1.
pub type Var = u32;
