//! Signal temporal logic over discrete-time traces: predicate atoms with
//! exact signed distances, a formula parser and pretty-printer, positive
//! normal form, and Boolean plus quantitative (robustness) semantics.

mod atom;
mod eval;
mod formula;
mod parser;
mod trace;

pub use atom::{FunctionRegistry, NormKind, PredicateAtom, PredicateTable, ScalarFn, Shape};
pub use eval::{
    boolean_sat, boolean_sat_with, robustness, robustness_with, EvalOptions, UntilInner,
};
pub use formula::{Formula, Interval};
pub use parser::parse_formula;
pub use trace::{ConstraintSpec, Trace};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StlError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("formula contains an unbounded interval")]
    UnboundedFormula,
    #[error("the negation of an unbounded until cannot be expressed in positive normal form")]
    UnboundedUntilNegation,
    #[error("trace too short: formula needs step {needed}, trace ends at step {have}")]
    TraceTooShort { needed: usize, have: usize },
    #[error("state dimension mismatch for predicate `{name}`: expected {expected}, got {got}")]
    DimensionMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("constraint horizon [{lo},{hi}] is empty or outside the trace (last step {last})")]
    EmptyHorizon { lo: usize, hi: usize, last: usize },
    #[error("invalid predicate `{name}`: {reason}")]
    InvalidPredicate { name: String, reason: String },
    #[error("invalid trace: {0}")]
    InvalidTrace(String),
    #[error("invalid interval: lo {lo} exceeds hi {hi}")]
    InvalidInterval { lo: usize, hi: usize },
}
