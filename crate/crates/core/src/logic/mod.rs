//! Formula IR, quantified queries and solver verdicts.

mod formula;
mod query;

use thiserror::Error;

pub use formula::{BinKind, Formula, Var};
pub use query::{build_query, QuantifiedQuery, Valuation, UnknownReason, Verdict};

use crate::frontend::ast::Sort;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("substituting a {found} term for {var}:{expected}")]
    SortMismatch {
        var: String,
        expected: Sort,
        found: Sort,
    },
    #[error("free variable {0} is neither input, placeholder nor auxiliary")]
    UnclassifiedVariable(String),
    #[error("variable {0} is classified twice")]
    OverlappingClasses(String),
    #[error("no value for {0}")]
    Unassigned(String),
    #[error("integer overflow during evaluation")]
    Overflow,
    #[error("ill-sorted formula")]
    IllSorted,
    #[error("cannot evaluate a quantified formula directly")]
    Quantified,
}
