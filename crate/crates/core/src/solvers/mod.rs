//! Deciding quantified queries: a bounded enumerator and an SMT-LIB2 bridge
//! to an external prover.

mod external;
mod internal;
mod onepoint;
mod smtlib;

use std::fmt;
use std::time::Duration;

use thiserror::Error;

use crate::frontend::ast::Sort;
use crate::logic::{BinKind, Formula, QuantifiedQuery, Valuation, Verdict, Var};

pub use smtlib::emit_smtlib;

/// Environment variable overriding the prover command.
pub const PROVER_ENV: &str = "FLOC_PROVER";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Backend {
    Internal,
    External { command: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub backend: Backend,
    /// Integer variables range over `[-bound, bound]` (internal backend).
    pub bound: i64,
    /// Range of an integer placeholder.
    pub placeholder_bound: i64,
    pub timeout: Duration,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            backend: Backend::Internal,
            bound: 8,
            placeholder_bound: 8,
            timeout: Duration::from_secs(10),
        }
    }
}

impl SolverConfig {
    pub fn with_bounds(bound: i64, placeholder_bound: i64) -> Self {
        SolverConfig {
            bound,
            placeholder_bound,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.bound < 1 || self.placeholder_bound < 1 {
            return Err(SolverError::InvalidConfig("bounds must be at least 1".into()));
        }
        if self.timeout.is_zero() {
            return Err(SolverError::InvalidConfig("timeout must be positive".into()));
        }
        Ok(())
    }

    /// Tag describing what a Valid verdict means under this configuration.
    pub fn semantics(&self) -> String {
        match self.backend {
            Backend::Internal => format!("bounded[-{},{}]", self.bound, self.bound),
            Backend::External { .. } => "unbounded(prover)".into(),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Internal => f.write_str("internal"),
            Backend::External { command } => write!(f, "external({command})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("could not launch prover `{command}`: {reason}")]
    ProverLaunch { command: String, reason: String },
    #[error("unexpected prover output: {0:?}")]
    MalformedProverOutput(String),
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Decide `forall inputs, auxiliaries. body` (the placeholder, if any, is
/// ignored by callers; use [`decide`] for the general case).
pub fn decide_universal(q: &QuantifiedQuery, cfg: &SolverConfig) -> Result<Verdict, SolverError> {
    debug_assert!(q.placeholder.is_none());
    decide(q, cfg)
}

/// Decide `forall inputs. exists placeholder. forall auxiliaries. body`.
pub fn decide_forall_exists(
    q: &QuantifiedQuery,
    cfg: &SolverConfig,
) -> Result<Verdict, SolverError> {
    debug_assert!(q.placeholder.is_some());
    decide(q, cfg)
}

/// `q` with the bounded domains written into its body:
/// `forall i. exists c. forall t. i in D => (c in Dc && (t in D => body))`.
/// Its unbounded meaning is the bounded meaning of `q`, so an external
/// prover can be compared against the internal backend on it.
pub fn relativize(q: &QuantifiedQuery, bound: i64, placeholder_bound: i64) -> QuantifiedQuery {
    let dom = |vars: &[Var], b: i64| {
        Formula::and(
            vars.iter()
                .filter(|v| v.sort == Sort::Int)
                .flat_map(|v| {
                    [
                        Formula::binary(BinKind::Le, Formula::Int(-b), Formula::var(v)),
                        Formula::binary(BinKind::Le, Formula::var(v), Formula::Int(b)),
                    ]
                })
                .collect(),
        )
    };
    let inner = Formula::implies(dom(&q.auxiliaries, bound), q.body.clone());
    let mid = match &q.placeholder {
        Some(c) => Formula::and(vec![dom(std::slice::from_ref(c), placeholder_bound), inner]),
        None => inner,
    };
    QuantifiedQuery {
        inputs: q.inputs.clone(),
        placeholder: q.placeholder.clone(),
        auxiliaries: q.auxiliaries.clone(),
        body: Formula::implies(dom(&q.inputs, bound), mid),
    }
}

/// Decide the closure of `q` with the configured backend.
pub fn decide(q: &QuantifiedQuery, cfg: &SolverConfig) -> Result<Verdict, SolverError> {
    decide_with_hints(q, cfg, &[])
}

/// Like [`decide`], but the internal backend first checks the input points
/// in `hints` (typically known counterexamples). External provers ignore them.
pub fn decide_with_hints(
    q: &QuantifiedQuery,
    cfg: &SolverConfig,
    hints: &[Valuation],
) -> Result<Verdict, SolverError> {
    cfg.validate()?;
    match &cfg.backend {
        Backend::Internal => internal::decide(q, cfg, hints),
        Backend::External { command } => external::decide(q, command, cfg.timeout),
    }
}
