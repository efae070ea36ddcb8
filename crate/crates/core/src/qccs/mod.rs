//! The target calculus: processes over a density matrix of named qubits,
//! with super-operator prefixes, guarded choice, restriction and
//! recursive process constants.

mod congruence;
mod program;
mod semantics;
mod term;
mod wellformed;

pub use congruence::{alpha_eq, alpha_key, config_obs_key, obs_eq, obs_key, qccs_congruent, subst_qubits, term_key, HASH_DIGITS};
pub use program::{parse_qccs, parse_qccs_term, Defs, ProcDef, Program, QccsConfig, ResolveError, RhoSpec, Span};
pub use semantics::{eval_bool, has_success, lts_steps, reduce_steps, unfold, Label, QStep, SemanticsError, MAX_UNFOLD};
pub use term::{BoolExpr, Name, OpRef, Term};
pub use wellformed::{check_term, check_wellformed, Condition, WellFormedError, WellFormedKind};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoadError {
    #[error(transparent)]
    Parse(#[from] crate::syntax::ParseError),
    #[error(transparent)]
    WellFormed(#[from] WellFormedError),
}

/// Parses a `.qccs` file and enforces the no-cloning conditions, reporting
/// violations at their source position.
pub fn parse_qccs_checked(src: &str) -> Result<Program, LoadError> {
    let p = parse_qccs(src)?;
    p.check_wellformed()?;
    Ok(p)
}
