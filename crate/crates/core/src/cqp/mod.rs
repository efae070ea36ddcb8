//! The source calculus: processes acting on a global register that is
//! addressed by position, with measurement producing explicit probability
//! distributions over configurations.

mod config;
mod congruence;
mod parse;
mod run;
mod semantics;
mod term;
mod types;

pub use config::{Config, DistCase, DistConfig, PureConfig};
pub use congruence::{config_approx_eq, config_key, congruent, normalize, term_key};
pub use parse::{parse_cqp, parse_term};
pub use run::{run, RunError, RunStep, RunTrace, Scheduler, StopReason};
pub use semantics::{enumerate_steps, PermMode, Rule, Step, StepOptions};
pub use term::{Name, Term};
pub use types::{typecheck, typecheck_config, typecheck_internal, Type, TypeEnv, TypeError};
