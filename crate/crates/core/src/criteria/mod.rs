//! Bounded checks of the correctness properties of the translation.
//!
//! Every check explores finite fragments of the transition systems
//! involved and answers with a [`Verdict`]. A verdict about a universally
//! quantified property is per instance: `Holds` corroborates it on the
//! explored fragment, `Fails` carries a replayable counterexample trace.

mod campaign;
mod corr_sim;
mod correspondence;
mod counterexample;
mod gen;
mod invariance;
mod lts;
mod systems;

pub use campaign::{check_instance, CampaignSummary, InstanceResult, Tally, INSTANCE_CHECKS};
pub use corr_sim::{bisimilar, corr_sim_check, CorrSimMode, Matching};
pub use correspondence::{
    check_completeness, check_divergence_reflection, check_register_size, check_soundness, check_success_sensitiveness,
};
pub use counterexample::{counterexample_config, counterexample_suite, counterexample_table, expected_q, CounterexampleRow, CE_STATES};
pub use gen::{congruent_variant, gen_config, gen_config_with, GenParams};
pub use invariance::{check_congruence_preservation, check_name_invariance, check_qubit_invariance, random_channel_map, random_qubit_map};
pub use lts::{build_lts, Budget, Divergence, Edge, Lts, Stats, System};
pub use systems::{CqpSystem, QEdge, QccsSystem};

use crate::encode::EncodeError;
use crate::qccs::SemanticsError;
use crate::quantum::QuantumError;
use serde::Serialize;
use thiserror::Error;

/// Answer of a bounded check.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    Holds,
    /// The witness is a trace that replays the failure.
    Fails { witness: Vec<String> },
    /// Budget or truncation prevented an answer.
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn inconclusive(reason: &str) -> Verdict {
        Verdict::Inconclusive { reason: reason.to_string() }
    }

    pub fn fails(witness: Vec<String>) -> Verdict {
        Verdict::Fails { witness }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Holds => "Holds",
            Verdict::Fails { .. } => "Fails",
            Verdict::Inconclusive { .. } => "Inconclusive",
        }
    }

    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn is_fails(&self) -> bool {
        matches!(self, Verdict::Fails { .. })
    }

    /// Conjunction: a failure wins over an unknown, which wins over success.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (f @ Verdict::Fails { .. }, _) | (_, f @ Verdict::Fails { .. }) => f,
            (i @ Verdict::Inconclusive { .. }, _) | (_, i @ Verdict::Inconclusive { .. }) => i,
            _ => Verdict::Holds,
        }
    }

    /// `Holds` when `ok`, otherwise a failure with the given witness.
    pub fn from_bool(ok: bool, witness: impl FnOnce() -> Vec<String>) -> Verdict {
        if ok {
            Verdict::Holds
        } else {
            Verdict::Fails { witness: witness() }
        }
    }
}

/// Settings shared by all checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckOptions {
    pub tolerance: f64,
    pub budget: Budget,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { tolerance: crate::DEFAULT_TOLERANCE, budget: Budget::default() }
    }
}

/// Verdict of one check together with exploration statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub verdict: Verdict,
    pub stats: Stats,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriteriaError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("{0}")]
    Precondition(String),
}

/// Machine-readable result of a check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub check: String,
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_trace: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub stats: Stats,
    pub tolerance: f64,
    pub seed: u64,
}

impl Report {
    pub const SCHEMA: u32 = 1;

    pub fn new(check: &str, outcome: &Outcome, tolerance: f64, seed: u64) -> Report {
        let (witness_trace, reason) = match &outcome.verdict {
            Verdict::Holds => (None, None),
            Verdict::Fails { witness } => (Some(witness.clone()), None),
            Verdict::Inconclusive { reason } => (None, Some(reason.clone())),
        };
        Report {
            schema: Self::SCHEMA,
            check: check.to_string(),
            verdict: outcome.verdict.name(),
            witness_trace,
            reason,
            stats: outcome.stats,
            tolerance,
            seed,
        }
    }
}
