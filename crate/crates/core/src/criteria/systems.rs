use super::lts::System;
use crate::cqp::{self, Config, Rule, StepOptions};
use crate::qccs::{self, Defs, Label, QccsConfig, SemanticsError};
use std::convert::Infallible;
use std::fmt;

/// Source reductions.
pub struct CqpSystem {
    pub opts: StepOptions,
}

impl System for CqpSystem {
    type State = Config;
    type Label = Rule;
    type Error = Infallible;

    fn steps(&self, s: &Config) -> Result<Vec<(Rule, Config)>, Infallible> {
        Ok(cqp::enumerate_steps(s, &self.opts).into_iter().map(|st| (st.rule, st.target)).collect())
    }

    fn key(&self, s: &Config) -> String {
        cqp::config_key(s)
    }

    fn same(&self, a: &Config, b: &Config) -> bool {
        cqp::config_approx_eq(a, b, self.opts.tolerance)
    }

    fn barb(&self, s: &Config) -> bool {
        s.has_success()
    }
}

/// Label of a target edge together with how it was derived.
#[derive(Debug, Clone, PartialEq)]
pub struct QEdge {
    pub label: Label,
    pub via_choice: bool,
    pub rule: &'static str,
}

impl fmt::Display for QEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}{}]", self.label, self.rule, if self.via_choice { ", choice" } else { "" })
    }
}

impl fmt::Display for QccsConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, rho over {}>", self.term, self.rho.names().join(","))
    }
}

/// Target transitions: internal steps only, or all labelled steps.
pub struct QccsSystem<'a> {
    pub defs: &'a Defs,
    pub tolerance: f64,
    pub labelled: bool,
}

impl System for QccsSystem<'_> {
    type State = QccsConfig;
    type Label = QEdge;
    type Error = SemanticsError;

    fn steps(&self, s: &QccsConfig) -> Result<Vec<(QEdge, QccsConfig)>, SemanticsError> {
        let steps = if self.labelled {
            qccs::lts_steps(s, self.defs, self.tolerance)?
        } else {
            qccs::reduce_steps(s, self.defs, self.tolerance)?
        };
        Ok(steps.into_iter().map(|st| (QEdge { label: st.label, via_choice: st.via_choice, rule: st.rule }, st.target)).collect())
    }

    fn key(&self, s: &QccsConfig) -> String {
        qccs::config_obs_key(s)
    }

    fn same(&self, a: &QccsConfig, b: &QccsConfig) -> bool {
        qccs::obs_eq(a, b, self.tolerance)
    }

    fn barb(&self, s: &QccsConfig) -> bool {
        qccs::has_success(&s.term, self.defs)
    }
}
