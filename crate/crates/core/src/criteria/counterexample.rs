//! A target configuration whose success behaviour depends on a
//! non-unitary, sign-carrying operator: applied to different initial
//! states, the same process must, may, or cannot reach success. No
//! unitary source operator can reproduce this split.

use super::lts::{build_lts, Stats};
use super::systems::QccsSystem;
use super::{CheckOptions, CriteriaError, Verdict};
use crate::qccs::{parse_qccs, Program};
use num_complex::Complex;
use crate::Matrix;
use std::fmt::Write;

/// Initial states of the suite, as kets.
pub const CE_STATES: [&str; 4] = ["|0>", "|1>", "|+>", "|->"];

fn ket_source(state: &str) -> Option<&'static str> {
    Some(match state {
        "|0>" => "|0>",
        "|1>" => "|1>",
        "|+>" => "1/sqrt(2)|0> + 1/sqrt(2)|1>",
        "|->" => "1/sqrt(2)|0> - 1/sqrt(2)|1>",
        _ => return None,
    })
}

/// The configuration for one of [`CE_STATES`]: apply the operator, then
/// offer success if outcome 0 has nonzero weight and a dead end if
/// outcome 1 has.
pub fn counterexample_config(state: &str) -> Result<Program, CriteriaError> {
    let ket = ket_source(state).ok_or_else(|| CriteriaError::Precondition(format!("unknown state `{state}`")))?;
    let src = format!(
        "superop Q(1) {{ +[[1, 0], [0, sqrt(2)]]; -[[0, 1], [0, 0]]; }}\n\
         state qubits q; rho = outer({ket});\n\
         process Q[q].(if tr(E{{0}}[q]) != 0 then tau.ok + if tr(E{{1}}[q]) != 0 then tau.nil);"
    );
    parse_qccs(&src).map_err(|e| CriteriaError::Precondition(e.to_string()))
}

/// Published value of the operator applied to each state of [`CE_STATES`].
pub fn expected_q(state: &str) -> Option<Matrix> {
    let h = std::f64::consts::SQRT_2 / 2.0;
    let rows: [[f64; 4]; 4] = [[1.0, 0.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 2.0], [0.0, h, h, 1.0], [0.0, -h, -h, 1.0]];
    let i = CE_STATES.iter().position(|s| *s == state)?;
    let r = rows[i];
    let c = |x: f64| Complex::new(x, 0.0);
    Matrix::from_rows(vec![vec![c(r[0]), c(r[1])], vec![c(r[2]), c(r[3])]]).ok()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleRow {
    pub state: String,
    pub q_rho: Matrix,
    /// Computed matrix agrees with the published one within tolerance.
    pub q_matches: bool,
    pub may: Verdict,
    pub must: Verdict,
    pub stats: Stats,
}

impl CounterexampleRow {
    pub fn classification(&self) -> &'static str {
        match (&self.may, &self.must) {
            (Verdict::Holds, Verdict::Holds) => "must-success",
            (Verdict::Holds, Verdict::Fails { .. }) => "may-not-must",
            (Verdict::Fails { .. }, _) => "cannot",
            _ => "undecided",
        }
    }
}

/// Runs the success checks on every state of [`CE_STATES`] and compares
/// the operator's action against the published matrices.
pub fn counterexample_suite(o: &CheckOptions) -> Result<Vec<CounterexampleRow>, CriteriaError> {
    CE_STATES
        .iter()
        .map(|&state| {
            let p = counterexample_config(state)?;
            let q = &p.defs.superops["Q"];
            let q_rho = q.apply(&["q".to_string()], &p.config.rho, o.tolerance)?.matrix().clone();
            let expected = expected_q(state).expect("every suite state has a published value");
            let q_matches = q_rho.approx_eq(&expected, o.tolerance);
            let sys = QccsSystem { defs: &p.defs, tolerance: o.tolerance, labelled: false };
            let lts = build_lts(&sys, p.config.clone(), o.budget)?;
            Ok(CounterexampleRow {
                state: state.to_string(),
                q_rho,
                q_matches,
                may: lts.may_reach_success(),
                must: lts.must_reach_success(),
                stats: lts.stats(),
            })
        })
        .collect()
}

fn fmt_entry(z: Complex<f64>) -> String {
    let r = if z.re.abs() < 5e-13 { 0.0 } else { z.re };
    let s = format!("{r:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".to_string() } else { s.to_string() }
}

/// Plain-text table with one row per state.
pub fn counterexample_table(rows: &[CounterexampleRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<6} {:<34} {:<6} {:<13} {:<13} class", "state", "Q(rho)", "match", "may", "must");
    for r in rows {
        let m = r.q_rho.dim();
        let q = (0..m)
            .map(|i| format!("[{}]", (0..m).map(|j| fmt_entry(r.q_rho.get(i, j))).collect::<Vec<_>>().join(", ")))
            .collect::<Vec<_>>()
            .join(", ");
        let _ = writeln!(
            out,
            "{:<6} {:<34} {:<6} {:<13} {:<13} {}",
            r.state,
            format!("[{q}]"),
            if r.q_matches { "yes" } else { "NO" },
            r.may.name(),
            r.must.name(),
            r.classification()
        );
    }
    out
}
