//! Single-path execution of target configurations.

use qproc_core::qccs::{reduce_steps, Defs, QccsConfig, SemanticsError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;

#[derive(Debug, Clone, PartialEq)]
pub struct QccsRunStep {
    pub rule: &'static str,
    pub via_choice: bool,
    pub config: QccsConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QccsTrace {
    pub initial: QccsConfig,
    pub steps: Vec<QccsRunStep>,
    /// No reduction was enabled at the end.
    pub terminated: bool,
}

impl QccsTrace {
    pub fn last(&self) -> &QccsConfig {
        self.steps.last().map(|s| &s.config).unwrap_or(&self.initial)
    }
}

/// Follows internal reductions for at most `max_steps` steps. When several
/// are enabled the next `script` entry indexes them in enumeration order;
/// once the script is used up the choice is drawn from `seed`.
pub fn run_qccs(
    c: &QccsConfig,
    defs: &Defs,
    tol: f64,
    script: &[usize],
    seed: u64,
    max_steps: usize,
) -> Result<QccsTrace, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut script: VecDeque<usize> = script.iter().copied().collect();
    let mut trace = QccsTrace { initial: c.clone(), steps: Vec::new(), terminated: false };
    let mut cur = c.clone();
    for n in 0..max_steps {
        let steps = reduce_steps(&cur, defs, tol).map_err(|e: SemanticsError| e.to_string())?;
        if steps.is_empty() {
            trace.terminated = true;
            return Ok(trace);
        }
        let pick = if steps.len() == 1 {
            0
        } else if let Some(j) = script.pop_front() {
            if j >= steps.len() {
                return Err(format!("scripted choice {j} is not among the {} steps enabled at step {n}", steps.len()));
            }
            j
        } else {
            rng.gen_range(0..steps.len())
        };
        let s = steps.into_iter().nth(pick).expect("index in range");
        cur = s.target.clone();
        trace.steps.push(QccsRunStep { rule: s.rule, via_choice: s.via_choice, config: s.target });
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qproc_core::qccs::parse_qccs;

    #[test]
    fn script_selects_the_branch() {
        let p = parse_qccs("state qubits q; rho = outer(|0>); process tau.ok + tau.nil;").unwrap();
        let t = run_qccs(&p.config, &p.defs, 1e-9, &[1], 0, 10).unwrap();
        assert_eq!(t.steps.len(), 1);
        assert!(!t.last().term.has_success());
        let t = run_qccs(&p.config, &p.defs, 1e-9, &[0], 0, 10).unwrap();
        assert!(t.last().term.has_success());
        assert!(run_qccs(&p.config, &p.defs, 1e-9, &[5], 0, 10).is_err());
    }
}
