use super::config::Config;
use super::semantics::{enumerate_steps, Rule, StepOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;
use thiserror::Error;

/// Picks among enabled steps. Scripted entries choose measurement outcomes
/// (the `j` of an `R-Prob(j)` step) in order; everything else, and outcomes
/// once the script is used up, is drawn from a seeded generator.
#[derive(Debug, Clone)]
pub struct Scheduler {
    rng: ChaCha8Rng,
    script: VecDeque<usize>,
}

impl Scheduler {
    pub fn seeded(seed: u64) -> Self {
        Scheduler { rng: ChaCha8Rng::seed_from_u64(seed), script: VecDeque::new() }
    }

    pub fn with_script(mut self, script: impl IntoIterator<Item = usize>) -> Self {
        self.script = script.into_iter().collect();
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunStep {
    pub rule: Rule,
    pub config: Config,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// No step is enabled.
    Terminated,
    /// The step budget ran out.
    Budget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub initial: Config,
    pub steps: Vec<RunStep>,
    pub stop: StopReason,
}

impl RunTrace {
    pub fn last(&self) -> &Config {
        self.steps.last().map(|s| &s.config).unwrap_or(&self.initial)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("scripted outcome {0} is not an available branch at step {1}")]
    ScriptBranchUnavailable(usize, usize),
}

pub fn run(c: &Config, opts: &StepOptions, sched: &mut Scheduler, max_steps: usize) -> Result<RunTrace, RunError> {
    let mut trace = RunTrace { initial: c.clone(), steps: Vec::new(), stop: StopReason::Budget };
    let mut cur = c.clone();
    for n in 0..max_steps {
        let steps = enumerate_steps(&cur, opts);
        if steps.is_empty() {
            trace.stop = StopReason::Terminated;
            return Ok(trace);
        }
        let all_prob = steps.iter().all(|s| matches!(s.rule, Rule::Prob(_)));
        let pick = if all_prob {
            if let Some(j) = sched.script.pop_front() {
                steps.iter().position(|s| s.rule == Rule::Prob(j)).ok_or(RunError::ScriptBranchUnavailable(j, n))?
            } else {
                let weights: Vec<f64> = match &cur {
                    Config::Dist(d) => steps
                        .iter()
                        .map(|s| match s.rule {
                            Rule::Prob(j) => d.cases[j].probability,
                            _ => 0.0,
                        })
                        .collect(),
                    Config::Pure(_) => vec![1.0; steps.len()],
                };
                let total: f64 = weights.iter().sum();
                let mut x = sched.rng.gen::<f64>() * total;
                let mut idx = weights.len() - 1;
                for (k, w) in weights.iter().enumerate() {
                    if x < *w {
                        idx = k;
                        break;
                    }
                    x -= w;
                }
                idx
            }
        } else {
            sched.rng.gen_range(0..steps.len())
        };
        let step = steps.into_iter().nth(pick).expect("index in range");
        cur = step.target.clone();
        trace.steps.push(RunStep { rule: step.rule, config: step.target });
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cqp::parse::parse_cqp;

    #[test]
    fn scripted_outcome_is_followed() {
        let c = parse_cqp("qubits q; state 1/sqrt(2)|0> + 1/sqrt(2)|1>; process (x := measure q).0").unwrap();
        let t = run(&c, &StepOptions::default(), &mut Scheduler::seeded(0).with_script([1]), 10).unwrap();
        assert_eq!(t.steps[1].rule, Rule::Prob(1));
        assert_eq!(t.stop, StopReason::Terminated);
        let err = run(&c, &StepOptions::default(), &mut Scheduler::seeded(0).with_script([2]), 10).unwrap_err();
        assert_eq!(err, RunError::ScriptBranchUnavailable(2, 1));
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let c = parse_cqp("qubits q; state 1/sqrt(2)|0> + 1/sqrt(2)|1>; process (x := measure q).0").unwrap();
        let a = run(&c, &StepOptions::default(), &mut Scheduler::seeded(7), 10).unwrap();
        let b = run(&c, &StepOptions::default(), &mut Scheduler::seeded(7), 10).unwrap();
        assert_eq!(a, b);
    }
}
