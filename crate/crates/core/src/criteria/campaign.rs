//! One instance of the property campaign: generate a configuration and run
//! every per-instance check on it.

use super::correspondence::{
    check_completeness, check_divergence_reflection, check_register_size, check_soundness, check_success_sensitiveness,
};
use super::gen::{congruent_variant, gen_config_with, GenParams};
use super::invariance::{
    check_congruence_preservation, check_name_invariance, check_qubit_invariance, random_channel_map, random_qubit_map,
};
use super::{CheckOptions, CriteriaError, Outcome, Stats, Verdict};
use crate::cqp::typecheck_config;
use crate::encode::encode_config;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;

/// Names of the checks run on every instance, in report order.
pub const INSTANCE_CHECKS: [&str; 10] = [
    "typecheck",
    "wellformed",
    "completeness",
    "soundness",
    "name-invariance",
    "qubit-invariance",
    "register-size",
    "congruence",
    "divergence",
    "success",
];

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceResult {
    pub seed: u64,
    pub config: String,
    pub checks: Vec<(&'static str, Verdict)>,
    pub stats: Stats,
}

impl InstanceResult {
    pub fn failures(&self) -> impl Iterator<Item = &(&'static str, Verdict)> {
        self.checks.iter().filter(|(_, v)| v.is_fails())
    }
}

/// Generates the configuration for `seed` (register size cycling through
/// 1 to 4) and runs every check on it. Errors of a check count as failures.
pub fn check_instance(seed: u64, o: &CheckOptions) -> InstanceResult {
    let params = GenParams::new(1 + (seed % GenParams::MAX_QUBITS as u64) as usize);
    let src = gen_config_with(seed, &params);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut stats = Stats::default();
    let mut checks = Vec::new();
    let mut record = |name: &'static str, r: Result<Outcome, CriteriaError>| {
        let v = match r {
            Ok(o) => {
                stats = stats.merge(o.stats);
                o.verdict
            }
            Err(e) => Verdict::fails(vec![format!("check raised an error: {e}")]),
        };
        checks.push((name, v));
    };
    let typed = typecheck_config(&src)
        .map(|_| Outcome { verdict: Verdict::Holds, stats: Stats::default() })
        .map_err(|e| CriteriaError::Precondition(e.to_string()));
    record("typecheck", typed);
    let wf = encode_config(&src).map_err(CriteriaError::from).map(|out| Outcome {
        verdict: match out.program.check_wellformed() {
            Ok(()) => Verdict::Holds,
            Err(e) => Verdict::fails(vec![out.program.config.term.to_string(), e.to_string()]),
        },
        stats: Stats::default(),
    });
    record("wellformed", wf);
    record("completeness", check_completeness(&src, o));
    record("soundness", check_soundness(&src, o));
    let gamma = random_channel_map(&src, &mut rng);
    record("name-invariance", check_name_invariance(&src, &gamma, o.tolerance));
    let gamma = random_qubit_map(&src, &mut rng);
    record("qubit-invariance", check_qubit_invariance(&src, &gamma, o.tolerance));
    record("register-size", check_register_size(&src, o));
    let variant = congruent_variant(&src, seed.wrapping_add(1));
    record("congruence", check_congruence_preservation(&src, &variant, o.tolerance));
    record("divergence", check_divergence_reflection(&src, o));
    record("success", check_success_sensitiveness(&src, o));
    InstanceResult { seed, config: src.to_string(), checks, stats }
}

/// Per-check tallies over a set of instances.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Tally {
    pub holds: usize,
    pub fails: usize,
    pub inconclusive: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub instances: usize,
    pub checks: BTreeMap<String, Tally>,
    /// Instances with at least one inconclusive check and no failure.
    pub inconclusive_instances: usize,
    pub failing_seeds: Vec<u64>,
    pub stats: Stats,
}

impl CampaignSummary {
    pub fn from_results(results: &[InstanceResult]) -> Self {
        let mut s = CampaignSummary { instances: results.len(), ..Default::default() };
        for r in results {
            s.stats = s.stats.merge(r.stats);
            let mut failed = false;
            let mut unknown = false;
            for (name, v) in &r.checks {
                let t = s.checks.entry(name.to_string()).or_default();
                match v {
                    Verdict::Holds => t.holds += 1,
                    Verdict::Fails { .. } => {
                        t.fails += 1;
                        failed = true;
                    }
                    Verdict::Inconclusive { .. } => {
                        t.inconclusive += 1;
                        unknown = true;
                    }
                }
            }
            if failed {
                s.failing_seeds.push(r.seed);
            } else if unknown {
                s.inconclusive_instances += 1;
            }
        }
        s
    }

    pub fn total_fails(&self) -> usize {
        self.checks.values().map(|t| t.fails).sum()
    }

    /// Fraction of instances left undecided.
    pub fn inconclusive_rate(&self) -> f64 {
        if self.instances == 0 {
            0.0
        } else {
            self.inconclusive_instances as f64 / self.instances as f64
        }
    }
}
