//! Operational correspondence between a source configuration and its
//! translation, and the properties derived from it: reflection of
//! divergence, agreement on success and preservation of register size.

use super::corr_sim::{corr_sim_check, CorrSimMode};
use super::lts::{build_lts, Lts, Stats};
use super::systems::{CqpSystem, QEdge, QccsSystem};
use super::{CheckOptions, CriteriaError, Outcome, Verdict};
use crate::cqp::{self, Config, PermMode, Rule, StepOptions};
use crate::encode::encode_config;
use crate::qccs::{config_obs_key, obs_eq, reduce_steps, Defs, QccsConfig};
use std::collections::{HashMap, VecDeque};

type SourceLts = Lts<Config, Rule>;
type TargetLts = Lts<QccsConfig, QEdge>;

fn step_options(o: &CheckOptions) -> StepOptions {
    StepOptions { perm_mode: PermMode::OnDemand, tolerance: o.tolerance }
}

/// Explored source system and the translation of each of its states.
struct Source {
    lts: SourceLts,
    enc: Vec<QccsConfig>,
}

fn explore_source(src: &Config, o: &CheckOptions) -> Result<Source, CriteriaError> {
    cqp::typecheck_config(src).map_err(|e| CriteriaError::Precondition(format!("source is not well typed: {e}")))?;
    let Ok(lts) = build_lts(&CqpSystem { opts: step_options(o) }, src.clone(), o.budget);
    let enc = lts.states.iter().map(|s| Ok(encode_config(s)?.program.config)).collect::<Result<_, CriteriaError>>()?;
    Ok(Source { lts, enc })
}

fn explore_target(init: &QccsConfig, o: &CheckOptions, labelled: bool) -> Result<TargetLts, CriteriaError> {
    let defs = Defs::default();
    Ok(build_lts(&QccsSystem { defs: &defs, tolerance: o.tolerance, labelled }, init.clone(), o.budget)?)
}

/// A source step with the target configuration that emulates it.
struct Matched {
    to: usize,
    target: QccsConfig,
}

struct Completeness {
    verdict: Verdict,
    stats: Stats,
    matched: Vec<Matched>,
    source: Source,
}

fn source_step_witness(s: &Source, edge: usize, what: &str) -> Vec<String> {
    let e = &s.lts.edges[edge];
    let mut w = s.lts.witness_to(e.from);
    w.push(format!("--{}--> {}", e.label, s.lts.states[e.to]));
    w.push(format!("translation before: {}", s.enc[e.from].term));
    w.push(format!("translation after: {}", s.enc[e.to].term));
    w.push(what.to_string());
    w
}

fn completeness(src: &Config, o: &CheckOptions) -> Result<Completeness, CriteriaError> {
    let source = explore_source(src, o)?;
    let defs = Defs::default();
    let mut stats = source.lts.stats();
    let mut verdict = Verdict::Holds;
    let mut matched = Vec::new();
    for (k, e) in source.lts.edges.iter().enumerate() {
        let (before, after) = (&source.enc[e.from], &source.enc[e.to]);
        if matches!(e.label, Rule::Perm(_)) {
            // Emulated by the empty sequence.
            let ok = obs_eq(before, after, o.tolerance);
            verdict = verdict.and(Verdict::from_bool(ok, || {
                source_step_witness(&source, k, "a register permutation changed the translation")
            }));
            matched.push(Matched { to: e.to, target: before.clone() });
            continue;
        }
        let candidates: Vec<QccsConfig> = reduce_steps(before, &defs, o.tolerance)?.into_iter().map(|s| s.target).collect();
        if let Some(t) = candidates.iter().find(|t| obs_eq(after, t, o.tolerance)) {
            matched.push(Matched { to: e.to, target: t.clone() });
            continue;
        }
        // No single step reaches the translation itself; accept a step to a
        // configuration it is correspondence similar to, over registers of
        // equal size.
        let want = explore_target(after, o, true)?;
        stats = stats.merge(want.stats());
        let mut found = None;
        let mut unknown = false;
        for t in &candidates {
            let got = explore_target(t, o, true)?;
            stats = stats.merge(got.stats());
            match corr_sim_check(&want, &got, CorrSimMode { size_sensitive: true, ..Default::default() }) {
                Verdict::Holds => {
                    found = Some(t.clone());
                    break;
                }
                Verdict::Inconclusive { .. } => unknown = true,
                Verdict::Fails { .. } => {}
            }
        }
        match found {
            Some(t) => matched.push(Matched { to: e.to, target: t }),
            None if unknown => verdict = verdict.and(Verdict::inconclusive("correspondence simulation cut by the budget")),
            None => {
                verdict = verdict.and(Verdict::fails(source_step_witness(
                    &source,
                    k,
                    "no target step from the translation before reaches a configuration similar to the translation after",
                )))
            }
        }
    }
    if verdict.holds() && source.lts.is_truncated() {
        verdict = Verdict::inconclusive("source exploration cut by the budget");
    }
    Ok(Completeness { verdict, stats, matched, source })
}

/// Every explored source step is emulated: register permutations by no
/// step, every other step by at most one target step reaching the
/// translation of its result, or a configuration the translation is
/// correspondence similar to.
pub fn check_completeness(src: &Config, o: &CheckOptions) -> Result<Outcome, CriteriaError> {
    let c = completeness(src, o)?;
    Ok(Outcome { verdict: c.verdict, stats: c.stats })
}

struct Soundness {
    sound: Verdict,
    length: Verdict,
    stats: Stats,
    source: Source,
    target: TargetLts,
}

fn soundness(src: &Config, o: &CheckOptions) -> Result<Soundness, CriteriaError> {
    let source = explore_source(src, o)?;
    let mut index: HashMap<String, Vec<usize>> = HashMap::new();
    for (i, t) in source.enc.iter().enumerate() {
        index.entry(config_obs_key(t)).or_default().push(i);
    }
    let target = explore_target(&source.enc[0], o, false)?;
    let mut sound = Verdict::Holds;
    let mut length = Verdict::Holds;
    for t in 0..target.states.len() {
        // Breadth-first over choice reductions, nearest completions first.
        let mut dist: HashMap<usize, usize> = HashMap::from([(t, 0)]);
        let mut queue = VecDeque::from([t]);
        let mut found: Option<(usize, usize, usize)> = None;
        let mut fits = false;
        let mut cut = false;
        while let Some(u) = queue.pop_front() {
            let k = dist[&u];
            cut |= target.truncated[u];
            let key = config_obs_key(&target.states[u]);
            for &s in index.get(&key).into_iter().flatten() {
                if obs_eq(&source.enc[s], &target.states[u], o.tolerance) {
                    found.get_or_insert((u, k, s));
                    if target.depth[t] + k <= source.lts.depth[s] {
                        fits = true;
                        break;
                    }
                }
            }
            if fits {
                break;
            }
            for &e in &target.succ[u] {
                let edge = &target.edges[e];
                if edge.label.via_choice && !dist.contains_key(&edge.to) {
                    dist.insert(edge.to, k + 1);
                    queue.push_back(edge.to);
                }
            }
        }
        match found {
            None if cut || source.lts.is_truncated() => {
                sound = sound.and(Verdict::inconclusive("no completion found within the explored fragment"))
            }
            None => {
                let mut w = target.witness_to(t);
                w.push("no sequence of choice reductions reaches the translation of a reachable source configuration".into());
                sound = sound.and(Verdict::fails(w));
            }
            Some((u, k, s)) if !fits => {
                let mut w = target.witness_to(t);
                w.push(format!(
                    "completed by {k} choice reductions to {}, but the target took {} steps and the source needs only {}",
                    target.states[u],
                    target.depth[t] + k,
                    source.lts.depth[s]
                ));
                length = length.and(Verdict::fails(w));
            }
            Some(_) => {}
        }
    }
    if target.is_truncated() {
        sound = sound.and(Verdict::inconclusive("target exploration cut by the budget"));
    }
    let stats = source.lts.stats().merge(target.stats());
    Ok(Soundness { sound, length, stats, source, target })
}

/// Every reachable target configuration completes, by reducing choices
/// only, to the translation of a reachable source configuration.
pub fn check_soundness(src: &Config, o: &CheckOptions) -> Result<Outcome, CriteriaError> {
    let s = soundness(src, o)?;
    Ok(Outcome { verdict: s.sound, stats: s.stats })
}

/// An internal cycle of the translation implies a source cycle that is not
/// made of register permutations alone, and no emulating target sequence
/// is longer than the source sequence it emulates.
pub fn check_divergence_reflection(src: &Config, o: &CheckOptions) -> Result<Outcome, CriteriaError> {
    let s = soundness(src, o)?;
    let target = s.target.divergence(|_| true);
    let source = s.source.lts.divergence(|r| !matches!(r, Rule::Perm(_)));
    let cycles = match (&target, &source) {
        (super::Divergence::Divergent { lasso }, super::Divergence::Convergent) => {
            let mut w = lasso.clone();
            w.push("the translation diverges but the source does not".into());
            Verdict::fails(w)
        }
        (super::Divergence::Divergent { .. }, super::Divergence::Unknown) => {
            Verdict::inconclusive("source exploration cut before a cycle was found")
        }
        (super::Divergence::Unknown, _) => Verdict::inconclusive("target exploration cut by the budget"),
        _ => Verdict::Holds,
    };
    Ok(Outcome { verdict: cycles.and(s.length), stats: s.stats })
}

fn agree(what: &str, source: Verdict, target: Verdict) -> Verdict {
    match (&source, &target) {
        (Verdict::Inconclusive { .. }, _) | (_, Verdict::Inconclusive { .. }) => {
            Verdict::inconclusive(&format!("{what} success undecided within the budget"))
        }
        _ if source.holds() == target.holds() => Verdict::Holds,
        _ => {
            let mut w = match (source, target) {
                (Verdict::Fails { witness }, _) | (_, Verdict::Fails { witness }) => witness,
                _ => Vec::new(),
            };
            w.push(format!("{what} success differs between the source and its translation"));
            Verdict::fails(w)
        }
    }
}

/// The source and its translation agree on whether success may be
/// reached, and on whether it must be reached on every finite path.
pub fn check_success_sensitiveness(src: &Config, o: &CheckOptions) -> Result<Outcome, CriteriaError> {
    let source = explore_source(src, o)?;
    let target = explore_target(&source.enc[0], o, false)?;
    let verdict = agree("may", source.lts.may_reach_success(), target.may_reach_success())
        .and(agree("must", source.lts.must_reach_success(), target.must_reach_success()));
    Ok(Outcome { verdict, stats: source.lts.stats().merge(target.stats()) })
}

/// The translation never has more qubits than the source: equal counts
/// for every explored source configuration and its translation and for
/// every emulating target configuration, and no reachable target
/// configuration exceeds the largest source register.
pub fn check_register_size(src: &Config, o: &CheckOptions) -> Result<Outcome, CriteriaError> {
    let c = completeness(src, o)?;
    let mut verdict = Verdict::Holds;
    for (i, (s, t)) in c.source.lts.states.iter().zip(&c.source.enc).enumerate() {
        verdict = verdict.and(Verdict::from_bool(s.qubit_count() == t.rho.qubit_count(), || {
            let mut w = c.source.lts.witness_to(i);
            w.push(format!("source has {} qubits, its translation {}", s.qubit_count(), t.rho.qubit_count()));
            w
        }));
    }
    for m in &c.matched {
        let s = &c.source.lts.states[m.to];
        verdict = verdict.and(Verdict::from_bool(s.qubit_count() == m.target.rho.qubit_count(), || {
            let mut w = c.source.lts.witness_to(m.to);
            w.push(format!("emulated by {} with {} qubits", m.target, m.target.rho.qubit_count()));
            w
        }));
    }
    let largest = c.source.lts.states.iter().map(Config::qubit_count).max().unwrap_or(0);
    let target = explore_target(&c.source.enc[0], o, false)?;
    if let Some(i) = (0..target.states.len()).find(|&i| target.states[i].rho.qubit_count() > largest) {
        let mut w = target.witness_to(i);
        w.push(format!("target register exceeds the largest source register of {largest} qubits"));
        verdict = verdict.and(Verdict::fails(w));
    }
    let verdict = if c.verdict.is_fails() { verdict } else { verdict.and(c.verdict) };
    Ok(Outcome { verdict, stats: c.stats.merge(target.stats()) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cqp::parse_cqp;

    fn cfg(src: &str) -> Config {
        parse_cqp(src).unwrap()
    }

    #[test]
    fn nil_is_trivially_sound_and_complete() {
        let c = cfg("qubits q; state |0>; process 0");
        let o = CheckOptions::default();
        assert!(check_completeness(&c, &o).unwrap().verdict.holds());
        assert!(check_soundness(&c, &o).unwrap().verdict.holds());
        assert!(check_register_size(&c, &o).unwrap().verdict.holds());
        assert_eq!(check_soundness(&c, &o).unwrap().stats.states, 2);
    }

    #[test]
    fn measurement_under_parallel_needs_similarity() {
        let c = cfg("qubits q; state 1/sqrt(2)|0> + 1/sqrt(2)|1>; process (x := measure q).x![q].0 | (new y)0?[z].ok");
        let o = CheckOptions::default();
        assert!(check_completeness(&c, &o).unwrap().verdict.holds());
        assert!(check_soundness(&c, &o).unwrap().verdict.holds());
        assert!(check_divergence_reflection(&c, &o).unwrap().verdict.holds());
        assert!(check_success_sensitiveness(&c, &o).unwrap().verdict.holds());
    }

    #[test]
    fn qubit_allocation_grows_both_registers() {
        let c = cfg("qubits q; state |1>; process (qbit y){y *= H}.0");
        let o = CheckOptions::default();
        assert!(check_register_size(&c, &o).unwrap().verdict.holds());
        assert!(check_completeness(&c, &o).unwrap().verdict.holds());
    }

    #[test]
    fn ill_typed_sources_are_rejected() {
        let c = cfg("qubits q; state |0>; process c![q].0 | d![q].0");
        assert!(matches!(check_soundness(&c, &CheckOptions::default()), Err(CriteriaError::Precondition(_))));
    }
}
