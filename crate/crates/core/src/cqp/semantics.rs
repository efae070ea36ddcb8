use super::config::{Config, DistCase, DistConfig, PureConfig};
use super::term::{Name, Term};
use crate::names::{fresh_channel_name, fresh_qubit_name, fresh_variant, natural_cmp};
use crate::quantum::Permutation;
use std::collections::HashSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Rule {
    Measure,
    Trans,
    Perm(Permutation),
    Prob(usize),
    New,
    Qbit,
    Comm,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Measure => f.write_str("R-Measure"),
            Rule::Trans => f.write_str("R-Trans"),
            Rule::Perm(p) => {
                let d: Vec<String> = p.as_slice().iter().map(|x| x.to_string()).collect();
                write!(f, "R-Perm({})", d.join(","))
            }
            Rule::Prob(j) => write!(f, "R-Prob({j})"),
            Rule::New => f.write_str("R-New"),
            Rule::Qbit => f.write_str("R-Qbit"),
            Rule::Comm => f.write_str("R-Comm"),
        }
    }
}

/// Which register permutations the stepper offers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PermMode {
    /// Brings the operands of an enabled transformation or measurement to
    /// the front, and restores the natural register order once no enabled
    /// operation has its operands in front.
    OnDemand,
    /// Exactly the listed permutations (those matching the register size).
    Explicit(Vec<Permutation>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOptions {
    pub perm_mode: PermMode,
    pub tolerance: f64,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions { perm_mode: PermMode::OnDemand, tolerance: crate::DEFAULT_TOLERANCE }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub rule: Rule,
    pub target: Config,
}

fn rebuild(comps: Vec<Term>) -> Term {
    Term::par_left(comps.into_iter().filter(|t| *t != Term::Nil).collect())
}

fn replace(comps: &[Term], i: usize, with: Term) -> Vec<Term> {
    let mut v = comps.to_vec();
    v[i] = with;
    v
}

/// Operands of a transformation or measurement that can fire once they are
/// in front: distinct register qubits of the right number.
fn operands(t: &Term, names: &[String]) -> Option<Vec<Name>> {
    let (qubits, arity) = match t {
        Term::Trans { qubits, gate, .. } => (qubits, Some(gate.arity())),
        Term::Measure { qubits, .. } => (qubits, None),
        _ => return None,
    };
    if qubits.is_empty() || arity.is_some_and(|a| a != qubits.len()) {
        return None;
    }
    let distinct: HashSet<&Name> = qubits.iter().collect();
    if distinct.len() != qubits.len() || !qubits.iter().all(|q| names.contains(q)) {
        return None;
    }
    Some(qubits.clone())
}

/// All single reductions of a configuration, closed under parallel
/// composition and structural congruence.
pub fn enumerate_steps(c: &Config, opts: &StepOptions) -> Vec<Step> {
    match c {
        Config::Dist(d) => d
            .cases
            .iter()
            .enumerate()
            .filter(|(_, case)| case.probability > opts.tolerance && case.state.is_some())
            .filter_map(|(j, _)| d.branch(j).map(|p| Step { rule: Rule::Prob(j), target: Config::Pure(p) }))
            .collect(),
        Config::Pure(p) => pure_steps(p, opts),
    }
}

fn pure_steps(p: &PureConfig, opts: &StepOptions) -> Vec<Step> {
    let comps: Vec<Term> = p.term.components().into_iter().cloned().collect();
    let names = p.sigma.names();
    let mut steps = Vec::new();
    let mut fronting: Vec<Vec<Name>> = Vec::new();
    let mut any_in_front = false;
    let free_elsewhere = |i: usize| -> HashSet<Name> {
        comps.iter().enumerate().filter(|(j, _)| *j != i).flat_map(|(_, t)| t.free_names()).collect()
    };

    for (i, comp) in comps.iter().enumerate() {
        match comp {
            Term::NewChan { var, body } => {
                let mut used: HashSet<Name> = free_elsewhere(i);
                used.extend(p.phi.iter().cloned());
                used.extend(names.iter().cloned());
                let chan = if used.contains(var) {
                    body.all_names(&mut used);
                    fresh_channel_name(&used)
                } else {
                    var.clone()
                };
                let mut phi = p.phi.clone();
                phi.push(chan.clone());
                let term = rebuild(replace(&comps, i, body.subst1(var, &chan)));
                steps.push(Step { rule: Rule::New, target: Config::pure(p.sigma.clone(), phi, term) });
            }
            Term::NewQbit { var, body } => {
                let q = fresh_qubit_name(names);
                let sigma = p.sigma.append_zero(&q).expect("fresh qubit name");
                let term = rebuild(replace(&comps, i, body.subst1(var, &q)));
                steps.push(Step { rule: Rule::Qbit, target: Config::pure(sigma, p.phi.clone(), term) });
            }
            Term::Trans { gate, body, .. } => {
                let Some(qs) = operands(comp, names) else { continue };
                if names[..qs.len()] == qs[..] {
                    any_in_front = true;
                    let sigma = p.sigma.apply_unitary_prefix(&gate.matrix()).expect("arity checked");
                    let term = rebuild(replace(&comps, i, (**body).clone()));
                    steps.push(Step { rule: Rule::Trans, target: Config::pure(sigma, p.phi.clone(), term) });
                } else {
                    fronting.push(qs);
                }
            }
            Term::Measure { var, body, .. } => {
                let Some(qs) = operands(comp, names) else { continue };
                if names[..qs.len()] != qs[..] {
                    fronting.push(qs);
                    continue;
                }
                any_in_front = true;
                let others = free_elsewhere(i);
                let (var, body) = if others.contains(var) {
                    let mut used = others.clone();
                    body.all_names(&mut used);
                    let fresh = fresh_variant(var, &used);
                    (fresh.clone(), body.subst1(var, &fresh))
                } else {
                    (var.clone(), (**body).clone())
                };
                let outcomes = p.sigma.measure_prefix(qs.len(), opts.tolerance).expect("operands in register");
                let cases = outcomes.into_iter().map(|o| DistCase { probability: o.probability, state: o.post_state }).collect();
                let term = rebuild(replace(&comps, i, body));
                steps.push(Step {
                    rule: Rule::Measure,
                    target: Config::Dist(DistConfig { cases, measured: qs.len(), var, phi: p.phi.clone(), term }),
                });
            }
            Term::Out { chan, qubit, body } => {
                for (j, other) in comps.iter().enumerate() {
                    if let Term::In { chan: c2, var, body: b2 } = other {
                        if j != i && c2 == chan {
                            let mut next = replace(&comps, i, (**body).clone());
                            next[j] = b2.subst1(var, qubit);
                            steps.push(Step { rule: Rule::Comm, target: Config::pure(p.sigma.clone(), p.phi.clone(), rebuild(next)) });
                        }
                    }
                }
            }
            _ => {}
        }
    }

    let mut perms: Vec<Permutation> = Vec::new();
    match &opts.perm_mode {
        PermMode::OnDemand => {
            for qs in &fronting {
                let mut sources: Vec<usize> = qs.iter().map(|q| names.iter().position(|n| n == q).unwrap()).collect();
                sources.extend((0..names.len()).filter(|k| !qs.contains(&names[*k])));
                perms.push(Permutation::from_sources(&sources).expect("bijection"));
            }
            let mut home = names.to_vec();
            home.sort_by(|a, b| natural_cmp(a, b));
            if !any_in_front && home != names {
                let sources: Vec<usize> = home.iter().map(|h| names.iter().position(|n| n == h).unwrap()).collect();
                perms.push(Permutation::from_sources(&sources).expect("bijection"));
            }
        }
        PermMode::Explicit(list) => perms.extend(list.iter().filter(|q| q.len() == names.len()).cloned()),
    }
    let mut seen = HashSet::new();
    for perm in perms {
        if !seen.insert(perm.clone()) {
            continue;
        }
        let sigma = p.sigma.permute(&perm).expect("length checked");
        steps.push(Step { rule: Rule::Perm(perm), target: Config::pure(sigma, p.phi.clone(), p.term.clone()) });
    }
    steps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cqp::parse::{parse_cqp, parse_term};
    use crate::StateVector;

    fn pure(names: &[&str], bits: &[bool], phi: &[&str], term: &str) -> Config {
        Config::pure(
            StateVector::basis(names.iter().map(|s| s.to_string()).collect(), bits).unwrap(),
            phi.iter().map(|s| s.to_string()).collect(),
            parse_term(term).unwrap(),
        )
    }

    #[test]
    fn nil_has_no_steps() {
        let c = pure(&["q0"], &[false], &[], "0");
        assert!(enumerate_steps(&c, &StepOptions::default()).is_empty());
    }

    #[test]
    fn communication_substitutes_the_payload() {
        let c = pure(&["q"], &[false], &["c"], "c![q].0 | c?[x].{x *= X}.0");
        let steps = enumerate_steps(&c, &StepOptions::default());
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0].rule, Rule::Comm);
        assert_eq!(steps[0].target.term().to_string(), "{q *= X}.0");
    }

    #[test]
    fn new_channel_keeps_a_fresh_binder_name() {
        let c = pure(&["q"], &[false], &[], "(new 0)0![q].0");
        let steps = enumerate_steps(&c, &StepOptions::default());
        assert_eq!(steps[0].target.phi(), &["0"]);
        let clash = pure(&["q"], &[false], &["c"], "(new c)c![q].0");
        let steps = enumerate_steps(&clash, &StepOptions::default());
        assert_eq!(steps[0].target.phi(), &["c", "#ch0"]);
        assert_eq!(steps[0].target.term().to_string(), "#ch0![q].0");
    }

    #[test]
    fn new_qubit_appends_ground_state() {
        let c = pure(&["q0"], &[true], &[], "(qbit x){x *= X}.0");
        let steps = enumerate_steps(&c, &StepOptions::default());
        let Config::Pure(p) = &steps[0].target else { panic!() };
        assert_eq!(p.sigma.names(), &["q0", "q1"]);
        assert_eq!(p.term.to_string(), "{q1 *= X}.0");
    }

    #[test]
    fn operands_out_of_front_require_a_permutation() {
        let c = pure(&["q0", "q1"], &[false, false], &[], "{q1 *= X}.0");
        let steps = enumerate_steps(&c, &StepOptions::default());
        assert_eq!(steps.len(), 1);
        let Rule::Perm(ref perm) = steps[0].rule else { panic!("{:?}", steps[0].rule) };
        let after = &steps[0].target;
        assert_eq!(after.qubit_names(), &["q1", "q0"]);
        let fired = enumerate_steps(after, &StepOptions::default());
        assert_eq!(fired.len(), 1);
        assert_eq!(fired[0].rule, Rule::Trans);
        let restored = enumerate_steps(&fired[0].target, &StepOptions::default());
        assert_eq!(restored.len(), 1);
        assert_eq!(restored[0].rule, Rule::Perm(perm.inverse()));
        let Config::Pure(p) = &restored[0].target else { panic!() };
        assert!(p.sigma.approx_eq(&StateVector::basis(vec!["q0".into(), "q1".into()], &[false, true]).unwrap(), 1e-12));
    }

    #[test]
    fn explicit_mode_offers_only_given_permutations() {
        let c = pure(&["q0", "q1"], &[false, false], &[], "{q1 *= X}.0");
        let swap = Permutation::new(vec![1, 0]).unwrap();
        let opts = StepOptions { perm_mode: PermMode::Explicit(vec![swap.clone(), Permutation::identity(3)]), ..Default::default() };
        let steps = enumerate_steps(&c, &opts);
        assert_eq!(steps.iter().map(|s| s.rule.clone()).collect::<Vec<_>>(), vec![Rule::Perm(swap)]);
    }

    #[test]
    fn measurement_yields_a_distribution_then_branches() {
        let c = parse_cqp("qubits q; state 1/sqrt(2)|0> + 1/sqrt(2)|1>; process (x := measure q).x![q].0").unwrap();
        let steps = enumerate_steps(&c, &StepOptions::default());
        assert_eq!(steps[0].rule, Rule::Measure);
        let Config::Dist(d) = &steps[0].target else { panic!() };
        assert_eq!(d.cases.len(), 2);
        let branches = enumerate_steps(&steps[0].target, &StepOptions::default());
        assert_eq!(branches.len(), 2);
        assert_eq!(branches[1].rule, Rule::Prob(1));
        assert_eq!(branches[1].target.term().to_string(), "1![q].0");
    }

    #[test]
    fn zero_probability_branches_are_skipped() {
        let c = pure(&["q"], &[true], &[], "(x := measure q).0");
        let dist = &enumerate_steps(&c, &StepOptions::default())[0].target;
        let branches = enumerate_steps(dist, &StepOptions::default());
        assert_eq!(branches.len(), 1);
        assert_eq!(branches[0].rule, Rule::Prob(1));
    }

    #[test]
    fn measurement_variable_is_renamed_away_from_neighbours() {
        let c = pure(&["q"], &[false], &["x"], "(x := measure q).x![q].0 | x?[y].0");
        let Config::Dist(d) = &enumerate_steps(&c, &StepOptions::default())[0].target else { panic!() };
        assert_ne!(d.var, "x");
        assert!(d.term.free_names().contains("x"));
    }
}
