use super::program::{Defs, QccsConfig, ResolveError};
use super::term::{BoolExpr, Name, OpRef, Term};
use crate::names::fresh_qubit_name;
use crate::quantum::QuantumError;
use crate::DensityMatrix;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Transition labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Tau,
    In(Name, Name),
    Out(Name, Name),
}

impl Label {
    pub fn channel(&self) -> Option<&Name> {
        match self {
            Label::Tau => None,
            Label::In(c, _) | Label::Out(c, _) => Some(c),
        }
    }

    pub fn is_tau(&self) -> bool {
        *self == Label::Tau
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Tau => f.write_str("tau"),
            Label::In(c, q) => write!(f, "{c}?{q}"),
            Label::Out(c, q) => write!(f, "{c}!{q}"),
        }
    }
}

/// One labelled transition. `via_choice` records that the derivation
/// resolved a choice; `rule` names the axiom at its leaf (or `Comm`).
#[derive(Debug, Clone, PartialEq)]
pub struct QStep {
    pub label: Label,
    pub target: QccsConfig,
    pub via_choice: bool,
    pub rule: &'static str,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemanticsError {
    #[error("operator application failed in `{subterm}`: {source}")]
    Operator { subterm: String, source: ResolveError },
    #[error("guard `{guard}` could not be evaluated: {source}")]
    Guard { guard: String, source: QuantumError },
    #[error("unknown process constant `{0}`")]
    UnknownConstant(String),
}

/// Unfolding depth beyond which a constant is treated as stuck.
pub const MAX_UNFOLD: usize = 32;

struct Partial {
    label: Label,
    term: Term,
    rho: Option<DensityMatrix>,
    via_choice: bool,
    rule: &'static str,
}

struct Ctx<'a> {
    defs: &'a Defs,
    rho: &'a DensityMatrix,
    tol: f64,
    /// Values an input may receive: register qubits, then non-register
    /// names that the configuration itself sends.
    payloads: Vec<Name>,
}

fn collect_sent(t: &Term, out: &mut BTreeSet<Name>) {
    if let Term::Out { qubit, .. } = t {
        out.insert(qubit.clone());
    }
    for c in t.children() {
        collect_sent(c, out);
    }
}

fn payloads(t: &Term, rho: &DensityMatrix) -> Vec<Name> {
    let mut sent = BTreeSet::new();
    collect_sent(t, &mut sent);
    let free = t.free_names();
    let mut out = rho.names().to_vec();
    out.extend(sent.into_iter().filter(|n| free.contains(n) && !rho.names().contains(n)));
    out
}

/// Evaluates a guard against the current state. A trace guard holds when
/// the unnormalised branch has trace of magnitude above `tol`.
pub fn eval_bool(b: &BoolExpr, rho: &DensityMatrix, defs: &Defs, tol: f64) -> Result<bool, SemanticsError> {
    match b {
        BoolExpr::True => Ok(true),
        BoolExpr::False => Ok(false),
        BoolExpr::Not(x) => Ok(!eval_bool(x, rho, defs, tol)?),
        BoolExpr::And(x, y) => Ok(eval_bool(x, rho, defs, tol)? && eval_bool(y, rho, defs, tol)?),
        BoolExpr::TraceNonzero { op, qubits } => {
            let guard = || b.to_string();
            let so = defs.resolve(op, qubits.len()).map_err(|e| match e {
                ResolveError::Quantum(q) => SemanticsError::Guard { guard: guard(), source: q },
                other => SemanticsError::Guard { guard: guard(), source: QuantumError::InvalidRegister(other.to_string()) },
            })?;
            let tr = so.branch_trace(qubits, rho).map_err(|e| SemanticsError::Guard { guard: guard(), source: e })?;
            Ok(tr.abs() > tol)
        }
    }
}

/// Unfolds a constant application with its parameters instantiated.
pub fn unfold(defs: &Defs, name: &str, args: &[Name]) -> Result<Term, SemanticsError> {
    let d = defs.procs.get(name).ok_or_else(|| SemanticsError::UnknownConstant(name.to_string()))?;
    let map: BTreeMap<Name, Name> = d.params.iter().cloned().zip(args.iter().cloned()).collect();
    Ok(d.body.subst(&map))
}

fn steps(t: &Term, cx: &Ctx<'_>, depth: usize) -> Result<Vec<Partial>, SemanticsError> {
    let leaf = |label, term, rule| Partial { label, term, rho: None, via_choice: false, rule };
    Ok(match t {
        Term::Nil | Term::Success => Vec::new(),
        Term::Tau(b) => vec![leaf(Label::Tau, (**b).clone(), "Tau")],
        Term::Op { op: OpRef::New, qubits, body } => {
            let fresh = fresh_qubit_name(cx.rho.names());
            let rho = cx.rho.extend_zero(&fresh).map_err(|e| SemanticsError::Operator {
                subterm: t.to_string(),
                source: ResolveError::Quantum(e),
            })?;
            let body = body.subst1(&qubits[0], &fresh);
            vec![Partial { label: Label::Tau, term: body, rho: Some(rho), via_choice: false, rule: "Oper" }]
        }
        Term::Op { op, qubits, body } => {
            let err = |source| SemanticsError::Operator { subterm: t.to_string(), source };
            let so = cx.defs.resolve(op, qubits.len()).map_err(err)?;
            match so.apply(qubits, cx.rho, cx.tol) {
                Ok(rho) => vec![Partial { label: Label::Tau, term: (**body).clone(), rho: Some(rho), via_choice: false, rule: "Oper" }],
                Err(QuantumError::ZeroBranch(_)) => Vec::new(),
                Err(e) => return Err(err(ResolveError::Quantum(e))),
            }
        }
        Term::In { chan, var, body } => {
            let fq = t.free_qubits();
            cx.payloads
                .iter()
                .filter(|q| !fq.contains(*q))
                .map(|q| leaf(Label::In(chan.clone(), q.clone()), body.subst1(var, q), "Input"))
                .collect()
        }
        Term::Out { chan, qubit, body } => vec![leaf(Label::Out(chan.clone(), qubit.clone()), (**body).clone(), "Output")],
        Term::Choice(a, b) => {
            let mut v = steps(a, cx, depth)?;
            v.extend(steps(b, cx, depth)?);
            for s in &mut v {
                s.via_choice = true;
            }
            v
        }
        Term::IfThen { cond, body } => {
            if eval_bool(cond, cx.rho, cx.defs, cx.tol)? {
                steps(body, cx, depth)?
            } else {
                Vec::new()
            }
        }
        Term::Call { name, args } => {
            if depth >= MAX_UNFOLD {
                Vec::new()
            } else {
                steps(&unfold(cx.defs, name, args)?, cx, depth + 1)?
            }
        }
        Term::Restrict { chans, body } => steps(body, cx, depth)?
            .into_iter()
            .filter(|s| s.label.channel().is_none_or(|c| !chans.contains(c)))
            .map(|s| Partial { term: Term::restrict(chans.clone(), s.term), ..s })
            .collect(),
        Term::Par(a, b) => {
            let sa = steps(a, cx, depth)?;
            let sb = steps(b, cx, depth)?;
            let fa = a.free_qubits();
            let fb = b.free_qubits();
            let mut out = Vec::new();
            for s in &sa {
                if let Label::In(_, q) = &s.label {
                    if fb.contains(q) {
                        continue;
                    }
                }
                out.push(Partial { term: Term::par(s.term.clone(), (**b).clone()), rho: s.rho.clone(), label: s.label.clone(), ..*s });
            }
            for s in &sb {
                if let Label::In(_, q) = &s.label {
                    if fa.contains(q) {
                        continue;
                    }
                }
                out.push(Partial { term: Term::par((**a).clone(), s.term.clone()), rho: s.rho.clone(), label: s.label.clone(), ..*s });
            }
            for (x, y, left_sends) in sa.iter().flat_map(|x| sb.iter().map(move |y| (x, y, true))).chain(
                sb.iter().flat_map(|y| sa.iter().map(move |x| (x, y, false))),
            ) {
                let (send, recv) = if left_sends { (&x.label, &y.label) } else { (&y.label, &x.label) };
                if let (Label::Out(c, q), Label::In(d, r)) = (send, recv) {
                    if c == d && q == r {
                        out.push(Partial {
                            label: Label::Tau,
                            term: Term::par(x.term.clone(), y.term.clone()),
                            rho: None,
                            via_choice: x.via_choice || y.via_choice,
                            rule: "Comm",
                        });
                    }
                }
            }
            out
        }
    })
}

/// All labelled transitions of a configuration. Inputs range over the
/// qubits of the state that the receiver does not already own, and over
/// free non-register names sent somewhere in the configuration.
pub fn lts_steps(c: &QccsConfig, defs: &Defs, tol: f64) -> Result<Vec<QStep>, SemanticsError> {
    let cx = Ctx { defs, rho: &c.rho, tol, payloads: payloads(&c.term, &c.rho) };
    Ok(steps(&c.term, &cx, 0)?
        .into_iter()
        .map(|p| QStep {
            label: p.label,
            target: QccsConfig { term: p.term, rho: p.rho.unwrap_or_else(|| c.rho.clone()) },
            via_choice: p.via_choice,
            rule: p.rule,
        })
        .collect())
}

/// Internal transitions only.
pub fn reduce_steps(c: &QccsConfig, defs: &Defs, tol: f64) -> Result<Vec<QStep>, SemanticsError> {
    Ok(lts_steps(c, defs, tol)?.into_iter().filter(|s| s.label.is_tau()).collect())
}

/// Success barb: an unguarded `ok`, unfolding constants up to the usual
/// depth.
pub fn has_success(t: &Term, defs: &Defs) -> bool {
    fn go(t: &Term, defs: &Defs, depth: usize) -> bool {
        match t {
            Term::Success => true,
            Term::Par(a, b) | Term::Choice(a, b) => go(a, defs, depth) || go(b, defs, depth),
            Term::Restrict { body, .. } => go(body, defs, depth),
            Term::Call { name, args } if depth < MAX_UNFOLD => {
                unfold(defs, name, args).is_ok_and(|b| go(&b, defs, depth + 1))
            }
            _ => false,
        }
    }
    go(t, defs, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qccs::{parse_qccs, parse_qccs_term};
    use crate::{StateVector, DEFAULT_TOLERANCE as TOL};

    fn cfg(term: &str, names: &[&str], bits: &[bool]) -> QccsConfig {
        let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        QccsConfig { term: parse_qccs_term(term).unwrap(), rho: StateVector::basis(names, bits).unwrap().outer() }
    }

    #[test]
    fn tau_prefix_steps_once() {
        let c = cfg("tau.ok", &["q"], &[false]);
        let s = lts_steps(&c, &Defs::default(), TOL).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].label, Label::Tau);
        assert_eq!(s[0].target.term, Term::Success);
        assert_eq!(s[0].target.rho, c.rho);
    }

    #[test]
    fn measurement_dephases_plus() {
        let plus = StateVector::normalized(vec!["q".into()], vec![1.0.into(), 1.0.into()]).unwrap();
        let c = QccsConfig { term: parse_qccs_term("M[q].nil").unwrap(), rho: plus.outer() };
        let s = lts_steps(&c, &Defs::default(), TOL).unwrap();
        assert_eq!(s.len(), 1);
        let m = s[0].target.rho.matrix();
        assert!((m.get(0, 0).re - 0.5).abs() < TOL && (m.get(1, 1).re - 0.5).abs() < TOL);
        assert!(m.get(0, 1).norm() < TOL);
    }

    #[test]
    fn non_register_names_can_be_passed() {
        let c = cfg("(c!a.nil | c?y.X[q].ok) \\ {c}", &["q"], &[false]);
        let s = reduce_steps(&c, &Defs::default(), TOL).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].rule, "Comm");
        let bound = cfg("c?y.d!y.nil", &["q"], &[false]);
        let labels: Vec<Label> = lts_steps(&bound, &Defs::default(), TOL).unwrap().into_iter().map(|s| s.label).collect();
        assert_eq!(labels, [Label::In("c".into(), "q".into())]);
    }

    #[test]
    fn communication_synchronises_and_substitutes() {
        let c = cfg("c!q.nil | c?x.H[x].nil", &["q", "r"], &[false, false]);
        let s = lts_steps(&c, &Defs::default(), TOL).unwrap();
        let comm: Vec<_> = s.iter().filter(|s| s.rule == "Comm").collect();
        assert_eq!(comm.len(), 1);
        assert_eq!(comm[0].target.term, parse_qccs_term("nil | H[q].nil").unwrap());
        // The receiver may also input r from the environment, but not q,
        // which the sender still owns.
        let inputs: Vec<_> = s.iter().filter(|s| matches!(s.label, Label::In(..))).map(|s| s.label.to_string()).collect();
        assert_eq!(inputs, vec!["c?r"]);
    }

    #[test]
    fn restriction_hides_labels_but_allows_communication() {
        let c = cfg("(c!q.nil | c?x.nil) \\ {c}", &["q"], &[false]);
        let s = lts_steps(&c, &Defs::default(), TOL).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].label, Label::Tau);
    }

    #[test]
    fn guards_read_the_current_state() {
        let c = cfg("if tr(E{0}[q]) != 0 then tau.ok + if tr(E{1}[q]) != 0 then tau.nil", &["q"], &[false]);
        let s = lts_steps(&c, &Defs::default(), TOL).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s[0].via_choice);
        assert_eq!(s[0].target.term, Term::Success);
        let b = BoolExpr::TraceNonzero { op: OpRef::Expected(1), qubits: vec!["q".into()] };
        assert!(!eval_bool(&b, &c.rho, &Defs::default(), TOL).unwrap());
        assert!(eval_bool(&BoolExpr::True, &c.rho, &Defs::default(), TOL).unwrap());
    }

    #[test]
    fn recursive_constants_unfold_lazily() {
        let p = parse_qccs("def A(x) = tau.A(x);\nstate qubits q; rho = outer(|0>);\nprocess A(q)").unwrap();
        let s = reduce_steps(&p.config, &p.defs, TOL).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].target.term, p.config.term);
        let p = parse_qccs("def B(x) = B(x);\nprocess B(q)").unwrap();
        assert!(reduce_steps(&p.config, &p.defs, TOL).unwrap().is_empty());
    }

    #[test]
    fn new_allocates_a_fresh_zero_qubit() {
        let c = cfg("new[x].c!x.nil", &["q0"], &[true]);
        let s = lts_steps(&c, &Defs::default(), TOL).unwrap();
        assert_eq!(s[0].target.rho.names(), &["q0".to_string(), "q1".to_string()]);
        assert_eq!(s[0].target.term, parse_qccs_term("c!q1.nil").unwrap());
    }

    #[test]
    fn barbs_ignore_guarded_success() {
        let d = Defs::default();
        assert!(has_success(&parse_qccs_term("ok + tau.nil").unwrap(), &d));
        assert!(!has_success(&parse_qccs_term("if true then ok").unwrap(), &d));
        assert!(!has_success(&parse_qccs_term("c?x.ok").unwrap(), &d));
        assert!(has_success(&parse_qccs_term("(nil | ok) \\ {c}").unwrap(), &d));
    }
}
