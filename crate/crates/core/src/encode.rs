//! Translation of source configurations into target configurations.
//!
//! Names are translated to themselves. Channel creation becomes an internal
//! step followed by a restriction, a measurement becomes the unknown-outcome
//! measurement operator followed by a choice over the outcomes that can
//! occur, and the register state becomes its density matrix.

use crate::cqp::{self, Config};
use crate::qccs::{self, BoolExpr, Defs, OpRef, Program, QccsConfig, RhoSpec};
use crate::quantum::QuantumError;
use crate::SuperOperator;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EncodeError {
    #[error("measured qubits must be distinct, `{0}` repeats")]
    InvalidArity(String),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// Operator used by a translation, with the arity it is applied at.
#[derive(Debug, Clone, PartialEq)]
pub struct OpEntry {
    pub op: OpRef,
    pub arity: usize,
    pub operator: SuperOperator,
}

/// A translated configuration. The encoding introduces no process
/// constants, so `program.defs` is always empty.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingOutput {
    pub program: Program,
    pub op_table: Vec<OpEntry>,
}

impl EncodingOutput {
    pub fn config(&self) -> &QccsConfig {
        &self.program.config
    }

    pub fn defs(&self) -> &Defs {
        &self.program.defs
    }
}

/// Translates a process term.
pub fn encode_term(p: &cqp::Term) -> Result<qccs::Term, EncodeError> {
    use qccs::Term as T;
    Ok(match p {
        cqp::Term::Nil => T::Nil,
        cqp::Term::Success => T::Success,
        cqp::Term::Par(a, b) => T::par(encode_term(a)?, encode_term(b)?),
        cqp::Term::In { chan, var, body } => T::In { chan: chan.clone(), var: var.clone(), body: Box::new(encode_term(body)?) },
        cqp::Term::Out { chan, qubit, body } => {
            T::Out { chan: chan.clone(), qubit: qubit.clone(), body: Box::new(encode_term(body)?) }
        }
        cqp::Term::Trans { qubits, gate, body } => T::op(OpRef::Gate(*gate), qubits.clone(), encode_term(body)?),
        cqp::Term::Measure { qubits, var, body } => T::op(OpRef::Measure, qubits.clone(), enc_dist(qubits, var, &encode_term(body)?)?),
        cqp::Term::NewChan { var, body } => T::tau(T::restrict(vec![var.clone()], encode_term(body)?)),
        cqp::Term::NewQbit { var, body } => T::op(OpRef::New, vec![var.clone()], encode_term(body)?),
    })
}

/// Choice over the outcomes of measuring `qubits`: branch `i` is enabled
/// when outcome `i` has nonzero weight, projects onto it and continues as
/// `body{i/var}`. With no qubits the single branch is the identity.
pub fn enc_dist(qubits: &[String], var: &str, body: &qccs::Term) -> Result<qccs::Term, EncodeError> {
    let mut seen = BTreeSet::new();
    if let Some(q) = qubits.iter().find(|q| !seen.insert(q.as_str())) {
        return Err(EncodeError::InvalidArity(q.clone()));
    }
    let branch = |i: usize| qccs::Term::IfThen {
        cond: BoolExpr::TraceNonzero { op: OpRef::Expected(i), qubits: qubits.to_vec() },
        body: Box::new(qccs::Term::op(OpRef::Expected(i), qubits.to_vec(), body.subst1(var, &i.to_string()))),
    };
    let mut t = branch(0);
    for i in 1..(1usize << qubits.len()) {
        t = qccs::Term::choice(t, branch(i));
    }
    Ok(t)
}

/// Hides the system channels; no restriction when there are none.
fn restrict_phi(phi: &[String], body: qccs::Term) -> qccs::Term {
    if phi.is_empty() {
        body
    } else {
        qccs::Term::restrict(phi.to_vec(), body)
    }
}

/// Translates a configuration: the process restricted by the system's
/// channels, with the register state as a density matrix. A pending
/// distribution becomes the mixture of its cases with the outcome choice
/// in front of the process.
pub fn encode_config(c: &Config) -> Result<EncodingOutput, EncodeError> {
    let (term, rho_spec) = match c {
        Config::Pure(p) => (restrict_phi(&p.phi, encode_term(&p.term)?), RhoSpec::Outer(p.sigma.clone())),
        Config::Dist(d) => {
            let measured: Vec<String> = d.qubit_names()[..d.measured].to_vec();
            let body = enc_dist(&measured, &d.var, &encode_term(&d.term)?)?;
            let parts: Vec<(f64, crate::StateVector)> =
                d.cases.iter().filter_map(|k| k.state.clone().map(|s| (k.probability, s))).collect();
            (restrict_phi(&d.phi, body), RhoSpec::Mixture(parts))
        }
    };
    let op_table = op_table(&term)?;
    let program = Program::new(Defs::default(), rho_spec, term)?;
    Ok(EncodingOutput { program, op_table })
}

/// Operators a translated term uses, each with the arity it is applied at.
pub fn op_table(t: &qccs::Term) -> Result<Vec<OpEntry>, EncodeError> {
    fn collect(t: &qccs::Term, out: &mut BTreeMap<(OpRef, usize), ()>) {
        match t {
            qccs::Term::Op { op, qubits, .. } => {
                out.insert((op.clone(), qubits.len()), ());
            }
            qccs::Term::IfThen { cond: BoolExpr::TraceNonzero { op, qubits }, .. } => {
                out.insert((op.clone(), qubits.len()), ());
            }
            _ => {}
        }
        for c in t.children() {
            collect(c, out);
        }
    }
    let mut found = BTreeMap::new();
    collect(t, &mut found);
    let defs = Defs::default();
    found
        .into_keys()
        .map(|(op, arity)| {
            let operator = match &op {
                OpRef::New => SuperOperator::new_qubit(),
                other => defs.resolve(other, arity).map_err(|e| match e {
                    qccs::ResolveError::Quantum(q) => EncodeError::Quantum(q),
                    other => EncodeError::Quantum(QuantumError::InvalidRegister(other.to_string())),
                })?.into_owned(),
            };
            Ok(OpEntry { op, arity, operator })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cqp::parse_term;
    use crate::qccs::parse_qccs_term;

    fn enc(s: &str) -> qccs::Term {
        encode_term(&parse_term(s).unwrap()).unwrap()
    }

    #[test]
    fn nil_and_channel_creation() {
        assert_eq!(enc("0"), qccs::Term::Nil);
        assert_eq!(enc("(new x)x![q].0"), parse_qccs_term("tau.((x!q.nil) \\ {x})").unwrap());
    }

    #[test]
    fn measurement_becomes_guarded_choice() {
        let t = enc("(x := measure q).x![r].0");
        let want = parse_qccs_term(
            "M[q].(if tr(E{0}[q]) != 0 then E{0}[q].0!r.nil + if tr(E{1}[q]) != 0 then E{1}[q].1!r.nil)",
        )
        .unwrap();
        assert_eq!(t, want);
    }

    #[test]
    fn empty_distribution_is_identity() {
        let t = enc_dist(&[], "x", &qccs::Term::Success).unwrap();
        assert_eq!(t, parse_qccs_term("if tr(E{0}[]) != 0 then E{0}[].ok").unwrap());
        assert!(matches!(enc_dist(&["q".into(), "q".into()], "x", &qccs::Term::Nil), Err(EncodeError::InvalidArity(_))));
    }

    #[test]
    fn qubit_allocation_binds_the_variable() {
        assert_eq!(enc("(qbit y)c![y].0"), parse_qccs_term("new[y].c!y.nil").unwrap());
    }

    #[test]
    fn pure_config_restricts_by_channels() {
        let c = cqp::parse_cqp("qubits q; state |1>; process 0").unwrap();
        let out = encode_config(&c).unwrap();
        assert_eq!(out.config().term, qccs::Term::Nil);
        assert_eq!(out.config().rho.matrix().get(1, 1).re, 1.0);
        assert!(out.op_table.is_empty());
        let c = cqp::parse_cqp("qubits q; channels a; process a![q].0").unwrap();
        let t = encode_config(&c).unwrap().program.config.term;
        assert_eq!(t, qccs::Term::restrict(vec!["a".into()], parse_qccs_term("a!q.nil").unwrap()));
    }
}
