use super::config::Config;
use super::term::{Name, Term};
use crate::names::is_integer_literal;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Type {
    Int,
    Qbit,
    /// Channel carrying qubits.
    Chan,
    /// Unitary on `n` qubits.
    Op(usize),
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => f.write_str("Int"),
            Type::Qbit => f.write_str("Qbit"),
            Type::Chan => f.write_str("Chan[Qbit]"),
            Type::Op(n) => write!(f, "Op({n})"),
        }
    }
}

pub type TypeEnv = BTreeMap<Name, Type>;

/// `at` is the offending subterm, abbreviated.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("qubit `{qubit}` is used on both sides of a parallel composition in `{at}`")]
    SharedQubit { qubit: Name, at: String },
    #[error("unknown name `{name}` in `{at}`")]
    UnknownName { name: Name, at: String },
    #[error("`{op}` acts on {expected} qubits but is given {found} in `{at}`")]
    ArityMismatch { op: String, expected: usize, found: usize, at: String },
    #[error("qubit `{qubit}` appears twice among the arguments of `{at}`")]
    DuplicateQubitArg { qubit: Name, at: String },
    #[error("qubit `{name}` is not in the register, in `{at}`")]
    UnknownQubitName { name: Name, at: String },
    #[error("`{name}` has type {found} where {expected} is required, in `{at}`")]
    TypeMismatch { name: Name, expected: String, found: Type, at: String },
}

fn abbreviate(t: &Term) -> String {
    let s = t.to_string();
    if s.chars().count() > 60 {
        let cut: String = s.chars().take(57).collect();
        format!("{cut}...")
    } else {
        s
    }
}

struct Checker {
    /// Register names in the internal system; `None` for the surface one.
    register: Option<BTreeSet<Name>>,
}

impl Checker {
    fn lookup(&self, env: &TypeEnv, n: &str) -> Option<Type> {
        env.get(n).copied().or_else(|| is_integer_literal(n).then_some(Type::Int))
    }

    fn qubit(&self, env: &TypeEnv, n: &Name, at: &Term) -> Result<(), TypeError> {
        match self.lookup(env, n) {
            Some(Type::Qbit) => Ok(()),
            Some(found) => Err(TypeError::TypeMismatch { name: n.clone(), expected: "Qbit".into(), found, at: abbreviate(at) }),
            None => match &self.register {
                Some(reg) if !reg.contains(n) => Err(TypeError::UnknownQubitName { name: n.clone(), at: abbreviate(at) }),
                _ => Err(TypeError::UnknownName { name: n.clone(), at: abbreviate(at) }),
            },
        }
    }

    /// Measurement results are integers and integers name channels, so a
    /// channel position accepts `Chan` and `Int`.
    fn channel(&self, env: &TypeEnv, n: &Name, at: &Term) -> Result<(), TypeError> {
        match self.lookup(env, n) {
            Some(Type::Chan | Type::Int) => Ok(()),
            Some(found) => {
                Err(TypeError::TypeMismatch { name: n.clone(), expected: "Chan[Qbit]".into(), found, at: abbreviate(at) })
            }
            None => Err(TypeError::UnknownName { name: n.clone(), at: abbreviate(at) }),
        }
    }

    fn operands(&self, env: &TypeEnv, qs: &[Name], at: &Term) -> Result<(), TypeError> {
        for (i, q) in qs.iter().enumerate() {
            if qs[..i].contains(q) {
                return Err(TypeError::DuplicateQubitArg { qubit: q.clone(), at: abbreviate(at) });
            }
            self.qubit(env, q, at)?;
        }
        Ok(())
    }

    fn owned_qubits(&self, env: &TypeEnv, t: &Term) -> BTreeSet<Name> {
        t.free_names().into_iter().filter(|n| self.lookup(env, n) == Some(Type::Qbit)).collect()
    }

    fn check(&self, env: &TypeEnv, t: &Term) -> Result<(), TypeError> {
        match t {
            Term::Nil | Term::Success => Ok(()),
            Term::Par(a, b) => {
                let left = self.owned_qubits(env, a);
                if let Some(q) = self.owned_qubits(env, b).intersection(&left).next() {
                    return Err(TypeError::SharedQubit { qubit: q.clone(), at: abbreviate(t) });
                }
                self.check(env, a)?;
                self.check(env, b)
            }
            Term::In { chan, var, body } => {
                self.channel(env, chan, t)?;
                let mut inner = env.clone();
                inner.insert(var.clone(), Type::Qbit);
                self.check(&inner, body)
            }
            Term::Out { chan, qubit, body } => {
                self.channel(env, chan, t)?;
                self.qubit(env, qubit, t)?;
                let mut inner = env.clone();
                inner.remove(qubit);
                self.check(&inner, body)
            }
            Term::Trans { qubits, gate, body } => {
                if qubits.len() != gate.arity() {
                    return Err(TypeError::ArityMismatch {
                        op: gate.name().into(),
                        expected: gate.arity(),
                        found: qubits.len(),
                        at: abbreviate(t),
                    });
                }
                self.operands(env, qubits, t)?;
                self.check(env, body)
            }
            Term::Measure { qubits, var, body } => {
                self.operands(env, qubits, t)?;
                let mut inner = env.clone();
                inner.insert(var.clone(), Type::Int);
                self.check(&inner, body)
            }
            Term::NewChan { var, body } => {
                let mut inner = env.clone();
                inner.insert(var.clone(), Type::Chan);
                self.check(&inner, body)
            }
            Term::NewQbit { var, body } => {
                let mut inner = env.clone();
                inner.insert(var.clone(), Type::Qbit);
                self.check(&inner, body)
            }
        }
    }
}

/// Surface judgement `Gamma |- P`: qubits are linear, parallel components
/// own disjoint qubits and a sent qubit is gone from the continuation.
pub fn typecheck(term: &Term, env: &TypeEnv) -> Result<(), TypeError> {
    Checker { register: None }.check(env, term)
}

/// Internal judgement `Gamma; Sigma; Phi |- P` where qubit references may
/// be register names.
pub fn typecheck_internal(term: &Term, gamma: &TypeEnv, register: &[Name], phi: &[Name]) -> Result<(), TypeError> {
    let mut env = gamma.clone();
    for c in phi {
        env.insert(c.clone(), Type::Chan);
    }
    for q in register {
        env.insert(q.clone(), Type::Qbit);
    }
    Checker { register: Some(register.iter().cloned().collect()) }.check(&env, term)
}

/// Internal well-typedness of a configuration; a distribution's stored
/// process is checked with its result variable as an `Int`.
pub fn typecheck_config(c: &Config) -> Result<(), TypeError> {
    let mut gamma = TypeEnv::new();
    if let Config::Dist(d) = c {
        gamma.insert(d.var.clone(), Type::Int);
    }
    typecheck_internal(c.term(), &gamma, c.qubit_names(), c.phi())
}
