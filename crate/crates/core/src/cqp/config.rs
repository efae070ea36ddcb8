use super::term::{Name, Term};
use crate::quantum::QuantumError;
use crate::StateVector;
use std::collections::BTreeMap;
use std::fmt;

/// `(sigma; phi; P)`: register state, channels in the system, process.
#[derive(Debug, Clone, PartialEq)]
pub struct PureConfig {
    pub sigma: StateVector,
    pub phi: Vec<Name>,
    pub term: Term,
}

/// One outcome of a pending measurement; `state` is `None` when the
/// outcome has zero probability.
#[derive(Debug, Clone, PartialEq)]
pub struct DistCase {
    pub probability: f64,
    pub state: Option<StateVector>,
}

/// Probability distribution over `2^measured` outcomes of a measurement of
/// the first `measured` qubits. The process is stored once; case `i` runs
/// `term{i/var}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistConfig {
    pub cases: Vec<DistCase>,
    pub measured: usize,
    pub var: Name,
    pub phi: Vec<Name>,
    pub term: Term,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Config {
    Pure(PureConfig),
    Dist(DistConfig),
}

impl DistConfig {
    /// The configuration case `j` resolves to, if it has nonzero weight.
    pub fn branch(&self, j: usize) -> Option<PureConfig> {
        let case = self.cases.get(j)?;
        let sigma = case.state.clone()?;
        Some(PureConfig { sigma, phi: self.phi.clone(), term: self.term.subst1(&self.var, &j.to_string()) })
    }

    /// Register names; every populated case shares them.
    pub fn qubit_names(&self) -> &[String] {
        self.cases.iter().find_map(|c| c.state.as_ref()).map(|s| s.names()).unwrap_or(&[])
    }
}

impl Config {
    pub fn pure(sigma: StateVector, phi: Vec<Name>, term: Term) -> Config {
        Config::Pure(PureConfig { sigma, phi, term })
    }

    pub fn term(&self) -> &Term {
        match self {
            Config::Pure(p) => &p.term,
            Config::Dist(d) => &d.term,
        }
    }

    pub fn phi(&self) -> &[Name] {
        match self {
            Config::Pure(p) => &p.phi,
            Config::Dist(d) => &d.phi,
        }
    }

    pub fn qubit_names(&self) -> &[String] {
        match self {
            Config::Pure(p) => p.sigma.names(),
            Config::Dist(d) => d.qubit_names(),
        }
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_names().len()
    }

    /// Unguarded success. In a distribution the stored process is shared by
    /// all cases and substitution cannot change its top level, so the
    /// answer holds for every case.
    pub fn has_success(&self) -> bool {
        self.term().has_success()
    }

    /// Renames free identifiers of the process, the channel list and the
    /// register. Qubit renaming must stay injective on the register.
    pub fn rename(&self, map: &BTreeMap<Name, Name>) -> Result<Config, QuantumError> {
        let phi: Vec<Name> = self.phi().iter().map(|c| map.get(c).unwrap_or(c).clone()).collect();
        Ok(match self {
            Config::Pure(p) => Config::pure(p.sigma.rename(map)?, phi, p.term.subst(map)),
            Config::Dist(d) => {
                let wrapped = Term::Measure { qubits: vec![], var: d.var.clone(), body: Box::new(d.term.clone()) };
                let (var, term) = match wrapped.subst(map) {
                    Term::Measure { var, body, .. } => (var, *body),
                    _ => unreachable!(),
                };
                let cases = d
                    .cases
                    .iter()
                    .map(|c| Ok(DistCase { probability: c.probability, state: c.state.as_ref().map(|s| s.rename(map)).transpose()? }))
                    .collect::<Result<Vec<_>, QuantumError>>()?;
                Config::Dist(DistConfig { cases, measured: d.measured, var, phi, term })
            }
        })
    }
}

fn fmt_state(f: &mut fmt::Formatter<'_>, s: &StateVector) -> fmt::Result {
    write!(f, "{} = {}", s.names().join(","), crate::syntax::fmt_ket_sum(s))
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Config::Pure(p) => {
                write!(f, "(")?;
                fmt_state(f, &p.sigma)?;
                write!(f, "; {}; {})", p.phi.join(","), p.term)
            }
            Config::Dist(d) => {
                let mut first = true;
                for (i, c) in d.cases.iter().enumerate() {
                    if !first {
                        write!(f, " (+) ")?;
                    }
                    first = false;
                    write!(f, "{}: ", crate::syntax::fmt_real(c.probability))?;
                    match &c.state {
                        Some(s) => {
                            write!(f, "(")?;
                            fmt_state(f, s)?;
                            write!(f, "; {}; {}{{{i}/{}}})", d.phi.join(","), d.term, d.var)?;
                        }
                        None => write!(f, "-")?,
                    }
                }
                Ok(())
            }
        }
    }
}
