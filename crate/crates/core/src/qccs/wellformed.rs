use super::program::{Defs, Program, Span};
use super::term::{OpRef, Term};
use crate::syntax::Pos;
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// Which no-cloning condition a term breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// A sent qubit is still used by the continuation.
    Cond1,
    /// Two parallel components share a qubit.
    Cond2,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Cond1 => "Cond1",
            Condition::Cond2 => "Cond2",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WellFormedKind {
    #[error("{cond} violation on qubit `{qubit}`")]
    NoCloningViolation { cond: Condition, qubit: String },
    #[error("qubit `{0}` is not in the system state")]
    UnboundQubit(String),
    #[error("definition uses qubit `{0}` that is not a parameter")]
    DefinitionFreeQubit(String),
    #[error("qubit `{0}` appears twice in one operator application")]
    DuplicateQubit(String),
}

/// A well-formedness failure with where it occurred: the enclosing
/// definition or the main process, the child-index path to the offending
/// subterm, its source position when known, and the subterm itself.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct WellFormedError {
    pub kind: WellFormedKind,
    pub scope: String,
    pub path: Vec<usize>,
    pub pos: Option<Pos>,
    pub subterm: String,
}

impl fmt::Display for WellFormedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = self.pos {
            write!(f, "{p}: ")?;
        }
        let path: Vec<String> = self.path.iter().map(|i| i.to_string()).collect();
        write!(f, "{} in {} at [{}]: `{}`", self.kind, self.scope, path.join("."), self.subterm)
    }
}

fn abbreviate(t: &Term) -> String {
    let s = t.to_string();
    if s.chars().count() <= 60 {
        s
    } else {
        format!("{}...", s.chars().take(57).collect::<String>())
    }
}

fn first_duplicate(qs: &[String]) -> Option<&String> {
    let mut seen = BTreeSet::new();
    qs.iter().find(|q| !seen.insert(q.as_str()))
}

/// Checks the no-cloning conditions on every subterm and distinct operands
/// in every operator application. Returns the first violation in pre-order.
pub fn check_term(t: &Term) -> Result<(), (WellFormedKind, Vec<usize>)> {
    fn go(t: &Term, path: &mut Vec<usize>) -> Result<(), (WellFormedKind, Vec<usize>)> {
        match t {
            Term::Out { qubit, body, .. } if body.free_qubits().contains(qubit) => {
                return Err((WellFormedKind::NoCloningViolation { cond: Condition::Cond1, qubit: qubit.clone() }, path.clone()));
            }
            Term::Par(a, b) => {
                let fa = a.free_qubits();
                if let Some(q) = b.free_qubits().intersection(&fa).next() {
                    return Err((WellFormedKind::NoCloningViolation { cond: Condition::Cond2, qubit: q.clone() }, path.clone()));
                }
            }
            Term::Op { op, qubits, .. } if *op != OpRef::New => {
                if let Some(q) = first_duplicate(qubits) {
                    return Err((WellFormedKind::DuplicateQubit(q.clone()), path.clone()));
                }
            }
            Term::IfThen { cond, .. } => {
                let qs: Vec<String> = cond.qubits().into_iter().cloned().collect();
                if let Some(q) = first_duplicate(&qs) {
                    return Err((WellFormedKind::DuplicateQubit(q.clone()), path.clone()));
                }
            }
            Term::Call { args, .. } => {
                if let Some(q) = first_duplicate(args) {
                    return Err((WellFormedKind::DuplicateQubit(q.clone()), path.clone()));
                }
            }
            _ => {}
        }
        for (i, c) in t.children().into_iter().enumerate() {
            path.push(i);
            go(c, path)?;
            path.pop();
        }
        Ok(())
    }
    go(t, &mut Vec::new())
}

fn subterm_at<'a>(t: &'a Term, path: &[usize]) -> &'a Term {
    path.iter().fold(t, |t, &i| t.children()[i])
}

fn locate(t: &Term, span: Option<&Span>, scope: &str, kind: WellFormedKind, path: Vec<usize>) -> WellFormedError {
    WellFormedError {
        kind,
        scope: scope.to_string(),
        pos: span.map(|s| s.locate(&path)),
        subterm: abbreviate(subterm_at(t, &path)),
        path,
    }
}

/// Checks definitions (closed over their parameters, no-cloning), then the
/// process (no-cloning, every free qubit present in the state).
pub fn check_wellformed(defs: &Defs, term: &Term, qubits: &[String]) -> Result<(), WellFormedError> {
    check_with_spans(defs, term, qubits, None, None)
}

fn check_with_spans(
    defs: &Defs,
    term: &Term,
    qubits: &[String],
    span: Option<&Span>,
    def_spans: Option<&indexmap::IndexMap<String, Span>>,
) -> Result<(), WellFormedError> {
    for (name, d) in &defs.procs {
        let scope = format!("definition `{name}`");
        let dspan = def_spans.and_then(|m| m.get(name));
        if let Some(q) = d.body.free_qubits().into_iter().find(|q| !d.params.contains(q)) {
            return Err(locate(&d.body, dspan, &scope, WellFormedKind::DefinitionFreeQubit(q), Vec::new()));
        }
        check_term(&d.body).map_err(|(k, p)| locate(&d.body, dspan, &scope, k, p))?;
    }
    check_term(term).map_err(|(k, p)| locate(term, span, "process", k, p))?;
    if let Some(q) = term.free_qubits().into_iter().find(|q| !qubits.contains(q)) {
        return Err(locate(term, span, "process", WellFormedKind::UnboundQubit(q), Vec::new()));
    }
    Ok(())
}

impl Program {
    /// Well-formedness with source positions when the program was parsed.
    pub fn check_wellformed(&self) -> Result<(), WellFormedError> {
        check_with_spans(&self.defs, &self.config.term, self.config.rho.names(), self.span.as_ref(), Some(&self.def_spans))
    }
}
