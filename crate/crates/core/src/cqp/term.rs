use crate::names::fresh_variant;
use crate::quantum::Gate;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

pub type Name = String;

/// Source process terms. Binders: the input variable, the measurement
/// result variable, and the names introduced by `new` and `qbit`; each
/// binds its identifier in every position of the body.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Nil,
    Success,
    Par(Box<Term>, Box<Term>),
    In { chan: Name, var: Name, body: Box<Term> },
    Out { chan: Name, qubit: Name, body: Box<Term> },
    Trans { qubits: Vec<Name>, gate: Gate, body: Box<Term> },
    Measure { qubits: Vec<Name>, var: Name, body: Box<Term> },
    NewChan { var: Name, body: Box<Term> },
    NewQbit { var: Name, body: Box<Term> },
}

impl Term {
    pub fn par(a: Term, b: Term) -> Term {
        Term::Par(Box::new(a), Box::new(b))
    }

    /// Right-nested parallel composition; `Nil` for an empty list.
    pub fn par_all(mut items: Vec<Term>) -> Term {
        match items.len() {
            0 => Term::Nil,
            1 => items.pop().unwrap(),
            _ => {
                let first = items.remove(0);
                Term::par(first, Term::par_all(items))
            }
        }
    }

    /// Left-nested parallel composition, the shape the parser produces.
    pub fn par_left(items: Vec<Term>) -> Term {
        items.into_iter().reduce(Term::par).unwrap_or(Term::Nil)
    }

    /// Top-level parallel components with `Nil` dropped.
    pub fn components(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        fn walk<'a>(t: &'a Term, out: &mut Vec<&'a Term>) {
            match t {
                Term::Par(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Term::Nil => {}
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn binder(&self) -> Option<&Name> {
        match self {
            Term::In { var, .. } | Term::Measure { var, .. } | Term::NewChan { var, .. } | Term::NewQbit { var, .. } => {
                Some(var)
            }
            _ => None,
        }
    }

    /// An unguarded success: a top-level parallel component is `ok`.
    pub fn has_success(&self) -> bool {
        self.components().iter().any(|c| matches!(c, Term::Success))
    }

    pub fn free_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out, &|_| true);
        out
    }

    /// Free identifiers in qubit positions: sent payloads and operands.
    pub fn free_qubits(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out, &|pos| pos == Position::Qubit);
        out
    }

    /// Free identifiers in channel positions.
    pub fn free_channels(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out, &|pos| pos == Position::Channel);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>, keep: &dyn Fn(Position) -> bool) {
        let add = |n: &Name, pos: Position, bound: &Vec<Name>, out: &mut BTreeSet<Name>| {
            if keep(pos) && !bound.contains(n) {
                out.insert(n.clone());
            }
        };
        match self {
            Term::Nil | Term::Success => {}
            Term::Par(a, b) => {
                a.collect_free(bound, out, keep);
                b.collect_free(bound, out, keep);
            }
            Term::In { chan, var, body } => {
                add(chan, Position::Channel, bound, out);
                bound.push(var.clone());
                body.collect_free(bound, out, keep);
                bound.pop();
            }
            Term::Out { chan, qubit, body } => {
                add(chan, Position::Channel, bound, out);
                add(qubit, Position::Qubit, bound, out);
                body.collect_free(bound, out, keep);
            }
            Term::Trans { qubits, body, .. } => {
                for q in qubits {
                    add(q, Position::Qubit, bound, out);
                }
                body.collect_free(bound, out, keep);
            }
            Term::Measure { qubits, var, body } => {
                for q in qubits {
                    add(q, Position::Qubit, bound, out);
                }
                bound.push(var.clone());
                body.collect_free(bound, out, keep);
                bound.pop();
            }
            Term::NewChan { var, body } | Term::NewQbit { var, body } => {
                bound.push(var.clone());
                body.collect_free(bound, out, keep);
                bound.pop();
            }
        }
    }

    /// Every identifier occurring anywhere, bound or free.
    pub fn all_names(&self, out: &mut HashSet<Name>) {
        match self {
            Term::Nil | Term::Success => {}
            Term::Par(a, b) => {
                a.all_names(out);
                b.all_names(out);
            }
            Term::In { chan, var, body } => {
                out.insert(chan.clone());
                out.insert(var.clone());
                body.all_names(out);
            }
            Term::Out { chan, qubit, body } => {
                out.insert(chan.clone());
                out.insert(qubit.clone());
                body.all_names(out);
            }
            Term::Trans { qubits, body, .. } => {
                out.extend(qubits.iter().cloned());
                body.all_names(out);
            }
            Term::Measure { qubits, var, body } => {
                out.extend(qubits.iter().cloned());
                out.insert(var.clone());
                body.all_names(out);
            }
            Term::NewChan { var, body } | Term::NewQbit { var, body } => {
                out.insert(var.clone());
                body.all_names(out);
            }
        }
    }

    /// `self{to/from}`.
    pub fn subst1(&self, from: &str, to: &str) -> Term {
        let mut m = BTreeMap::new();
        m.insert(from.to_string(), to.to_string());
        self.subst(&m)
    }

    /// Simultaneous capture-avoiding renaming of free identifiers.
    pub fn subst(&self, map: &BTreeMap<Name, Name>) -> Term {
        if map.is_empty() {
            return self.clone();
        }
        let r = |n: &Name| map.get(n).cloned().unwrap_or_else(|| n.clone());
        match self {
            Term::Nil => Term::Nil,
            Term::Success => Term::Success,
            Term::Par(a, b) => Term::par(a.subst(map), b.subst(map)),
            Term::Out { chan, qubit, body } => Term::Out { chan: r(chan), qubit: r(qubit), body: Box::new(body.subst(map)) },
            Term::Trans { qubits, gate, body } => {
                Term::Trans { qubits: qubits.iter().map(r).collect(), gate: *gate, body: Box::new(body.subst(map)) }
            }
            Term::In { chan, var, body } => {
                let (var, body) = subst_under(var, body, map);
                Term::In { chan: r(chan), var, body: Box::new(body) }
            }
            Term::Measure { qubits, var, body } => {
                let (var, body) = subst_under(var, body, map);
                Term::Measure { qubits: qubits.iter().map(r).collect(), var, body: Box::new(body) }
            }
            Term::NewChan { var, body } => {
                let (var, body) = subst_under(var, body, map);
                Term::NewChan { var, body: Box::new(body) }
            }
            Term::NewQbit { var, body } => {
                let (var, body) = subst_under(var, body, map);
                Term::NewQbit { var, body: Box::new(body) }
            }
        }
    }

    /// Renames the binder at the head of the term to `to` (which must not
    /// occur free in the body).
    pub fn rename_binder(&self, to: &str) -> Term {
        match self {
            Term::In { chan, var, body } => Term::In { chan: chan.clone(), var: to.into(), body: Box::new(body.subst1(var, to)) },
            Term::Measure { qubits, var, body } => {
                Term::Measure { qubits: qubits.clone(), var: to.into(), body: Box::new(body.subst1(var, to)) }
            }
            Term::NewChan { var, body } => Term::NewChan { var: to.into(), body: Box::new(body.subst1(var, to)) },
            Term::NewQbit { var, body } => Term::NewQbit { var: to.into(), body: Box::new(body.subst1(var, to)) },
            other => other.clone(),
        }
    }

    /// Number of constructors, for generator bookkeeping.
    pub fn size(&self) -> usize {
        match self {
            Term::Nil | Term::Success => 1,
            Term::Par(a, b) => 1 + a.size() + b.size(),
            Term::In { body, .. }
            | Term::Out { body, .. }
            | Term::Trans { body, .. }
            | Term::Measure { body, .. }
            | Term::NewChan { body, .. }
            | Term::NewQbit { body, .. } => 1 + body.size(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Position {
    Channel,
    Qubit,
}

fn subst_under(var: &Name, body: &Term, map: &BTreeMap<Name, Name>) -> (Name, Term) {
    let mut inner: BTreeMap<Name, Name> = map.clone();
    inner.remove(var);
    if inner.is_empty() {
        return (var.clone(), body.clone());
    }
    let free = body.free_names();
    let captures = inner.iter().any(|(k, v)| v == var && free.contains(k));
    if !captures {
        return (var.clone(), body.subst(&inner));
    }
    let mut used = HashSet::new();
    body.all_names(&mut used);
    used.extend(inner.keys().cloned());
    used.extend(inner.values().cloned());
    used.insert(var.clone());
    let fresh = fresh_variant(var, &used);
    inner.insert(var.clone(), fresh.clone());
    (fresh, body.subst(&inner))
}

fn fmt_names(names: &[Name]) -> String {
    names.join(",")
}

impl Term {
    fn fmt_prefix(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Par(..) => write!(f, "({self})"),
            _ => write!(f, "{self}"),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Nil => f.write_str("0"),
            Term::Success => f.write_str("ok"),
            Term::Par(a, b) => {
                write!(f, "{a} | ")?;
                b.fmt_prefix(f)
            }
            Term::In { chan, var, body } => {
                write!(f, "{chan}?[{var}].")?;
                body.fmt_prefix(f)
            }
            Term::Out { chan, qubit, body } => {
                write!(f, "{chan}![{qubit}].")?;
                body.fmt_prefix(f)
            }
            Term::Trans { qubits, gate, body } => {
                write!(f, "{{{} *= {gate}}}.", fmt_names(qubits))?;
                body.fmt_prefix(f)
            }
            Term::Measure { qubits, var, body } => {
                write!(f, "({var} := measure {}).", fmt_names(qubits))?;
                body.fmt_prefix(f)
            }
            Term::NewChan { var, body } => {
                write!(f, "(new {var})")?;
                body.fmt_prefix(f)
            }
            Term::NewQbit { var, body } => {
                write!(f, "(qbit {var})")?;
                body.fmt_prefix(f)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(c: &str, x: &str, body: Term) -> Term {
        Term::In { chan: c.into(), var: x.into(), body: Box::new(body) }
    }

    fn output(c: &str, q: &str, body: Term) -> Term {
        Term::Out { chan: c.into(), qubit: q.into(), body: Box::new(body) }
    }

    #[test]
    fn substitution_renames_free_channels() {
        let t = input("c", "x", output("x", "q", Term::Nil));
        assert_eq!(t.subst1("c", "d"), input("d", "x", output("x", "q", Term::Nil)));
    }

    #[test]
    fn substitution_leaves_bound_names() {
        let t = input("c", "x", output("x", "q", Term::Nil));
        assert_eq!(t.subst1("x", "y"), t);
    }

    #[test]
    fn substitution_avoids_capture() {
        let t = input("c", "x", output("x", "q", Term::Nil));
        let s = t.subst1("q", "x");
        match &s {
            Term::In { var, body, .. } => {
                assert_ne!(var, "x");
                assert_eq!(**body, output(var, "x", Term::Nil));
            }
            _ => panic!("shape changed"),
        }
    }

    #[test]
    fn free_name_sorts_are_separate() {
        let t = Term::par(
            output("c", "q", Term::Nil),
            Term::Measure { qubits: vec!["r".into()], var: "x".into(), body: Box::new(output("x", "s", Term::Nil)) },
        );
        assert_eq!(t.free_qubits().into_iter().collect::<Vec<_>>(), vec!["q", "r", "s"]);
        assert_eq!(t.free_channels().into_iter().collect::<Vec<_>>(), vec!["c"]);
    }

    #[test]
    fn printing_parenthesises_nested_parallel() {
        let t = Term::par(Term::Success, Term::par(Term::Nil, Term::Success));
        assert_eq!(t.to_string(), "ok | (0 | ok)");
        let n = Term::NewChan { var: "0".into(), body: Box::new(Term::par(Term::Nil, Term::Nil)) };
        assert_eq!(n.to_string(), "(new 0)(0 | 0)");
    }
}
