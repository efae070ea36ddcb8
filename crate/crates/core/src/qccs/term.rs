use crate::names::fresh_variant;
use crate::quantum::Gate;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

pub type Name = String;

/// Reference to a super-operator in a prefix or trace guard.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpRef {
    Gate(Gate),
    /// Measurement with the outcome forgotten, on however many qubits it
    /// is given.
    Measure,
    /// Renormalised projection onto outcome `i`.
    Expected(usize),
    /// Allocation of a fresh qubit; the prefix binds its single argument.
    New,
    /// User-declared operator.
    Named(String),
}

impl fmt::Display for OpRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpRef::Gate(g) => write!(f, "{g}"),
            OpRef::Measure => f.write_str("M"),
            OpRef::Expected(i) => write!(f, "E{{{i}}}"),
            OpRef::New => f.write_str("new"),
            OpRef::Named(n) => f.write_str(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    True,
    False,
    /// `tr(op[qubits](rho)) != 0`, before any renormalisation.
    TraceNonzero { op: OpRef, qubits: Vec<Name> },
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn qubits(&self) -> Vec<&Name> {
        match self {
            BoolExpr::True | BoolExpr::False => Vec::new(),
            BoolExpr::TraceNonzero { qubits, .. } => qubits.iter().collect(),
            BoolExpr::Not(b) => b.qubits(),
            BoolExpr::And(a, b) => {
                let mut v = a.qubits();
                v.extend(b.qubits());
                v
            }
        }
    }

    pub fn rename(&self, r: &dyn Fn(&Name) -> Name) -> BoolExpr {
        match self {
            BoolExpr::True => BoolExpr::True,
            BoolExpr::False => BoolExpr::False,
            BoolExpr::TraceNonzero { op, qubits } => BoolExpr::TraceNonzero { op: op.clone(), qubits: qubits.iter().map(r).collect() },
            BoolExpr::Not(b) => BoolExpr::Not(Box::new(b.rename(r))),
            BoolExpr::And(a, b) => BoolExpr::And(Box::new(a.rename(r)), Box::new(b.rename(r))),
        }
    }
}

impl fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoolExpr::True => f.write_str("true"),
            BoolExpr::False => f.write_str("false"),
            BoolExpr::TraceNonzero { op, qubits } => write!(f, "tr({op}[{}]) != 0", qubits.join(",")),
            BoolExpr::Not(b) if matches!(**b, BoolExpr::And(..)) => write!(f, "not ({b})"),
            BoolExpr::Not(b) => write!(f, "not {b}"),
            BoolExpr::And(a, b) if matches!(**b, BoolExpr::And(..)) => write!(f, "{a} and ({b})"),
            BoolExpr::And(a, b) => write!(f, "{a} and {b}"),
        }
    }
}

/// Target process terms. Binders: the input variable, the argument of a
/// `new` prefix, and restricted channels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Nil,
    Success,
    Tau(Box<Term>),
    Op { op: OpRef, qubits: Vec<Name>, body: Box<Term> },
    In { chan: Name, var: Name, body: Box<Term> },
    Out { chan: Name, qubit: Name, body: Box<Term> },
    Choice(Box<Term>, Box<Term>),
    Par(Box<Term>, Box<Term>),
    Restrict { chans: Vec<Name>, body: Box<Term> },
    IfThen { cond: BoolExpr, body: Box<Term> },
    Call { name: String, args: Vec<Name> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sort {
    Channel,
    Qubit,
}

impl Term {
    pub fn par(a: Term, b: Term) -> Term {
        Term::Par(Box::new(a), Box::new(b))
    }

    pub fn choice(a: Term, b: Term) -> Term {
        Term::Choice(Box::new(a), Box::new(b))
    }

    pub fn tau(body: Term) -> Term {
        Term::Tau(Box::new(body))
    }

    pub fn restrict(chans: Vec<Name>, body: Term) -> Term {
        Term::Restrict { chans, body: Box::new(body) }
    }

    pub fn op(op: OpRef, qubits: Vec<Name>, body: Term) -> Term {
        Term::Op { op, qubits, body: Box::new(body) }
    }

    /// Immediate subterms, left to right.
    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Nil | Term::Success | Term::Call { .. } => Vec::new(),
            Term::Tau(b)
            | Term::Op { body: b, .. }
            | Term::In { body: b, .. }
            | Term::Out { body: b, .. }
            | Term::Restrict { body: b, .. }
            | Term::IfThen { body: b, .. } => vec![b],
            Term::Choice(a, b) | Term::Par(a, b) => vec![a, b],
        }
    }

    /// Operators referenced by prefixes and guards.
    pub fn used_operators(&self, out: &mut BTreeSet<OpRef>) {
        fn guard(b: &BoolExpr, out: &mut BTreeSet<OpRef>) {
            match b {
                BoolExpr::TraceNonzero { op, .. } => {
                    out.insert(op.clone());
                }
                BoolExpr::Not(x) => guard(x, out),
                BoolExpr::And(x, y) => {
                    guard(x, out);
                    guard(y, out);
                }
                BoolExpr::True | BoolExpr::False => {}
            }
        }
        match self {
            Term::Op { op, .. } => {
                out.insert(op.clone());
            }
            Term::IfThen { cond, .. } => guard(cond, out),
            _ => {}
        }
        for c in self.children() {
            c.used_operators(out);
        }
    }

    /// Top-level parallel components with `nil` dropped.
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

    /// Summands of a (possibly nested) choice.
    pub fn summands(&self) -> Vec<&Term> {
        match self {
            Term::Choice(a, b) => {
                let mut v = a.summands();
                v.extend(b.summands());
                v
            }
            other => vec![other],
        }
    }

    /// Unguarded success: not under a prefix or a condition. Definitions
    /// are not unfolded.
    pub fn has_success(&self) -> bool {
        match self {
            Term::Success => true,
            Term::Par(a, b) | Term::Choice(a, b) => a.has_success() || b.has_success(),
            Term::Restrict { body, .. } => body.has_success(),
            _ => false,
        }
    }

    pub fn free_names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out, &|_| true);
        out
    }

    /// Free qubit references, including those in guards and calls.
    pub fn free_qubits(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out, &|s| s == Sort::Qubit);
        out
    }

    pub fn free_channels(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out, &|s| s == Sort::Channel);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>, keep: &dyn Fn(Sort) -> bool) {
        let add = |n: &Name, s: Sort, bound: &Vec<Name>, out: &mut BTreeSet<Name>| {
            if keep(s) && !bound.contains(n) {
                out.insert(n.clone());
            }
        };
        match self {
            Term::Nil | Term::Success => {}
            Term::Tau(b) => b.collect_free(bound, out, keep),
            Term::Op { op: OpRef::New, qubits, body } => {
                let k = bound.len();
                bound.extend(qubits.iter().cloned());
                body.collect_free(bound, out, keep);
                bound.truncate(k);
            }
            Term::Op { qubits, body, .. } => {
                for q in qubits {
                    add(q, Sort::Qubit, bound, out);
                }
                body.collect_free(bound, out, keep);
            }
            Term::In { chan, var, body } => {
                add(chan, Sort::Channel, bound, out);
                bound.push(var.clone());
                body.collect_free(bound, out, keep);
                bound.pop();
            }
            Term::Out { chan, qubit, body } => {
                add(chan, Sort::Channel, bound, out);
                add(qubit, Sort::Qubit, bound, out);
                body.collect_free(bound, out, keep);
            }
            Term::Choice(a, b) | Term::Par(a, b) => {
                a.collect_free(bound, out, keep);
                b.collect_free(bound, out, keep);
            }
            Term::Restrict { chans, body } => {
                let k = bound.len();
                bound.extend(chans.iter().cloned());
                body.collect_free(bound, out, keep);
                bound.truncate(k);
            }
            Term::IfThen { cond, body } => {
                for q in cond.qubits() {
                    add(q, Sort::Qubit, bound, out);
                }
                body.collect_free(bound, out, keep);
            }
            Term::Call { args, .. } => {
                for q in args {
                    add(q, Sort::Qubit, bound, out);
                }
            }
        }
    }

    pub fn all_names(&self, out: &mut HashSet<Name>) {
        match self {
            Term::Nil | Term::Success => {}
            Term::Tau(b) => b.all_names(out),
            Term::Op { qubits, body, .. } => {
                out.extend(qubits.iter().cloned());
                body.all_names(out);
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
            Term::Choice(a, b) | Term::Par(a, b) => {
                a.all_names(out);
                b.all_names(out);
            }
            Term::Restrict { chans, body } => {
                out.extend(chans.iter().cloned());
                body.all_names(out);
            }
            Term::IfThen { cond, body } => {
                out.extend(cond.qubits().into_iter().cloned());
                body.all_names(out);
            }
            Term::Call { args, .. } => out.extend(args.iter().cloned()),
        }
    }

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
        let rs = |v: &[Name]| v.iter().map(r).collect::<Vec<_>>();
        match self {
            Term::Nil => Term::Nil,
            Term::Success => Term::Success,
            Term::Tau(b) => Term::tau(b.subst(map)),
            Term::Op { op: OpRef::New, qubits, body } => {
                let (qubits, body) = subst_under(qubits, body, map);
                Term::Op { op: OpRef::New, qubits, body: Box::new(body) }
            }
            Term::Op { op, qubits, body } => Term::Op { op: op.clone(), qubits: rs(qubits), body: Box::new(body.subst(map)) },
            Term::In { chan, var, body } => {
                let (vars, body) = subst_under(std::slice::from_ref(var), body, map);
                Term::In { chan: r(chan), var: vars.into_iter().next().unwrap(), body: Box::new(body) }
            }
            Term::Out { chan, qubit, body } => Term::Out { chan: r(chan), qubit: r(qubit), body: Box::new(body.subst(map)) },
            Term::Choice(a, b) => Term::choice(a.subst(map), b.subst(map)),
            Term::Par(a, b) => Term::par(a.subst(map), b.subst(map)),
            Term::Restrict { chans, body } => {
                let (chans, body) = subst_under(chans, body, map);
                Term::Restrict { chans, body: Box::new(body) }
            }
            Term::IfThen { cond, body } => {
                Term::IfThen { cond: cond.rename(&r), body: Box::new(body.subst(map)) }
            }
            Term::Call { name, args } => Term::Call { name: name.clone(), args: rs(args) },
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Nil | Term::Success | Term::Call { .. } => 1,
            Term::Tau(b)
            | Term::Op { body: b, .. }
            | Term::In { body: b, .. }
            | Term::Out { body: b, .. }
            | Term::Restrict { body: b, .. }
            | Term::IfThen { body: b, .. } => 1 + b.size(),
            Term::Choice(a, b) | Term::Par(a, b) => 1 + a.size() + b.size(),
        }
    }
}

fn subst_under(vars: &[Name], body: &Term, map: &BTreeMap<Name, Name>) -> (Vec<Name>, Term) {
    let mut inner = map.clone();
    for v in vars {
        inner.remove(v);
    }
    if inner.is_empty() {
        return (vars.to_vec(), body.clone());
    }
    let free = body.free_names();
    let mut used: Option<HashSet<Name>> = None;
    let mut out_vars = Vec::with_capacity(vars.len());
    for v in vars {
        let captures = inner.iter().any(|(k, val)| val == v && free.contains(k) && !vars.contains(k));
        if captures {
            let used = used.get_or_insert_with(|| {
                let mut u = HashSet::new();
                body.all_names(&mut u);
                u.extend(map.keys().cloned());
                u.extend(map.values().cloned());
                u.extend(vars.iter().cloned());
                u
            });
            let fresh = fresh_variant(v, used);
            used.insert(fresh.clone());
            inner.insert(v.clone(), fresh.clone());
            out_vars.push(fresh);
        } else {
            out_vars.push(v.clone());
        }
    }
    (out_vars, body.subst(&inner))
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Level {
    Par,
    Choice,
    Restrict,
    Prefix,
}

impl Term {
    fn level(&self) -> Level {
        match self {
            Term::Par(..) => Level::Par,
            Term::Choice(..) => Level::Choice,
            Term::Restrict { .. } => Level::Restrict,
            _ => Level::Prefix,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: Level) -> fmt::Result {
        if self.level() < min {
            write!(f, "(")?;
            self.fmt_at(f, Level::Par)?;
            return write!(f, ")");
        }
        match self {
            Term::Nil => f.write_str("nil"),
            Term::Success => f.write_str("ok"),
            Term::Tau(b) => {
                f.write_str("tau.")?;
                b.fmt_at(f, Level::Prefix)
            }
            Term::Op { op, qubits, body } => {
                write!(f, "{op}[{}].", qubits.join(","))?;
                body.fmt_at(f, Level::Prefix)
            }
            Term::In { chan, var, body } => {
                write!(f, "{chan}?{var}.")?;
                body.fmt_at(f, Level::Prefix)
            }
            Term::Out { chan, qubit, body } => {
                write!(f, "{chan}!{qubit}.")?;
                body.fmt_at(f, Level::Prefix)
            }
            Term::IfThen { cond, body } => {
                write!(f, "if {cond} then ")?;
                body.fmt_at(f, Level::Prefix)
            }
            Term::Call { name, args } => write!(f, "{name}({})", args.join(",")),
            Term::Choice(a, b) => {
                a.fmt_at(f, Level::Choice)?;
                f.write_str(" + ")?;
                b.fmt_at(f, Level::Restrict)
            }
            Term::Par(a, b) => {
                a.fmt_at(f, Level::Par)?;
                f.write_str(" | ")?;
                b.fmt_at(f, Level::Choice)
            }
            Term::Restrict { chans, body } => {
                body.fmt_at(f, Level::Restrict)?;
                write!(f, " \\ {{{}}}", chans.join(","))
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, Level::Par)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restriction_binds_and_substitution_avoids_capture() {
        let t = Term::restrict(vec!["c".into()], Term::Out { chan: "c".into(), qubit: "q".into(), body: Box::new(Term::Nil) });
        assert!(t.free_channels().is_empty());
        assert_eq!(t.subst1("c", "d"), t);
        let s = t.subst1("q", "c");
        let Term::Restrict { chans, body } = &s else { panic!() };
        assert_ne!(chans[0], "c");
        assert_eq!(body.free_qubits().into_iter().collect::<Vec<_>>(), vec!["c"]);
    }

    #[test]
    fn new_prefix_binds_its_argument() {
        let t = Term::op(OpRef::New, vec!["x".into()], Term::op(OpRef::Gate(Gate::H), vec!["x".into(), "y".into()], Term::Nil));
        assert_eq!(t.free_qubits().into_iter().collect::<Vec<_>>(), vec!["y"]);
    }

    #[test]
    fn printing_uses_minimal_parentheses() {
        let inner = Term::restrict(vec!["x".into()], Term::par(Term::Nil, Term::Success));
        assert_eq!(Term::tau(inner).to_string(), "tau.((nil | ok) \\ {x})");
        let c = Term::choice(Term::Success, Term::choice(Term::Nil, Term::Nil));
        assert_eq!(c.to_string(), "ok + (nil + nil)");
    }
}
