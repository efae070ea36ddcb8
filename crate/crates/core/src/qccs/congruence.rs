use super::program::QccsConfig;
use super::term::{BoolExpr, Name, OpRef, Term};
use crate::quantum::QuantumError;
use std::collections::{BTreeMap, BTreeSet};

/// Digits kept when hashing density-matrix entries.
pub const HASH_DIGITS: i32 = 9;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// Binders only; no reordering.
    Alpha,
    /// Parallel composition up to unit, commutativity and associativity.
    Congruence,
    /// Additionally: choice up to commutativity and associativity,
    /// restrictions merged and extruded to the nearest parallel context,
    /// unused restrictions dropped.
    Observational,
}

struct Binder {
    name: Name,
    label: Option<String>,
}

struct Renderer {
    mode: Mode,
    binders: Vec<Binder>,
    next_label: usize,
    next_fresh: usize,
}

impl Renderer {
    fn new(mode: Mode) -> Self {
        Renderer { mode, binders: Vec::new(), next_label: 0, next_fresh: 0 }
    }

    /// Bound names print as their label. Restricted channels get labels
    /// lazily, in order of first printed occurrence, and show as `%` while
    /// component order is still being decided.
    fn name(&mut self, n: &str, assign: bool) -> String {
        let Some(b) = self.binders.iter_mut().rev().find(|b| b.name == n) else {
            return n.to_string();
        };
        match &b.label {
            Some(l) => l.clone(),
            None if assign => {
                let l = format!("%{}", self.next_label);
                self.next_label += 1;
                b.label = Some(l.clone());
                l
            }
            None => "%".to_string(),
        }
    }

    fn names(&mut self, ns: &[Name], assign: bool) -> String {
        ns.iter().map(|n| self.name(n, assign)).collect::<Vec<_>>().join(",")
    }

    fn push_eager(&mut self, n: &Name) {
        let label = format!("^{}", self.binders.len());
        self.binders.push(Binder { name: n.clone(), label: Some(label) });
    }

    fn push_lazy(&mut self, n: &Name) {
        self.binders.push(Binder { name: n.clone(), label: None });
    }

    fn op(&mut self, op: &OpRef) -> String {
        op.to_string()
    }

    fn cond(&mut self, b: &BoolExpr, assign: bool) -> String {
        match b {
            BoolExpr::True => "T".into(),
            BoolExpr::False => "F".into(),
            BoolExpr::TraceNonzero { op, qubits } => format!("tr({}[{}])", self.op(op), self.names(qubits, assign)),
            BoolExpr::Not(x) => format!("!({})", self.cond(x, assign)),
            BoolExpr::And(x, y) => format!("({}&{})", self.cond(x, assign), self.cond(y, assign)),
        }
    }

    /// Renders items in a canonical order: sort by their rendering with
    /// unassigned labels hidden, then render again in that order.
    fn sorted(&mut self, items: &[Term], assign: bool) -> Vec<String> {
        let mut keyed: Vec<(String, &Term)> = items.iter().map(|t| (self.term(t, false), t)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        if !assign {
            return keyed.into_iter().map(|(k, _)| k).collect();
        }
        keyed.into_iter().map(|(_, t)| self.term(t, true)).collect()
    }

    fn term(&mut self, t: &Term, assign: bool) -> String {
        match t {
            Term::Nil => "0".into(),
            Term::Success => "ok".into(),
            Term::Tau(b) => format!("t.{}", self.term(b, assign)),
            Term::Op { op: OpRef::New, qubits, body } => {
                self.push_eager(&qubits[0]);
                let s = format!("new[{}].{}", self.binders.last().and_then(|b| b.label.clone()).unwrap_or_default(), self.term(body, assign));
                self.binders.pop();
                s
            }
            Term::Op { op, qubits, body } => {
                let o = self.op(op);
                let q = self.names(qubits, assign);
                format!("{o}[{q}].{}", self.term(body, assign))
            }
            Term::In { chan, var, body } => {
                let c = self.name(chan, assign);
                self.push_eager(var);
                let l = self.binders.last().and_then(|b| b.label.clone()).unwrap_or_default();
                let s = format!("{c}?{l}.{}", self.term(body, assign));
                self.binders.pop();
                s
            }
            Term::Out { chan, qubit, body } => {
                let c = self.name(chan, assign);
                let q = self.name(qubit, assign);
                format!("{c}!{q}.{}", self.term(body, assign))
            }
            Term::IfThen { cond, body } => {
                let c = self.cond(cond, assign);
                format!("if({c}).{}", self.term(body, assign))
            }
            Term::Call { name, args } => format!("{name}({})", self.names(args, assign)),
            Term::Choice(a, b) => {
                if self.mode == Mode::Observational {
                    let items: Vec<Term> = t.summands().into_iter().cloned().collect();
                    format!("+({})", self.sorted(&items, assign).join(","))
                } else {
                    format!("({}+{})", self.term(a, assign), self.term(b, assign))
                }
            }
            Term::Par(a, b) => match self.mode {
                Mode::Alpha => format!("({}|{})", self.term(a, assign), self.term(b, assign)),
                Mode::Congruence => {
                    let comps: Vec<Term> = t.components().into_iter().cloned().collect();
                    self.group(&[], &comps, assign)
                }
                Mode::Observational => self.extruded(t, assign),
            },
            Term::Restrict { chans, body } => match self.mode {
                Mode::Observational => self.extruded(t, assign),
                _ => {
                    let mut chans_sorted = chans.clone();
                    chans_sorted.sort();
                    chans_sorted.dedup();
                    for c in &chans_sorted {
                        self.push_lazy(c);
                    }
                    let b = self.term(body, assign);
                    // A set of binders: its labels, not its names, are ordered.
                    let mut labels: Vec<String> = chans_sorted.iter().map(|c| self.name(c, assign)).collect();
                    labels.sort();
                    let hidden = labels.join(",");
                    self.binders.truncate(self.binders.len() - chans_sorted.len());
                    format!("({b})\\{{{hidden}}}")
                }
            },
        }
    }

    /// Parallel components under a set of restricted channels.
    fn group(&mut self, restricted: &[Name], comps: &[Term], assign: bool) -> String {
        if restricted.is_empty() && comps.len() <= 1 {
            return comps.first().map_or_else(|| "0".to_string(), |c| self.term(c, assign));
        }
        for r in restricted {
            self.push_lazy(r);
        }
        let parts = self.sorted(comps, assign);
        self.binders.truncate(self.binders.len() - restricted.len());
        let body = if parts.is_empty() { "0".to_string() } else { parts.join("|") };
        if restricted.is_empty() {
            format!("[{body}]")
        } else {
            format!("nu{}[{body}]", restricted.len())
        }
    }

    /// Observational normal form of a parallel/restriction nest: restricted
    /// channels are renamed apart, pulled to the top and merged.
    fn extruded(&mut self, t: &Term, assign: bool) -> String {
        let mut restricted = Vec::new();
        let mut comps = Vec::new();
        self.decompose(t, &mut restricted, &mut comps);
        let used: BTreeSet<Name> = comps.iter().flat_map(|c| c.free_names()).collect();
        restricted.retain(|r| used.contains(r));
        self.group(&restricted, &comps, assign)
    }

    fn decompose(&mut self, t: &Term, restricted: &mut Vec<Name>, comps: &mut Vec<Term>) {
        match t {
            Term::Par(a, b) => {
                self.decompose(a, restricted, comps);
                self.decompose(b, restricted, comps);
            }
            Term::Nil => {}
            Term::Restrict { chans, body } => {
                let mut map = BTreeMap::new();
                for c in chans {
                    if map.contains_key(c) {
                        continue;
                    }
                    let fresh = format!("%%{}", self.next_fresh);
                    self.next_fresh += 1;
                    map.insert(c.clone(), fresh.clone());
                    restricted.push(fresh);
                }
                self.decompose(&body.subst(&map), restricted, comps);
            }
            other => comps.push(other.clone()),
        }
    }
}

/// Key equal exactly for alpha-equivalent terms.
pub fn alpha_key(t: &Term) -> String {
    Renderer::new(Mode::Alpha).term(t, true)
}

/// Key for structural congruence: alpha-equivalence plus the monoid laws
/// of parallel composition.
pub fn term_key(t: &Term) -> String {
    Renderer::new(Mode::Congruence).term(t, true)
}

/// Key for a coarser equivalence that is still a strong bisimulation:
/// congruence plus choice monoid laws and scope extrusion. Distinct keys
/// do not imply inequivalence.
pub fn obs_key(t: &Term) -> String {
    Renderer::new(Mode::Observational).term(t, true)
}

/// Observational key of the term together with the density matrix in
/// canonical qubit order, rounded for hashing.
pub fn config_obs_key(c: &QccsConfig) -> String {
    format!("{}@{}", obs_key(&c.term), c.rho.hash_key(HASH_DIGITS))
}

/// Observational equality of configurations within `tol`.
pub fn obs_eq(a: &QccsConfig, b: &QccsConfig, tol: f64) -> bool {
    obs_key(&a.term) == obs_key(&b.term) && a.rho.approx_eq(&b.rho, tol)
}

/// Alpha-equality of terms and equality of states within `tol`.
pub fn alpha_eq(a: &QccsConfig, b: &QccsConfig, tol: f64) -> bool {
    alpha_key(&a.term) == alpha_key(&b.term) && a.rho.approx_eq(&b.rho, tol)
}

/// Structural congruence of configurations, including a consistent
/// renaming of the qubits of the system (tried exhaustively for up to six
/// qubits).
pub fn qccs_congruent(a: &QccsConfig, b: &QccsConfig, tol: f64) -> bool {
    if term_key(&a.term) == term_key(&b.term) && a.rho.approx_eq(&b.rho, tol) {
        return true;
    }
    let (na, nb) = (a.rho.names(), b.rho.names());
    if na.len() != nb.len() || na.len() > 6 {
        return false;
    }
    let target = term_key(&b.term);
    let mut perm: Vec<usize> = (0..na.len()).collect();
    loop {
        let map: BTreeMap<Name, Name> = na.iter().cloned().zip(perm.iter().map(|&i| nb[i].clone())).collect();
        if let (Ok(t), Ok(r)) = (subst_qubits(&a.term, &map), a.rho.rename(&map)) {
            if term_key(&t) == target && r.approx_eq(&b.rho, tol) {
                return true;
            }
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Renames free qubits. The map must be injective on the names it
/// actually changes, or two qubits would merge.
pub fn subst_qubits(t: &Term, map: &BTreeMap<Name, Name>) -> Result<Term, QuantumError> {
    let mut seen = BTreeMap::new();
    for (k, v) in map {
        if let Some(prev) = seen.insert(v.clone(), k.clone()) {
            return Err(QuantumError::NoCloningViolation(format!("`{prev}` and `{k}` both map to `{v}`")));
        }
    }
    Ok(t.subst(map))
}
