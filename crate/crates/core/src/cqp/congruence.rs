use super::config::Config;
use super::term::{Name, Term};
use std::collections::BTreeMap;

const DIGITS: i32 = 9;

/// Canonical text of a term up to structural congruence: parallel
/// composition is flattened, `0` components dropped and the rest sorted;
/// bound identifiers are replaced by binder distance, so alpha-equivalent
/// terms share a key.
pub fn term_key(t: &Term) -> String {
    let mut out = String::new();
    key_into(t, &mut Vec::new(), &mut out);
    out
}

fn name_key(n: &Name, bound: &[Name]) -> String {
    match bound.iter().rev().position(|b| b == n) {
        Some(k) => format!("^{k}"),
        None => n.clone(),
    }
}

fn key_into(t: &Term, bound: &mut Vec<Name>, out: &mut String) {
    match t {
        Term::Nil => out.push('0'),
        Term::Success => out.push_str("ok"),
        Term::Par(..) => {
            let mut parts: Vec<String> = t
                .components()
                .into_iter()
                .map(|c| {
                    let mut s = String::new();
                    key_into(c, bound, &mut s);
                    s
                })
                .collect();
            match parts.len() {
                0 => out.push('0'),
                1 => out.push_str(&parts[0]),
                _ => {
                    parts.sort();
                    out.push('(');
                    out.push_str(&parts.join("|"));
                    out.push(')');
                }
            }
        }
        Term::In { chan, var, body } => {
            out.push_str(&format!("{}?.", name_key(chan, bound)));
            bound.push(var.clone());
            key_into(body, bound, out);
            bound.pop();
        }
        Term::Out { chan, qubit, body } => {
            out.push_str(&format!("{}![{}].", name_key(chan, bound), name_key(qubit, bound)));
            key_into(body, bound, out);
        }
        Term::Trans { qubits, gate, body } => {
            let qs: Vec<String> = qubits.iter().map(|q| name_key(q, bound)).collect();
            out.push_str(&format!("{{{}*={gate}}}.", qs.join(",")));
            key_into(body, bound, out);
        }
        Term::Measure { qubits, var, body } => {
            let qs: Vec<String> = qubits.iter().map(|q| name_key(q, bound)).collect();
            out.push_str(&format!("(m {}).", qs.join(",")));
            bound.push(var.clone());
            key_into(body, bound, out);
            bound.pop();
        }
        Term::NewChan { var, body } => {
            out.push_str("(new)");
            bound.push(var.clone());
            key_into(body, bound, out);
            bound.pop();
        }
        Term::NewQbit { var, body } => {
            out.push_str("(qbit)");
            bound.push(var.clone());
            key_into(body, bound, out);
            bound.pop();
        }
    }
}

fn binder_key(var: &Name, body: &Term) -> String {
    term_key(&Term::NewChan { var: var.clone(), body: Box::new(body.clone()) })
}

/// Hash key of a configuration: register order and names are kept,
/// amplitudes are rounded for hashing.
pub fn config_key(c: &Config) -> String {
    match c {
        Config::Pure(p) => format!("P;{};{};{}", p.phi.join(","), p.sigma.hash_key(DIGITS), term_key(&p.term)),
        Config::Dist(d) => {
            let mut s = format!("D;{};{};", d.phi.join(","), d.measured);
            for case in &d.cases {
                match &case.state {
                    Some(st) => s.push_str(&st.hash_key(DIGITS)),
                    None => s.push('-'),
                }
                s.push(';');
            }
            s.push_str(&binder_key(&d.var, &d.term));
            s
        }
    }
}

/// Same process up to congruence, same channel list and numerically equal
/// register states in the same order with the same names.
pub fn config_approx_eq(a: &Config, b: &Config, tol: f64) -> bool {
    match (a, b) {
        (Config::Pure(x), Config::Pure(y)) => {
            x.phi == y.phi && x.sigma.approx_eq(&y.sigma, tol) && term_key(&x.term) == term_key(&y.term)
        }
        (Config::Dist(x), Config::Dist(y)) => {
            x.phi == y.phi
                && x.measured == y.measured
                && x.cases.len() == y.cases.len()
                && x.cases.iter().zip(&y.cases).all(|(p, q)| {
                    (p.probability - q.probability).abs() <= tol
                        && match (&p.state, &q.state) {
                            (Some(s), Some(t)) => s.approx_eq(t, tol),
                            (None, None) => true,
                            _ => false,
                        }
                })
                && binder_key(&x.var, &x.term) == binder_key(&y.var, &y.term)
        }
        _ => false,
    }
}

/// Structural congruence of configurations, including consistent renaming
/// of register qubits.
pub fn congruent(a: &Config, b: &Config, tol: f64) -> bool {
    if config_approx_eq(a, b, tol) {
        return true;
    }
    if a.qubit_count() != b.qubit_count() {
        return false;
    }
    let positional = |c: &Config| -> Option<Config> {
        let map: BTreeMap<Name, Name> =
            c.qubit_names().iter().enumerate().map(|(i, n)| (n.clone(), format!("%q{i}"))).collect();
        c.rename(&map).ok()
    };
    match (positional(a), positional(b)) {
        (Some(x), Some(y)) => config_approx_eq(&x, &y, tol),
        _ => false,
    }
}

/// Representative of the congruence class with flattened, sorted parallel
/// composition and no `0` components.
pub fn normalize(t: &Term) -> Term {
    match t {
        Term::Par(..) => {
            let mut parts: Vec<(String, Term)> = t
                .components()
                .into_iter()
                .map(|c| {
                    let n = normalize(c);
                    (term_key(&n), n)
                })
                .collect();
            parts.sort_by(|a, b| a.0.cmp(&b.0));
            Term::par_all(parts.into_iter().map(|(_, n)| n).collect())
        }
        Term::Nil | Term::Success => t.clone(),
        Term::In { chan, var, body } => Term::In { chan: chan.clone(), var: var.clone(), body: Box::new(normalize(body)) },
        Term::Out { chan, qubit, body } => Term::Out { chan: chan.clone(), qubit: qubit.clone(), body: Box::new(normalize(body)) },
        Term::Trans { qubits, gate, body } => Term::Trans { qubits: qubits.clone(), gate: *gate, body: Box::new(normalize(body)) },
        Term::Measure { qubits, var, body } => {
            Term::Measure { qubits: qubits.clone(), var: var.clone(), body: Box::new(normalize(body)) }
        }
        Term::NewChan { var, body } => Term::NewChan { var: var.clone(), body: Box::new(normalize(body)) },
        Term::NewQbit { var, body } => Term::NewQbit { var: var.clone(), body: Box::new(normalize(body)) },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cqp::parse::parse_term;

    fn key(s: &str) -> String {
        term_key(&parse_term(s).unwrap())
    }

    #[test]
    fn parallel_laws_hold() {
        assert_eq!(key("ok | 0"), key("ok"));
        assert_eq!(key("c![q].0 | ok"), key("ok | c![q].0"));
        assert_eq!(key("(ok | c![q].0) | d![r].0"), key("ok | (c![q].0 | d![r].0)"));
    }

    #[test]
    fn alpha_equivalence_holds() {
        assert_eq!(key("c?[x].x![q].0"), key("c?[y].y![q].0"));
        assert_ne!(key("c?[x].x![q].0"), key("c?[y].x![q].0"));
        assert_eq!(key("(new a)a![q].0"), key("(new b)b![q].0"));
    }

    #[test]
    fn qubit_renaming_is_a_congruence() {
        use crate::cqp::config::Config;
        use crate::StateVector;
        let a = Config::pure(StateVector::basis(vec!["q".into()], &[true]).unwrap(), vec![], parse_term("{q *= H}.0").unwrap());
        let b = Config::pure(StateVector::basis(vec!["r".into()], &[true]).unwrap(), vec![], parse_term("{r *= H}.0").unwrap());
        assert!(congruent(&a, &b, 1e-9));
        assert!(!config_approx_eq(&a, &b, 1e-9));
    }

    #[test]
    fn normalize_preserves_key() {
        let t = parse_term("d![r].0 | (0 | ok) | c?[x].0").unwrap();
        let n = normalize(&t);
        assert_eq!(term_key(&n), term_key(&t));
        assert_eq!(n.components().len(), 3);
    }
}
