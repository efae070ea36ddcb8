//! Static properties of the translation: it commutes with renamings and
//! maps congruent sources to congruent targets.

use super::{CriteriaError, Outcome, Stats, Verdict};
use crate::cqp::{self, Config, Name};
use crate::encode::encode_config;
use crate::names::is_integer_literal;
use crate::qccs::{alpha_key, qccs_congruent, subst_qubits, QccsConfig};
use crate::quantum::QuantumError;
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};

fn outcome(verdict: Verdict) -> Outcome {
    Outcome { verdict, stats: Stats::default() }
}

/// Channel names of a configuration that a renaming may touch: free and
/// system channels, excluding integer literals, which are values.
fn channel_names(c: &Config) -> BTreeSet<Name> {
    let reg: BTreeSet<&Name> = c.qubit_names().iter().collect();
    let mut out: BTreeSet<Name> = c.term().free_names().into_iter().filter(|n| !reg.contains(n)).collect();
    out.extend(c.phi().iter().cloned());
    if let Config::Dist(d) = c {
        out.remove(&d.var);
    }
    out.retain(|n| !is_integer_literal(n));
    out
}

/// `map` restricted to `domain` must be injective and must not send a
/// name onto another name of `domain` or onto one of `avoid`.
fn check_injective(map: &BTreeMap<Name, Name>, domain: &BTreeSet<Name>, avoid: &BTreeSet<Name>) -> Result<(), String> {
    let mut image: BTreeMap<&Name, &Name> = BTreeMap::new();
    for n in domain {
        let to = map.get(n).unwrap_or(n);
        if map.contains_key(n) && avoid.contains(to) {
            return Err(format!("`{n}` is renamed onto `{to}`, which is already in use"));
        }
        if let Some(prev) = image.insert(to, n) {
            return Err(format!("`{prev}` and `{n}` are both renamed to `{to}`"));
        }
    }
    Ok(())
}

fn same(a: &QccsConfig, b: &QccsConfig, tol: f64) -> bool {
    alpha_key(&a.term) == alpha_key(&b.term) && a.rho.approx_eq(&b.rho, tol)
}

fn mismatch(a: &QccsConfig, b: &QccsConfig) -> Vec<String> {
    vec![format!("translation of the renamed source: {}", a.term), format!("renamed translation: {}", b.term)]
}

/// Renaming channels before or after translating gives the same result up
/// to alpha-conversion. `gamma` must be injective on the channels of `src`
/// and leave qubits and integer literals alone.
pub fn check_name_invariance(src: &Config, gamma: &BTreeMap<Name, Name>, tol: f64) -> Result<Outcome, CriteriaError> {
    let reg: BTreeSet<Name> = src.qubit_names().iter().cloned().collect();
    if let Some(k) = gamma.keys().find(|k| reg.contains(*k) || is_integer_literal(k)) {
        return Err(CriteriaError::Precondition(format!("`{k}` is not a channel name")));
    }
    check_injective(gamma, &channel_names(src), &reg).map_err(CriteriaError::Precondition)?;
    let renamed = encode_config(&src.rename(gamma)?)?.program.config;
    let base = encode_config(src)?.program.config;
    let after = QccsConfig { term: base.term.subst(gamma), rho: base.rho };
    Ok(outcome(Verdict::from_bool(same(&renamed, &after, tol), || mismatch(&renamed, &after))))
}

/// Renaming register qubits before or after translating gives the same
/// result. A renaming that merges qubits is rejected.
pub fn check_qubit_invariance(src: &Config, gamma: &BTreeMap<Name, Name>, tol: f64) -> Result<Outcome, CriteriaError> {
    let reg: BTreeSet<Name> = src.qubit_names().iter().cloned().collect();
    if let Some(k) = gamma.keys().find(|k| !reg.contains(*k)) {
        return Err(CriteriaError::Precondition(format!("`{k}` is not a register qubit")));
    }
    let mut others = channel_names(src);
    others.extend(src.term().free_names().into_iter().filter(|n| is_integer_literal(n)));
    check_injective(gamma, &reg, &others).map_err(|m| CriteriaError::Quantum(QuantumError::NoCloningViolation(m)))?;
    let renamed = encode_config(&src.rename(gamma)?)?.program.config;
    let base = encode_config(src)?.program.config;
    let after = QccsConfig { term: subst_qubits(&base.term, gamma)?, rho: base.rho.rename(gamma)? };
    Ok(outcome(Verdict::from_bool(same(&renamed, &after, tol), || mismatch(&renamed, &after))))
}

/// Congruent sources have congruent translations.
pub fn check_congruence_preservation(a: &Config, b: &Config, tol: f64) -> Result<Outcome, CriteriaError> {
    if !cqp::congruent(a, b, tol) {
        return Err(CriteriaError::Precondition("the two sources are not structurally congruent".into()));
    }
    let (ea, eb) = (encode_config(a)?.program.config, encode_config(b)?.program.config);
    Ok(outcome(Verdict::from_bool(qccs_congruent(&ea, &eb, tol), || {
        vec![format!("first translation: {}", ea.term), format!("second translation: {}", eb.term)]
    })))
}

/// Random injective renaming of the channels of `src` onto fresh names.
pub fn random_channel_map(src: &Config, rng: &mut impl Rng) -> BTreeMap<Name, Name> {
    let names: Vec<Name> = channel_names(src).into_iter().collect();
    let mut ids: Vec<usize> = (0..names.len()).collect();
    ids.shuffle(rng);
    names.into_iter().zip(ids).filter(|_| rng.gen_bool(0.8)).map(|(n, i)| (n, format!("k{i}"))).collect()
}

/// Random bijection from the register onto fresh qubit names.
pub fn random_qubit_map(src: &Config, rng: &mut impl Rng) -> BTreeMap<Name, Name> {
    let names = src.qubit_names().to_vec();
    let mut ids: Vec<usize> = (0..names.len()).collect();
    ids.shuffle(rng);
    names.into_iter().zip(ids).map(|(n, i)| (n, format!("r{i}"))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cqp::parse_cqp;

    const TELEPORT_LIKE: &str = "qubits q0, q1; state 1/sqrt(2)|00> + 1/sqrt(2)|11>; channels a, b; \
        process (x := measure q0).x![q1].0 | (new c)(a?[y].b![y].0 | c![q0].0)";

    fn map(pairs: &[(&str, &str)]) -> BTreeMap<Name, Name> {
        pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn identity_renaming_holds() {
        let c = parse_cqp("qubits q; state |0>; process 0").unwrap();
        assert!(check_name_invariance(&c, &BTreeMap::new(), 1e-9).unwrap().verdict.holds());
        assert!(check_qubit_invariance(&c, &BTreeMap::new(), 1e-9).unwrap().verdict.holds());
    }

    #[test]
    fn channel_renaming_commutes_with_translation() {
        let c = parse_cqp("qubits q; channels a, b; process a![q].0 | b?[y].0").unwrap();
        assert!(check_name_invariance(&c, &map(&[("a", "b"), ("b", "a")]), 1e-9).unwrap().verdict.holds());
        assert!(check_name_invariance(&c, &map(&[("a", "b")]), 1e-9).is_err());
    }

    #[test]
    fn qubit_swap_commutes_with_translation() {
        let c = parse_cqp("qubits q0, q1; state |01>; process {q0 *= H}.0 | c![q1].0").unwrap();
        assert!(check_qubit_invariance(&c, &map(&[("q0", "q1"), ("q1", "q0")]), 1e-9).unwrap().verdict.holds());
        let merge = map(&[("q0", "q1")]);
        assert!(matches!(
            check_qubit_invariance(&c, &merge, 1e-9),
            Err(CriteriaError::Quantum(QuantumError::NoCloningViolation(_)))
        ));
    }

    #[test]
    fn random_maps_are_accepted() {
        use rand::SeedableRng;
        let c = parse_cqp(TELEPORT_LIKE).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let g = random_channel_map(&c, &mut rng);
            assert!(check_name_invariance(&c, &g, 1e-9).unwrap().verdict.holds());
            let g = random_qubit_map(&c, &mut rng);
            assert!(check_qubit_invariance(&c, &g, 1e-9).unwrap().verdict.holds());
        }
    }

    #[test]
    fn congruent_sources_translate_congruently() {
        let a = parse_cqp("qubits q0, q1; process {q0 *= H}.0 | (new c)c![q1].0").unwrap();
        let b = parse_cqp("qubits q0, q1; process (new d)d![q1].0 | 0 | {q0 *= H}.0").unwrap();
        assert!(check_congruence_preservation(&a, &b, 1e-9).unwrap().verdict.holds());
    }
}
