//! Random well-typed source configurations for property campaigns.

use crate::cqp::{Config, Name, Term};
use crate::quantum::Gate;
use crate::StateVector;
use num_complex::Complex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

/// Shape limits for generated configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenParams {
    /// Register size, at most 4; allocation never grows past 4 either.
    pub qubits: usize,
    /// Nesting depth of prefixes, at most 6.
    pub max_depth: usize,
    /// Number of prefixes and parallel splits in the whole term.
    pub max_nodes: usize,
}

impl GenParams {
    pub const MAX_QUBITS: usize = 4;
    pub const MAX_DEPTH: usize = 6;

    pub fn new(qubits: usize) -> Self {
        GenParams { qubits: qubits.clamp(1, Self::MAX_QUBITS), max_depth: Self::MAX_DEPTH, max_nodes: 7 }
    }
}

/// System channels of every generated configuration.
const PHI: [&str; 2] = ["a", "b"];

struct Gen {
    rng: ChaCha8Rng,
    next_id: usize,
    nodes: usize,
    register: usize,
    params: GenParams,
}

impl Gen {
    fn fresh(&mut self, stem: &str) -> Name {
        self.next_id += 1;
        format!("{stem}{}", self.next_id)
    }

    fn leaf(&mut self) -> Term {
        if self.rng.gen_bool(0.4) {
            Term::Success
        } else {
            Term::Nil
        }
    }

    /// A process that may use exactly the qubits in `owned`.
    fn process(&mut self, owned: Vec<Name>, chans: Vec<Name>, depth: usize) -> Term {
        if depth == 0 || self.nodes == 0 {
            return self.leaf();
        }
        self.nodes -= 1;
        // Weighted menu of constructors applicable here.
        let mut menu: Vec<(u32, u8)> = vec![(1, 0), (1, 1), (1, 5), (2, 7), (2, 8)];
        if !owned.is_empty() {
            menu.extend([(3, 2), (2, 3), (2, 6)]);
        }
        if self.register < GenParams::MAX_QUBITS {
            menu.push((1, 4));
        }
        let total: u32 = menu.iter().map(|m| m.0).sum();
        let mut pick = self.rng.gen_range(0..total);
        let kind = menu.iter().find(|m| {
            if pick < m.0 {
                true
            } else {
                pick -= m.0;
                false
            }
        });
        let next = depth - 1;
        match kind.map(|m| m.1).unwrap_or(0) {
            0 => Term::Nil,
            1 => Term::Success,
            2 => {
                let two = owned.len() >= 2 && self.rng.gen_bool(0.3);
                let gate = if two {
                    *[Gate::Cnot, Gate::Swap].choose(&mut self.rng).unwrap()
                } else {
                    *[Gate::X, Gate::Y, Gate::Z, Gate::H, Gate::S, Gate::T].choose(&mut self.rng).unwrap()
                };
                let qubits: Vec<Name> = owned.choose_multiple(&mut self.rng, gate.arity()).cloned().collect();
                let body = self.process(owned, chans, next);
                Term::Trans { qubits, gate, body: Box::new(body) }
            }
            3 => {
                let r = self.rng.gen_range(1..=owned.len().min(2));
                let qubits: Vec<Name> = owned.choose_multiple(&mut self.rng, r).cloned().collect();
                let var = self.fresh("m");
                let mut chans = chans;
                chans.push(var.clone());
                let body = self.process(owned, chans, next);
                Term::Measure { qubits, var, body: Box::new(body) }
            }
            4 => {
                let var = self.fresh("v");
                self.register += 1;
                let mut owned = owned;
                owned.push(var.clone());
                let body = self.process(owned, chans, next);
                Term::NewQbit { var, body: Box::new(body) }
            }
            5 => {
                let var = self.fresh("n");
                let mut chans = chans;
                chans.push(var.clone());
                let body = self.process(owned, chans, next);
                Term::NewChan { var, body: Box::new(body) }
            }
            6 => {
                let chan = chans.choose(&mut self.rng).unwrap().clone();
                let qubit = owned.choose(&mut self.rng).unwrap().clone();
                let rest: Vec<Name> = owned.into_iter().filter(|q| *q != qubit).collect();
                let body = self.process(rest, chans, next);
                Term::Out { chan, qubit, body: Box::new(body) }
            }
            7 => {
                let chan = chans.choose(&mut self.rng).unwrap().clone();
                let var = self.fresh("x");
                let mut owned = owned;
                owned.push(var.clone());
                let body = self.process(owned, chans, next);
                Term::In { chan, var, body: Box::new(body) }
            }
            _ => {
                let (mut left, mut right) = (Vec::new(), Vec::new());
                for q in owned {
                    if self.rng.gen_bool(0.5) {
                        left.push(q);
                    } else {
                        right.push(q);
                    }
                }
                let a = self.process(left, chans.clone(), next);
                let b = self.process(right, chans, next);
                Term::par(a, b)
            }
        }
    }

    fn state(&mut self, names: Vec<Name>) -> StateVector {
        let dim = 1usize << names.len();
        let roll: f64 = self.rng.gen();
        if roll < 0.3 {
            let bits: Vec<bool> = (0..names.len()).map(|_| self.rng.gen_bool(0.5)).collect();
            return StateVector::basis(names, &bits).expect("register names are distinct");
        }
        loop {
            let sparse = roll < 0.5;
            let amps: Vec<Complex<f64>> = (0..dim)
                .map(|_| {
                    if sparse && self.rng.gen_bool(0.5) {
                        Complex::new(0.0, 0.0)
                    } else {
                        Complex::new(self.rng.gen_range(-1.0..1.0), self.rng.gen_range(-1.0..1.0))
                    }
                })
                .collect();
            if amps.iter().map(|a| a.norm_sqr()).sum::<f64>() > 1e-3 {
                return StateVector::normalized(names, amps).expect("nonzero amplitudes");
            }
        }
    }
}

/// Configuration over `params.qubits` register qubits `q0..` and system
/// channels `a`, `b`. Parallel components own disjoint qubits and a sent
/// qubit is never used again, so the result is well typed by construction.
/// Deterministic in `seed`.
pub fn gen_config_with(seed: u64, params: &GenParams) -> Config {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        next_id: 0,
        nodes: params.max_nodes,
        register: params.qubits,
        params: *params,
    };
    let names: Vec<Name> = (0..g.params.qubits).map(|i| format!("q{i}")).collect();
    let depth = g.rng.gen_range(1..=params.max_depth.min(GenParams::MAX_DEPTH));
    let mut chans: Vec<Name> = PHI.iter().map(|s| s.to_string()).collect();
    chans.extend(["0".to_string(), "1".to_string()]);
    let term = g.process(names.clone(), chans, depth);
    let sigma = g.state(names);
    Config::pure(sigma, PHI.iter().map(|s| s.to_string()).collect(), term)
}

/// [`gen_config_with`] at the default shape for `size` qubits.
pub fn gen_config(seed: u64, size: usize) -> Config {
    gen_config_with(seed, &GenParams::new(size))
}

/// A structurally congruent copy: parallel components shuffled and
/// regrouped, inert components inserted and binders renamed.
pub fn congruent_variant(c: &Config, seed: u64) -> Config {
    let mut used = HashSet::new();
    c.term().all_names(&mut used);
    used.extend(c.qubit_names().iter().cloned());
    used.extend(c.phi().iter().cloned());
    let mut v = Variant { rng: ChaCha8Rng::seed_from_u64(seed), used, next: 0 };
    let term = v.vary(c.term());
    match c {
        Config::Pure(p) => Config::pure(p.sigma.clone(), p.phi.clone(), term),
        Config::Dist(d) => Config::Dist(crate::cqp::DistConfig { term, ..d.clone() }),
    }
}

struct Variant {
    rng: ChaCha8Rng,
    used: HashSet<Name>,
    next: usize,
}

impl Variant {
    fn fresh(&mut self) -> Name {
        loop {
            self.next += 1;
            let n = format!("w{}", self.next);
            if self.used.insert(n.clone()) {
                return n;
            }
        }
    }

    fn vary(&mut self, t: &Term) -> Term {
        let renamed = if t.binder().is_some() && self.rng.gen_bool(0.5) {
            let to = self.fresh();
            t.rename_binder(&to)
        } else {
            t.clone()
        };
        let b = |body: &Term, s: &mut Self| Box::new(s.vary(body));
        match &renamed {
            Term::Nil | Term::Success => renamed,
            Term::Par(..) => {
                let mut comps: Vec<Term> = renamed.components().into_iter().map(|x| self.vary(x)).collect();
                if self.rng.gen_bool(0.3) {
                    let at = self.rng.gen_range(0..=comps.len());
                    comps.insert(at, Term::Nil);
                }
                comps.shuffle(&mut self.rng);
                if self.rng.gen_bool(0.5) {
                    Term::par_all(comps)
                } else {
                    Term::par_left(comps)
                }
            }
            Term::In { chan, var, body } => Term::In { chan: chan.clone(), var: var.clone(), body: b(body, self) },
            Term::Out { chan, qubit, body } => Term::Out { chan: chan.clone(), qubit: qubit.clone(), body: b(body, self) },
            Term::Trans { qubits, gate, body } => Term::Trans { qubits: qubits.clone(), gate: *gate, body: b(body, self) },
            Term::Measure { qubits, var, body } => Term::Measure { qubits: qubits.clone(), var: var.clone(), body: b(body, self) },
            Term::NewChan { var, body } => Term::NewChan { var: var.clone(), body: b(body, self) },
            Term::NewQbit { var, body } => Term::NewQbit { var: var.clone(), body: b(body, self) },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cqp::{congruent, typecheck_config};

    #[test]
    fn generated_configs_are_well_typed() {
        for seed in 0..300 {
            for size in 1..=4 {
                let c = gen_config(seed, size);
                assert!(typecheck_config(&c).is_ok(), "seed {seed}: {c}");
                assert_eq!(c.qubit_count(), size);
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(gen_config(42, 3), gen_config(42, 3));
        let distinct: HashSet<String> = (0..50).map(|s| gen_config(s, 2).to_string()).collect();
        assert!(distinct.len() > 25);
    }

    #[test]
    fn variants_are_congruent() {
        for seed in 0..200 {
            let c = gen_config(seed, 3);
            let v = congruent_variant(&c, seed + 1);
            assert!(congruent(&c, &v, 1e-9), "{c}\n{v}");
        }
    }
}
