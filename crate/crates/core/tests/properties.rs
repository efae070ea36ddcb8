//! Invariants of the calculi, the translation and the checkers over
//! generated inputs.

use proptest::prelude::*;
use qproc_core::cqp::{congruent, enumerate_steps, typecheck_config, Config, StepOptions};
use qproc_core::criteria::{
    build_lts, check_name_invariance, congruent_variant, corr_sim_check, gen_config, random_channel_map, Budget,
    CorrSimMode, CqpSystem, Matching, QccsSystem,
};
use qproc_core::encode::encode_config;
use qproc_core::quantum::Gate;
use qproc_core::{Amplitude, StateVector, SuperOperator};
use rand::SeedableRng;

const TOL: f64 = 1e-9;

fn budget() -> Budget {
    Budget { max_depth: 40, max_states: 5_000 }
}

fn state(n: usize, raw: &[(f64, f64)]) -> StateVector {
    let names: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
    let amps: Vec<Amplitude> = raw.iter().take(1 << n).map(|&(a, b)| Amplitude::new(a, b)).collect();
    StateVector::normalized(names, amps).unwrap()
}

fn amplitudes() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8)
        .prop_filter("nonzero", |v| v.iter().take(2).map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 96, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn generated_configs_are_well_typed(seed in any::<u64>(), size in 1usize..=4) {
        let c = gen_config(seed, size);
        prop_assert!(typecheck_config(&c).is_ok(), "{}", c);
        prop_assert_eq!(c.qubit_count(), size);
        let enc = encode_config(&c).unwrap();
        prop_assert!(enc.program.check_wellformed().is_ok());
        prop_assert_eq!(enc.config().rho.qubit_count(), size);
    }

    #[test]
    fn steps_preserve_normalisation(seed in 0u64..5_000, size in 1usize..=3) {
        let c = gen_config(seed, size);
        for s in enumerate_steps(&c, &StepOptions::default()) {
            match &s.target {
                Config::Pure(p) => prop_assert!((p.sigma.norm_sqr() - 1.0).abs() < TOL),
                Config::Dist(d) => {
                    let total: f64 = d.cases.iter().map(|k| k.probability).sum();
                    prop_assert!((total - 1.0).abs() < TOL);
                }
            }
        }
    }

    #[test]
    fn correspondence_simulation_is_reflexive(seed in 0u64..5_000, size in 1usize..=3) {
        let enc = encode_config(&gen_config(seed, size)).unwrap();
        let sys = QccsSystem { defs: enc.defs(), tolerance: TOL, labelled: true };
        let lts = build_lts(&sys, enc.config().clone(), budget()).unwrap();
        prop_assume!(!lts.stats().truncated);
        prop_assert!(corr_sim_check(&lts, &lts, CorrSimMode::default()).holds());
        let weak = CorrSimMode { matching: Matching::Weak, size_sensitive: true };
        prop_assert!(corr_sim_check(&lts, &lts, weak).holds());
    }

    #[test]
    fn congruent_sources_simulate_each_other(seed in 0u64..5_000, size in 1usize..=3) {
        let a = gen_config(seed, size);
        let b = congruent_variant(&a, seed + 1);
        prop_assert!(congruent(&a, &b, TOL));
        let (ea, eb) = (encode_config(&a).unwrap(), encode_config(&b).unwrap());
        let sys = QccsSystem { defs: ea.defs(), tolerance: TOL, labelled: true };
        let la = build_lts(&sys, ea.config().clone(), budget()).unwrap();
        let lb = build_lts(&sys, eb.config().clone(), budget()).unwrap();
        prop_assume!(!la.stats().truncated && !lb.stats().truncated);
        prop_assert!(corr_sim_check(&la, &lb, CorrSimMode::default()).holds());
        prop_assert!(corr_sim_check(&lb, &la, CorrSimMode::default()).holds());
    }

    #[test]
    fn source_and_translation_agree_on_success(seed in 0u64..5_000, size in 1usize..=3) {
        let c = gen_config(seed, size);
        let src = build_lts(&CqpSystem { opts: StepOptions::default() }, c.clone(), budget()).unwrap();
        let enc = encode_config(&c).unwrap();
        let sys = QccsSystem { defs: enc.defs(), tolerance: TOL, labelled: false };
        let tgt = build_lts(&sys, enc.config().clone(), budget()).unwrap();
        prop_assume!(!src.stats().truncated && !tgt.stats().truncated);
        prop_assert_eq!(src.may_reach_success().name(), tgt.may_reach_success().name());
        prop_assert_eq!(src.must_reach_success().name(), tgt.must_reach_success().name());
    }

    #[test]
    fn random_channel_renamings_commute(seed in 0u64..5_000, size in 1usize..=4) {
        let c = gen_config(seed, size);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let gamma = random_channel_map(&c, &mut rng);
        prop_assert!(check_name_invariance(&c, &gamma, TOL).unwrap().verdict.holds());
    }

    #[test]
    fn unitaries_and_measurement_preserve_trace(n in 1usize..=3, raw in amplitudes(), r in 0usize..=3) {
        let s = state(n, &raw);
        let names = s.names().to_vec();
        let rho = s.outer();
        for g in [Gate::H, Gate::X, Gate::Y, Gate::Z, Gate::S, Gate::T] {
            let out = SuperOperator::gate(g).apply(&names[..1], &rho, TOL).unwrap();
            prop_assert!((out.trace() - 1.0).abs() < 1e-9);
        }
        let r = r.min(n);
        let m = SuperOperator::meas_unknown(r).apply(&names[..r], &rho, TOL).unwrap();
        prop_assert!((m.trace() - 1.0).abs() < 1e-9);
        prop_assert!(m.is_hermitian(1e-9));
    }

    #[test]
    fn expected_outcome_matches_measured_post_state(n in 1usize..=3, raw in amplitudes(), r in 1usize..=3) {
        let s = state(n, &raw);
        let r = r.min(n);
        let names = s.names().to_vec();
        for o in s.measure_prefix(r, TOL).unwrap() {
            if let Some(post) = o.post_state {
                let e = SuperOperator::meas_expected(o.outcome, r).unwrap();
                let got = e.apply(&names[..r], &s.outer(), TOL).unwrap();
                prop_assert!(got.approx_eq(&post.outer(), 1e-8));
            }
        }
    }
}
