//! Acceptance checks, one line per criterion. Runs without the test
//! harness: `cargo test -p qproc-cli --test acceptance`.

use clap::Parser;
use qproc_cli::{execute, run_campaign, run_qccs, Cli, EXIT_FAILS, EXIT_OK};
use qproc_core::cqp::{enumerate_steps, parse_cqp, run, Config, Rule, Scheduler, StepOptions};
use qproc_core::criteria::{
    bisimilar, build_lts, corr_sim_check, counterexample_config, counterexample_suite, counterexample_table, gen_config, CheckOptions,
    CorrSimMode, QccsSystem, INSTANCE_CHECKS,
};
use qproc_core::encode::encode_config;
use qproc_core::qccs::{has_success, parse_qccs, parse_qccs_checked, reduce_steps, Condition, LoadError, WellFormedKind};
use qproc_core::{Amplitude, DensityMatrix, Matrix, StateVector, SuperOperator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

const TOL: f64 = 1e-9;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn model(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("models").join(name)
}

fn read_model(name: &str) -> String {
    std::fs::read_to_string(model(name)).expect("bundled model is readable")
}

/// Runs the command line in-process; returns exit status and output.
fn cli(args: &[&str]) -> (u8, String) {
    let mut argv = vec!["qproc"];
    argv.extend_from_slice(args);
    let parsed = Cli::try_parse_from(argv).expect("valid command line");
    let mut out = Vec::new();
    let code = match execute(&parsed, &mut out) {
        Ok(c) => c,
        Err(e) => e.exit_code(),
    };
    (code, String::from_utf8(out).expect("utf-8 output"))
}

fn r(x: f64) -> Amplitude {
    Amplitude::new(x, 0.0)
}

/// State over q0, q1, q2 with the given real amplitudes on basis indices.
fn ket3(entries: &[(usize, f64)]) -> StateVector {
    let mut amps = vec![r(0.0); 8];
    for &(i, a) in entries {
        amps[i] = r(a);
    }
    StateVector::new(vec!["q0".into(), "q1".into(), "q2".into()], amps, TOL).expect("normalised")
}

fn pure_state(c: &Config) -> Option<StateVector> {
    match c {
        Config::Pure(p) => Some(p.sigma.canonical()),
        Config::Dist(_) => None,
    }
}

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn psi1() -> StateVector {
    ket3(&[(0b110, H), (0b101, H)])
}

fn psi2() -> StateVector {
    ket3(&[(0b001, 0.5), (0b010, 0.5), (0b101, -0.5), (0b110, -0.5)])
}

/// Post-measurement states of the teleportation run, outcome by outcome.
fn posts() -> [StateVector; 4] {
    [ket3(&[(0b001, 1.0)]), ket3(&[(0b010, 1.0)]), ket3(&[(0b101, 1.0)]), ket3(&[(0b110, 1.0)])]
}

fn criterion_1() -> Check {
    let src = parse_cqp(&read_model("teleport.cqp")).map_err(|e| e.to_string())?;
    let trace = run(&src, &StepOptions::default(), &mut Scheduler::seeded(0).with_script([0]), 64).map_err(|e| e.to_string())?;
    let trans: Vec<&Config> = trace.steps.iter().filter(|s| s.rule == Rule::Trans).map(|s| &s.config).collect();
    ensure(trans.len() >= 2, || "fewer than two transformations".into())?;
    let s1 = pure_state(trans[0]).ok_or("first transformation left a distribution")?;
    let s2 = pure_state(trans[1]).ok_or("second transformation left a distribution")?;
    ensure(s1.approx_eq(&psi1(), TOL), || format!("psi1 mismatch: {s1:?}"))?;
    ensure(s2.approx_eq(&psi2(), TOL), || format!("psi2 mismatch: {s2:?}"))?;
    let dist = trace
        .steps
        .iter()
        .find_map(|s| match (&s.rule, &s.config) {
            (Rule::Measure, Config::Dist(d)) => Some(d),
            _ => None,
        })
        .ok_or("no measurement step")?;
    ensure(dist.cases.len() == 4, || format!("{} cases", dist.cases.len()))?;
    for (case, want) in dist.cases.iter().zip(posts()) {
        ensure((case.probability - 0.25).abs() < TOL, || format!("probability {}", case.probability))?;
        let got = case.state.as_ref().ok_or("a case has no post state")?.canonical();
        // Equal up to global phase: the stepper keeps the sign the
        // measurement leaves on outcomes 2 and 3.
        ensure(got.outer().approx_eq(&want.outer(), TOL), || format!("post state {got:?}"))?;
    }
    let final_success = trace.last().has_success();
    ensure(final_success, || "scripted branch 0 does not reach success".into())?;
    let last = pure_state(trace.last()).ok_or("run ended in a distribution")?;
    ensure(last.approx_eq(&posts()[0], TOL), || format!("final state {last:?}"))?;
    let path = model("teleport.cqp");
    let (code, out) = cli(&["run", path.to_str().unwrap(), "--script", "0"]);
    ensure(code == EXIT_OK && out.contains("final: q0,q1,q2 = |001>\nSUCCESS"), || out.clone())?;
    Ok("psi1, psi2, four cases of p = 1/4, branch 0 ends in |001> with SUCCESS".into())
}

fn criterion_2() -> Check {
    let path = model("teleport.cqp");
    let (code, emitted) = cli(&["translate", path.to_str().unwrap()]);
    ensure(code == EXIT_OK, || format!("translate exited {code}"))?;
    ensure(emitted == read_model("teleport-encoded.qccs"), || "translation differs from teleport-encoded.qccs".into())?;
    for k in 0..4 {
        let branch = format!("if tr(E{{{k}}}[q0,q1]) != 0 then E{{{k}}}[q0,q1].{k}!a.nil");
        ensure(emitted.contains(&branch), || format!("missing branch `{branch}`"))?;
    }
    let p = parse_qccs(&emitted).map_err(|e| e.to_string())?;
    ensure(parse_qccs(&p.emit()).map(|q| q.emit()) == Ok(p.emit()), || "emit is not idempotent".into())?;
    let rho0 = ket3(&[(0b100, H), (0b111, H)]).outer();
    ensure(p.config.rho.approx_eq(&rho0, TOL), || "initial density differs".into())?;
    let t = run_qccs(&p.config, &p.defs, TOL, &[0], 0, 64)?;
    let opers: Vec<&DensityMatrix> = t.steps.iter().filter(|s| s.rule == "Oper").map(|s| &s.config.rho).collect();
    ensure(opers.len() >= 4, || format!("{} operator steps", opers.len()))?;
    let rho3 = DensityMatrix::mixture(&posts().map(|s| (0.25, s))).map_err(|e| e.to_string())?;
    let expected = [psi1().outer(), psi2().outer(), rho3, posts()[0].outer()];
    for (i, (got, want)) in opers.iter().zip(&expected).enumerate() {
        ensure(got.approx_eq(want, TOL), || format!("rho{} differs", i + 1))?;
    }
    ensure(has_success(&t.last().term, &p.defs), || "translation does not reach success".into())?;
    Ok("translation matches the bundled file; rho1..rho4 match; success reached".into())
}

fn criterion_3() -> Check {
    let rows = counterexample_suite(&CheckOptions::default()).map_err(|e| e.to_string())?;
    let s = std::f64::consts::SQRT_2 / 2.0;
    let m = |a: [f64; 4]| Matrix::from_rows(vec![vec![r(a[0]), r(a[1])], vec![r(a[2]), r(a[3])]]).unwrap();
    let want = [
        ("|0>", m([1.0, 0.0, 0.0, 0.0]), "must-success"),
        ("|1>", m([-1.0, 0.0, 0.0, 2.0]), "may-not-must"),
        ("|+>", m([0.0, s, s, 1.0]), "cannot"),
        ("|->", m([0.0, -s, -s, 1.0]), "cannot"),
    ];
    ensure(rows.len() == 4, || format!("{} rows", rows.len()))?;
    for (row, (state, q, class)) in rows.iter().zip(&want) {
        ensure(row.state == *state, || format!("row order: {}", row.state))?;
        ensure(row.q_rho.approx_eq(q, TOL), || format!("Q({state}) = {:?}", row.q_rho))?;
        ensure(row.classification() == *class, || format!("{state}: {}", row.classification()))?;
    }
    let table = "\
state  Q(rho)                             match  may           must          class
|0>    [[1, 0], [0, 0]]                   yes    Holds         Holds         must-success
|1>    [[-1, 0], [0, 2]]                  yes    Holds         Fails         may-not-must
|+>    [[0, 0.707107], [0.707107, 1]]     yes    Fails         Fails         cannot
|->    [[0, -0.707107], [-0.707107, 1]]   yes    Fails         Fails         cannot
";
    ensure(counterexample_table(&rows) == table, || counterexample_table(&rows))?;
    let (code, out) = cli(&["counterexample"]);
    ensure(code == EXIT_OK && out == table, || out.clone())?;
    let bundled = parse_qccs(&read_model("counterexample.qccs")).map_err(|e| e.to_string())?;
    let built = counterexample_config("|1>").map_err(|e| e.to_string())?;
    ensure(bundled.emit() == built.emit(), || "counterexample.qccs is not the |1> instance".into())?;
    Ok("Q values and must / may-not-must / cannot / cannot table match".into())
}

fn criterion_4() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in 0..200 {
        let n = rng.gen_range(1..=3usize);
        let r_ = rng.gen_range(0..=n);
        let names: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
        let amps: Vec<Amplitude> = (0..1 << n).map(|_| Amplitude::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let s = StateVector::normalized(names.clone(), amps).map_err(|e| e.to_string())?;
        let mut sum: Option<DensityMatrix> = None;
        for o in s.measure_prefix(r_, TOL).map_err(|e| e.to_string())? {
            if let Some(post) = o.post_state {
                let term = post.outer().scale(o.probability);
                sum = Some(match sum {
                    None => term,
                    Some(acc) => acc.add(&term).map_err(|e| e.to_string())?,
                });
            }
        }
        let sum = sum.ok_or("no outcome with nonzero probability")?;
        let applied = SuperOperator::meas_unknown(r_).apply(&names[..r_], &s.outer(), TOL).map_err(|e| e.to_string())?;
        ensure(sum.approx_eq(&applied, TOL), || format!("instance {k}: n = {n}, r = {r_}"))?;
    }
    let src = parse_cqp(&read_model("measurement.cqp")).map_err(|e| e.to_string())?;
    let enc = encode_config(&src).map_err(|e| e.to_string())?;
    let step = reduce_steps(enc.config(), enc.defs(), TOL)
        .map_err(|e| e.to_string())?
        .into_iter()
        .find(|s| s.rule == "Oper")
        .ok_or("no measurement step in the translation")?;
    let half = StateVector::basis(vec!["q".into()], &[false]).unwrap().outer().scale(0.5);
    let want = half.add(&StateVector::basis(vec!["q".into()], &[true]).unwrap().outer().scale(0.5)).unwrap();
    ensure(step.target.rho.approx_eq(&want, TOL), || format!("{:?}", step.target.rho))?;
    Ok("200 random states agree; the single-qubit example gives rho' = 1/2 |0><0| + 1/2 |1><1|".into())
}

fn criterion_5() -> Check {
    let n = 500;
    let (results, summary) = run_campaign(0, n, &CheckOptions::default());
    ensure(summary.instances == n as usize, || "instance count".into())?;
    for name in INSTANCE_CHECKS {
        ensure(summary.checks.get(name).is_some_and(|t| t.holds + t.fails + t.inconclusive == n as usize), || {
            format!("check `{name}` missing")
        })?;
    }
    if let Some(bad) = results.iter().find(|r| r.failures().next().is_some()) {
        let (name, v) = bad.failures().next().unwrap();
        return Err(format!("seed {}: {name}: {v:?}\n{}", bad.seed, bad.config));
    }
    let rate = summary.inconclusive_rate();
    ensure(rate < 0.01, || format!("inconclusive rate {rate}"))?;
    Ok(format!(
        "{n} instances, 0 fails, {} inconclusive ({:.2}%), {} states explored",
        summary.inconclusive_instances,
        100.0 * rate,
        summary.stats.states
    ))
}

fn criterion_6() -> Check {
    let src = parse_cqp(&read_model("measurement.cqp")).map_err(|e| e.to_string())?;
    let opts = StepOptions::default();
    let s_prime = enumerate_steps(&src, &opts)
        .into_iter()
        .find(|s| s.rule == Rule::Measure)
        .ok_or("source cannot measure")?
        .target;
    let enc = encode_config(&src).map_err(|e| e.to_string())?;
    let sys = QccsSystem { defs: enc.defs(), tolerance: TOL, labelled: true };
    let t = reduce_steps(enc.config(), enc.defs(), TOL)
        .map_err(|e| e.to_string())?
        .into_iter()
        .find(|s| s.rule == "Oper")
        .ok_or("translation cannot measure")?
        .target;
    let budget = CheckOptions::default().budget;
    let lts = |c| build_lts(&sys, c, budget).map_err(|e| e.to_string());
    let enc_s_prime = lts(encode_config(&s_prime).map_err(|e| e.to_string())?.program.config)?;
    let t_lts = lts(t.clone())?;
    let forward = corr_sim_check(&enc_s_prime, &t_lts, CorrSimMode::default());
    ensure(forward.holds(), || format!("completeness direction: {forward:?}"))?;
    // Each resolution of the target's choice is matched by the source's
    // probabilistic step to the same outcome.
    let branches = enumerate_steps(&s_prime, &opts);
    let choices: Vec<_> =
        qproc_core::qccs::lts_steps(&t, enc.defs(), TOL).map_err(|e| e.to_string())?.into_iter().filter(|s| s.via_choice).collect();
    ensure(!choices.is_empty() && choices.len() == branches.len(), || format!("{} choices", choices.len()))?;
    for c in &choices {
        let tj = lts(c.target.clone())?;
        let mut matched = false;
        for b in &branches {
            let sj = lts(encode_config(&b.target).map_err(|e| e.to_string())?.program.config)?;
            matched |= corr_sim_check(&sj, &tj, CorrSimMode::default()).holds();
        }
        ensure(matched, || format!("no source branch matches {}", c.target))?;
    }
    let backward = corr_sim_check(&t_lts, &enc_s_prime, CorrSimMode::default());
    let bisim = bisimilar(&enc_s_prime, &t_lts);
    ensure(bisim.is_fails(), || format!("bisimulation diagnostic: {bisim:?}"))?;
    Ok(format!(
        "corr-sim Holds for the measured source against the target and for all {} branches; bisimulation {} (reverse preorder {})",
        choices.len(),
        bisim.name(),
        backward.name()
    ))
}

fn criterion_7() -> Check {
    let mut count = 0;
    for seed in 0..500u64 {
        let c = gen_config(seed, 1 + (seed % 4) as usize);
        let out = encode_config(&c).map_err(|e| e.to_string())?;
        out.program.check_wellformed().map_err(|e| format!("seed {seed}: {e}\n{c}"))?;
        count += 1;
    }
    let cases = [
        ("state qubits q; rho = outer(|0>);\nprocess c!q.H[q].nil;", Condition::Cond1, 2),
        ("state qubits q, r; rho = outer(|00>);\nprocess H[q].nil | X[r].nil | c!r.nil | Z[q].nil;", Condition::Cond2, 2),
        ("state qubits q; rho = outer(|0>);\ndef P(x) = c!x.X[x].nil;\nprocess P(q);", Condition::Cond1, 2),
    ];
    for (src, cond, line) in cases {
        match parse_qccs_checked(src) {
            Err(LoadError::WellFormed(e)) => {
                ensure(matches!(e.kind, WellFormedKind::NoCloningViolation { cond: c, .. } if c == cond), || e.to_string())?;
                let pos = e.pos.ok_or_else(|| format!("no location: {e}"))?;
                ensure(pos.line == line, || format!("located at {pos}: {e}"))?;
            }
            other => return Err(format!("`{src}` accepted: {other:?}")),
        }
    }
    let path = model("teleport-encoded.qccs");
    let (code, out) = cli(&["typecheck", path.to_str().unwrap()]);
    ensure(code == EXIT_FAILS && out.contains("Cond2 violation on qubit `q2`"), || out.clone())?;
    Ok(format!("{count} translations well-formed; injected Cond1/Cond2 violations rejected with locations"))
}

fn criterion_8() -> Check {
    let file = model("measurement.cqp");
    let f = file.to_str().unwrap();
    let invocations: [&[&str]; 5] = [
        &["check", "completeness", f, "--format", "json", "--seed", "11"],
        &["check", "soundness", f, "--format", "json", "--seed", "11"],
        &["check", "name-inv", f, "--format", "json", "--seed", "11"],
        &["check", "qubit-inv", f, "--format", "json", "--seed", "12"],
        &["campaign", "--count", "40", "--format", "json", "--seed", "5"],
    ];
    for args in invocations {
        let (c1, a) = cli(args);
        let (c2, b) = cli(args);
        ensure(c1 == c2 && a == b, || format!("outputs differ for {args:?}"))?;
        ensure(a.contains("\"schema\": 1"), || format!("no schema tag in {a}"))?;
        ensure(c1 == EXIT_OK, || format!("{args:?} exited {c1}: {a}"))?;
    }
    std::env::set_var("QPROC_SEED", "77");
    let (_, from_env) = cli(&["check", "name-inv", f, "--format", "json"]);
    std::env::remove_var("QPROC_SEED");
    ensure(from_env.contains("\"seed\": 77"), || from_env.clone())?;
    Ok("repeated check and campaign runs give byte-identical JSON".into())
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 8] = [
        ("teleportation source run", criterion_1),
        ("teleportation translation", criterion_2),
        ("non-unitary counterexample table", criterion_3),
        ("measurement linkage", criterion_4),
        ("property campaign", criterion_5),
        ("correspondence simulation vs bisimulation", criterion_6),
        ("well-formedness bridge", criterion_7),
        ("determinism", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {}: PASS {name} ({secs:.2}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
