use crate::qrun::run_qccs;
use crate::{CheckKind, Cli, Command, Format, RunOptions, EXIT_FAILS, EXIT_INCONCLUSIVE, EXIT_OK};
use qproc_core::cqp::{self, enumerate_steps, parse_cqp, typecheck_config, Config, Scheduler, StopReason};
use qproc_core::criteria::{
    check_completeness, check_congruence_preservation, check_divergence_reflection, check_instance, check_name_invariance,
    check_qubit_invariance, check_register_size, check_soundness, check_success_sensitiveness, counterexample_suite,
    counterexample_table, random_channel_map, random_qubit_map, CampaignSummary, CheckOptions, CriteriaError, InstanceResult,
    Outcome, Report, Stats, Verdict,
};
use qproc_core::encode::encode_config;
use qproc_core::qccs::{lts_steps, parse_qccs, Program};
use qproc_core::syntax::{fmt_complex, fmt_ket_sum};
use qproc_core::{DensityMatrix, Matrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad invocation: unreadable file, unknown extension, malformed flag.
    #[error("{0}")]
    Usage(String),
    /// The input was read but rejected: syntax, typing or a failed
    /// precondition.
    #[error("{0}")]
    Input(String),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Output(_) => crate::EXIT_USAGE,
            CliError::Input(_) => EXIT_FAILS,
        }
    }
}

enum Input {
    Cqp(Config),
    Qccs(Box<Program>),
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Input, CliError> {
    let src = read(path)?;
    let located = |e: &dyn std::fmt::Display| CliError::Input(format!("{}:{e}", path.display()));
    match path.extension().and_then(|e| e.to_str()) {
        Some("cqp") => parse_cqp(&src).map(Input::Cqp).map_err(|e| located(&e)),
        Some("qccs") => parse_qccs(&src).map(|p| Input::Qccs(Box::new(p))).map_err(|e| located(&e)),
        _ => Err(CliError::Usage(format!("{}: expected a .cqp or .qccs file", path.display()))),
    }
}

fn load_cqp(path: &Path) -> Result<Config, CliError> {
    match load(path)? {
        Input::Cqp(c) => Ok(c),
        Input::Qccs(_) => Err(CliError::Usage(format!("{}: this command needs a .cqp file", path.display()))),
    }
}

fn verdict_code(v: &Verdict) -> u8 {
    match v {
        Verdict::Holds => EXIT_OK,
        Verdict::Fails { .. } => EXIT_FAILS,
        Verdict::Inconclusive { .. } => EXIT_INCONCLUSIVE,
    }
}

fn print_json(out: &mut dyn Write, v: &impl Serialize) -> Result<(), CliError> {
    let s = serde_json::to_string_pretty(v).map_err(|e| CliError::Output(e.into()))?;
    writeln!(out, "{s}")?;
    Ok(())
}

fn fmt_matrix_rows(m: &Matrix) -> Vec<String> {
    (0..m.dim()).map(|r| (0..m.dim()).map(|c| fmt_complex(m.get(r, c))).collect::<Vec<_>>().join("  ")).collect()
}

fn fmt_density(rho: &DensityMatrix) -> String {
    let rho = rho.canonical();
    format!("rho over [{}]:\n  {}", rho.names().join(", "), fmt_matrix_rows(rho.matrix()).join("\n  "))
}

fn fmt_final(c: &Config) -> String {
    match c {
        Config::Pure(p) => {
            let s = p.sigma.canonical();
            format!("{} = {}", s.names().join(","), fmt_ket_sum(&s))
        }
        Config::Dist(_) => c.to_string(),
    }
}

/// Emits a report for one verdict and returns its exit status.
fn report(out: &mut dyn Write, opts: &RunOptions, check: &str, o: &Outcome) -> Result<u8, CliError> {
    match opts.format {
        Format::Json => print_json(out, &Report::new(check, o, opts.tolerance, opts.seed))?,
        Format::Text => {
            writeln!(out, "{check}: {}", o.verdict.name())?;
            match &o.verdict {
                Verdict::Holds => {}
                Verdict::Fails { witness } => {
                    for w in witness {
                        writeln!(out, "  {w}")?;
                    }
                }
                Verdict::Inconclusive { reason } => writeln!(out, "  {reason}")?,
            }
            let s = o.stats;
            if s != Stats::default() {
                writeln!(out, "states {} edges {} depth {} truncated {}", s.states, s.edges, s.depth, s.truncated)?;
            }
        }
    }
    Ok(verdict_code(&o.verdict))
}

fn parse_map(pairs: &[String]) -> Result<BTreeMap<String, String>, CliError> {
    pairs
        .iter()
        .map(|p| match p.split_once('=') {
            Some((a, b)) if !a.is_empty() && !b.is_empty() => Ok((a.trim().to_string(), b.trim().to_string())),
            _ => Err(CliError::Usage(format!("renaming entry `{p}` is not of the form old=new"))),
        })
        .collect()
}

fn criteria_error(e: CriteriaError) -> CliError {
    CliError::Input(e.to_string())
}

/// Runs the generated instances `start..start + count` in parallel.
/// Results come back in seed order, so the summary does not depend on
/// scheduling.
pub fn run_campaign(start: u64, count: u64, o: &CheckOptions) -> (Vec<InstanceResult>, CampaignSummary) {
    let results: Vec<InstanceResult> = (start..start + count).into_par_iter().map(|s| check_instance(s, o)).collect();
    let summary = CampaignSummary::from_results(&results);
    (results, summary)
}

/// Executes one command, writing its output to `out`, and returns the
/// exit status.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<u8, CliError> {
    let opts = &cli.opts;
    match &cli.command {
        Command::Parse { file } => cmd_parse(file, opts, out),
        Command::Typecheck { file } => cmd_typecheck(file, opts, out),
        Command::Run { file } => cmd_run(file, opts, out),
        Command::Steps { file } => cmd_steps(file, opts, out),
        Command::Translate { file, output } => cmd_translate(file, output.as_deref(), opts, out),
        Command::Check { which, file, other, map } => cmd_check(*which, file, other.as_deref(), map, opts, out),
        Command::Counterexample => cmd_counterexample(opts, out),
        Command::Campaign { count } => cmd_campaign(*count, opts, out),
    }
}

fn cmd_parse(file: &Path, opts: &RunOptions, out: &mut dyn Write) -> Result<u8, CliError> {
    let (kind, shown, tree) = match load(file)? {
        Input::Cqp(c) => ("cqp", c.to_string(), format!("{:#?}", c.term())),
        Input::Qccs(p) => ("qccs", p.emit(), format!("{:#?}", p.config.term)),
    };
    match opts.format {
        Format::Json => print_json(out, &json!({ "schema": Report::SCHEMA, "kind": kind, "config": shown, "tree": tree }))?,
        Format::Text => writeln!(out, "{}\n{tree}", shown.trim_end())?,
    }
    Ok(EXIT_OK)
}

fn cmd_typecheck(file: &Path, opts: &RunOptions, out: &mut dyn Write) -> Result<u8, CliError> {
    let (check, verdict) = match load(file)? {
        Input::Cqp(c) => (
            "typecheck",
            match typecheck_config(&c) {
                Ok(()) => Verdict::Holds,
                Err(e) => Verdict::fails(vec![e.to_string()]),
            },
        ),
        Input::Qccs(p) => (
            "wellformed",
            match p.check_wellformed() {
                Ok(()) => Verdict::Holds,
                Err(e) => Verdict::fails(vec![format!("{}:{e}", file.display())]),
            },
        ),
    };
    report(out, opts, check, &Outcome { verdict, stats: Stats::default() })
}

fn cmd_run(file: &Path, opts: &RunOptions, out: &mut dyn Write) -> Result<u8, CliError> {
    match load(file)? {
        Input::Cqp(c) => {
            let mut sched = Scheduler::seeded(opts.seed).with_script(opts.script.iter().copied());
            let t = cqp::run(&c, &opts.step_options(), &mut sched, opts.max_depth).map_err(|e| CliError::Input(e.to_string()))?;
            let last = t.last();
            let success = last.has_success();
            let stop = match t.stop {
                StopReason::Terminated => "terminated",
                StopReason::Budget => "step budget reached",
            };
            match opts.format {
                Format::Json => {
                    let steps: Vec<_> =
                        t.steps.iter().map(|s| json!({ "rule": s.rule.to_string(), "config": s.config.to_string() })).collect();
                    print_json(
                        out,
                        &json!({
                            "schema": Report::SCHEMA, "command": "run", "seed": opts.seed,
                            "initial": t.initial.to_string(), "steps": steps,
                            "final": fmt_final(last), "success": success, "stop": stop,
                        }),
                    )?
                }
                Format::Text => {
                    writeln!(out, "initial: {}", t.initial)?;
                    for (i, s) in t.steps.iter().enumerate() {
                        writeln!(out, "[{}] {}: {}", i + 1, s.rule, s.config)?;
                    }
                    writeln!(out, "final: {}", fmt_final(last))?;
                    writeln!(out, "{}", if success { "SUCCESS" } else { "no success" })?;
                    writeln!(out, "stopped: {stop}")?;
                }
            }
        }
        Input::Qccs(p) => {
            let t = run_qccs(&p.config, &p.defs, opts.tolerance, &opts.script, opts.seed, opts.max_depth)
                .map_err(CliError::Input)?;
            let last = t.last();
            let success = qproc_core::qccs::has_success(&last.term, &p.defs);
            let stop = if t.terminated { "terminated" } else { "step budget reached" };
            match opts.format {
                Format::Json => {
                    let steps: Vec<_> = t
                        .steps
                        .iter()
                        .map(|s| {
                            json!({
                                "rule": s.rule, "via_choice": s.via_choice, "term": s.config.term.to_string(),
                                "rho": fmt_matrix_rows(s.config.rho.canonical().matrix()),
                            })
                        })
                        .collect();
                    print_json(
                        out,
                        &json!({
                            "schema": Report::SCHEMA, "command": "run", "seed": opts.seed,
                            "initial": t.initial.term.to_string(), "steps": steps,
                            "final": last.term.to_string(), "success": success, "stop": stop,
                        }),
                    )?
                }
                Format::Text => {
                    writeln!(out, "initial: {}", t.initial.term)?;
                    writeln!(out, "{}", fmt_density(&t.initial.rho))?;
                    for (i, s) in t.steps.iter().enumerate() {
                        let choice = if s.via_choice { " (choice)" } else { "" };
                        writeln!(out, "[{}] {}{choice}: {}", i + 1, s.rule, s.config.term)?;
                        writeln!(out, "{}", fmt_density(&s.config.rho))?;
                    }
                    writeln!(out, "{}", if success { "SUCCESS" } else { "no success" })?;
                    writeln!(out, "stopped: {stop}")?;
                }
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_steps(file: &Path, opts: &RunOptions, out: &mut dyn Write) -> Result<u8, CliError> {
    let rows: Vec<(String, String)> = match load(file)? {
        Input::Cqp(c) => enumerate_steps(&c, &opts.step_options()).into_iter().map(|s| (s.rule.to_string(), s.target.to_string())).collect(),
        Input::Qccs(p) => lts_steps(&p.config, &p.defs, opts.tolerance)
            .map_err(|e| CliError::Input(e.to_string()))?
            .into_iter()
            .map(|s| {
                let choice = if s.via_choice { ", choice" } else { "" };
                (format!("{} [{}{choice}]", s.label, s.rule), s.target.to_string())
            })
            .collect(),
    };
    match opts.format {
        Format::Json => {
            let steps: Vec<_> = rows.iter().map(|(r, t)| json!({ "step": r, "target": t })).collect();
            print_json(out, &json!({ "schema": Report::SCHEMA, "command": "steps", "steps": steps }))?
        }
        Format::Text => {
            if rows.is_empty() {
                writeln!(out, "no step is enabled")?;
            }
            for (i, (r, t)) in rows.iter().enumerate() {
                writeln!(out, "{i}: {r} -> {t}")?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_translate(file: &Path, output: Option<&Path>, opts: &RunOptions, out: &mut dyn Write) -> Result<u8, CliError> {
    let c = load_cqp(file)?;
    let enc = encode_config(&c).map_err(|e| CliError::Input(e.to_string()))?;
    let text = enc.program.emit();
    if let Some(path) = output {
        std::fs::write(path, &text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    }
    match opts.format {
        Format::Json => {
            let ops: Vec<_> = enc.op_table.iter().map(|e| json!({ "op": e.op.to_string(), "arity": e.arity })).collect();
            print_json(out, &json!({ "schema": Report::SCHEMA, "command": "translate", "qccs": text, "op_table": ops }))?
        }
        Format::Text if output.is_none() => write!(out, "{text}")?,
        Format::Text => {
            for e in &enc.op_table {
                writeln!(out, "{} / {}", e.op, e.arity)?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_check(
    which: CheckKind,
    file: &Path,
    other: Option<&Path>,
    map: &[String],
    opts: &RunOptions,
    out: &mut dyn Write,
) -> Result<u8, CliError> {
    let c = load_cqp(file)?;
    if other.is_some() != (which == CheckKind::Congruence) {
        return Err(CliError::Usage("a second file is expected exactly for `congruence`".into()));
    }
    if !map.is_empty() && !matches!(which, CheckKind::NameInv | CheckKind::QubitInv) {
        return Err(CliError::Usage("`--map` applies to `name-inv` and `qubit-inv` only".into()));
    }
    let o = opts.check_options();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let outcome = match which {
        CheckKind::Completeness => check_completeness(&c, &o),
        CheckKind::Soundness => check_soundness(&c, &o),
        CheckKind::NameInv => {
            let gamma = if map.is_empty() { random_channel_map(&c, &mut rng) } else { parse_map(map)? };
            check_name_invariance(&c, &gamma, o.tolerance)
        }
        CheckKind::QubitInv => {
            let gamma = if map.is_empty() { random_qubit_map(&c, &mut rng) } else { parse_map(map)? };
            check_qubit_invariance(&c, &gamma, o.tolerance)
        }
        CheckKind::Size => check_register_size(&c, &o),
        CheckKind::Divergence => check_divergence_reflection(&c, &o),
        CheckKind::Success => check_success_sensitiveness(&c, &o),
        CheckKind::Congruence => {
            let d = load_cqp(other.expect("checked above"))?;
            check_congruence_preservation(&c, &d, o.tolerance)
        }
    }
    .map_err(criteria_error)?;
    report(out, opts, which.name(), &outcome)
}

fn cmd_counterexample(opts: &RunOptions, out: &mut dyn Write) -> Result<u8, CliError> {
    let rows = counterexample_suite(&opts.check_options()).map_err(criteria_error)?;
    let ok = rows.iter().all(|r| r.q_matches && r.classification() != "undecided");
    match opts.format {
        Format::Json => {
            let rs: Vec<_> = rows
                .iter()
                .map(|r| {
                    json!({
                        "state": r.state, "q_rho": fmt_matrix_rows(&r.q_rho), "q_matches": r.q_matches,
                        "may": r.may.name(), "must": r.must.name(), "class": r.classification(),
                    })
                })
                .collect();
            print_json(out, &json!({ "schema": Report::SCHEMA, "command": "counterexample", "rows": rs }))?
        }
        Format::Text => write!(out, "{}", counterexample_table(&rows))?,
    }
    Ok(if ok { EXIT_OK } else { EXIT_FAILS })
}

fn cmd_campaign(count: u64, opts: &RunOptions, out: &mut dyn Write) -> Result<u8, CliError> {
    let (results, summary) = run_campaign(opts.seed, count, &opts.check_options());
    match opts.format {
        Format::Json => print_json(out, &json!({ "schema": Report::SCHEMA, "command": "campaign", "seed": opts.seed, "summary": summary }))?,
        Format::Text => {
            writeln!(out, "{:<17} {:>6} {:>6} {:>12}", "check", "holds", "fails", "inconclusive")?;
            for (name, t) in &summary.checks {
                writeln!(out, "{name:<17} {:>6} {:>6} {:>12}", t.holds, t.fails, t.inconclusive)?;
            }
            writeln!(
                out,
                "corroborated on {} instances; {} failing, {} inconclusive ({:.2}%)",
                summary.instances,
                summary.failing_seeds.len(),
                summary.inconclusive_instances,
                100.0 * summary.inconclusive_rate()
            )?;
            for r in results.iter().filter(|r| r.failures().next().is_some()) {
                writeln!(out, "seed {}: {}", r.seed, r.config)?;
                for (name, v) in r.failures() {
                    writeln!(out, "  {name}: {v:?}")?;
                }
            }
        }
    }
    Ok(if summary.total_fails() > 0 {
        EXIT_FAILS
    } else if summary.inconclusive_instances > 0 {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    })
}
