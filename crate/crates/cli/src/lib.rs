//! Command-line front end: parse, typecheck, run, step, translate and
//! check source and target configurations.
//!
//! Every command writes to a caller-supplied sink and returns the process
//! exit status, so the binary is a thin wrapper and tests can drive the
//! commands in-process.

mod commands;
mod qrun;

pub use commands::{execute, run_campaign, CliError};
pub use qrun::{run_qccs, QccsRunStep, QccsTrace};

use clap::{Args, Parser, Subcommand, ValueEnum};
use qproc_core::cqp::{PermMode, StepOptions};
use qproc_core::criteria::{Budget, CheckOptions};
use qproc_core::quantum::Permutation;
use std::path::PathBuf;

/// Exit status for a successful command or a `Holds` verdict.
pub const EXIT_OK: u8 = 0;
/// Exit status for a `Fails` verdict or rejected input.
pub const EXIT_FAILS: u8 = 1;
/// Exit status for an `Inconclusive` verdict.
pub const EXIT_INCONCLUSIVE: u8 = 2;
/// Exit status for a usage error.
pub const EXIT_USAGE: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "qproc", version, about = "Run, translate and check quantum process configurations")]
pub struct Cli {
    #[command(flatten)]
    pub opts: RunOptions,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PermModeArg {
    /// Permute the register only to bring operands to the front.
    OnDemand,
    /// Offer every register permutation at every step.
    Explicit,
}

#[derive(Debug, Clone, Args)]
pub struct RunOptions {
    /// Comparison tolerance for amplitudes and matrix entries.
    #[arg(long, global = true, default_value_t = qproc_core::DEFAULT_TOLERANCE, value_parser = parse_tolerance)]
    pub tolerance: f64,
    /// Longest explored path, and step limit of `run`.
    #[arg(long, global = true, default_value_t = 64, value_parser = parse_positive)]
    pub max_depth: usize,
    /// Largest number of explored states.
    #[arg(long, global = true, default_value_t = 100_000, value_parser = parse_positive)]
    pub max_states: usize,
    /// Seed for scheduling and random renamings.
    #[arg(long, global = true, env = "QPROC_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Comma-separated branch choices consumed by `run`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub script: Vec<usize>,
    #[arg(long, global = true, value_enum, default_value_t = PermModeArg::OnDemand)]
    pub perm_mode: PermModeArg,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            tolerance: qproc_core::DEFAULT_TOLERANCE,
            max_depth: 64,
            max_states: 100_000,
            seed: 0,
            format: Format::Text,
            script: Vec::new(),
            perm_mode: PermModeArg::OnDemand,
        }
    }
}

/// Largest register for which explicit mode enumerates permutations.
const EXPLICIT_PERM_QUBITS: usize = 5;

impl RunOptions {
    pub fn check_options(&self) -> CheckOptions {
        CheckOptions { tolerance: self.tolerance, budget: Budget { max_depth: self.max_depth, max_states: self.max_states } }
    }

    pub fn step_options(&self) -> StepOptions {
        let perm_mode = match self.perm_mode {
            PermModeArg::OnDemand => PermMode::OnDemand,
            PermModeArg::Explicit => PermMode::Explicit(
                (1..=EXPLICIT_PERM_QUBITS).flat_map(permutations).filter(|p| !p.is_identity()).collect(),
            ),
        };
        StepOptions { perm_mode, tolerance: self.tolerance }
    }
}

/// All permutations of `n` positions in lexicographic order.
fn permutations(n: usize) -> Vec<Permutation> {
    fn go(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Permutation>) {
        if prefix.len() == n {
            out.push(Permutation::new(prefix.clone()).expect("a bijection by construction"));
            return;
        }
        for i in 0..n {
            if !prefix.contains(&i) {
                prefix.push(i);
                go(prefix, n, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), n, &mut out);
    out
}

fn parse_tolerance(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if t > 0.0 && t <= 1e-3 {
        Ok(t)
    } else {
        Err("tolerance must lie in (0, 1e-3]".into())
    }
}

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Completeness,
    Soundness,
    NameInv,
    QubitInv,
    Size,
    Divergence,
    Success,
    /// Needs a second source file.
    Congruence,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Completeness => "completeness",
            CheckKind::Soundness => "soundness",
            CheckKind::NameInv => "name-inv",
            CheckKind::QubitInv => "qubit-inv",
            CheckKind::Size => "size",
            CheckKind::Divergence => "divergence",
            CheckKind::Success => "success",
            CheckKind::Congruence => "congruence",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the syntax tree of a `.cqp` or `.qccs` file.
    Parse { file: PathBuf },
    /// Typecheck a `.cqp` file or check a `.qccs` file for no-cloning
    /// violations.
    Typecheck { file: PathBuf },
    /// Execute one path. For `.cqp` files `--script` picks measurement
    /// outcomes; for `.qccs` files it picks among the enabled steps
    /// whenever there is more than one.
    Run { file: PathBuf },
    /// List the steps enabled in the initial configuration.
    Steps { file: PathBuf },
    /// Translate a `.cqp` file into `.qccs` text.
    Translate {
        file: PathBuf,
        /// Write the translation here instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a property of the translation on a `.cqp` file.
    Check {
        #[arg(value_enum)]
        which: CheckKind,
        file: PathBuf,
        /// Second source, for `congruence`.
        other: Option<PathBuf>,
        /// Renaming `old=new,..` for `name-inv` and `qubit-inv`; random
        /// from `--seed` when absent.
        #[arg(long, value_delimiter = ',')]
        map: Vec<String>,
    },
    /// Print the success verdicts of the non-unitary operator example.
    Counterexample,
    /// Run every per-instance check on generated configurations.
    Campaign {
        /// Number of instances, seeded `seed..seed+count`.
        #[arg(long, default_value_t = 500)]
        count: u64,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutations_are_complete() {
        assert_eq!(permutations(3).len(), 6);
        assert!(permutations(1)[0].is_identity());
    }

    #[test]
    fn tolerance_range_is_enforced() {
        assert!(parse_tolerance("1e-9").is_ok());
        assert!(parse_tolerance("0").is_err());
        assert!(parse_tolerance("0.1").is_err());
        assert!(parse_positive("0").is_err());
    }

    #[test]
    fn seed_and_flags_parse() {
        let cli = Cli::try_parse_from(["qproc", "run", "x.cqp", "--script", "0,2", "--seed", "9"]).unwrap();
        assert_eq!(cli.opts.script, vec![0, 2]);
        assert_eq!(cli.opts.seed, 9);
        assert!(matches!(cli.command, Command::Run { .. }));
    }
}
