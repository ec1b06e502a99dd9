//! `monoalign` — generate alignment lattice instances, compute exact
//! marginals, decode alignments, run the experiment grid, and self-test.
//!
//! Subcommands read JSON from a positional file (`-` or no argument means
//! stdin) and write to stdout unless `--out` is given. Exit codes: 0 on
//! success, 1 for invalid input (bad flags, malformed or out-of-contract
//! JSON), 2 for I/O failures.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use monoalign_core::{
    decode, render_csv, run_grid, run_selftest, ConditionGrid, DistributionKind, GeneratorSpec,
    LatticeInstance, SearchConfig, SearchMode,
};

#[derive(Parser)]
#[command(
    name = "monoalign",
    version,
    about = "Hard monotonic alignment toolkit: instances, marginals, search, experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instance from a generator spec (JSON in/out)
    Gen(IoArgs),
    /// Exact log-marginal of an instance, by forward recursion and by
    /// brute-force enumeration
    Likelihood(IoArgs),
    /// Decode one alignment path from an instance
    Decode(DecodeArgs),
    /// Run a condition grid over synthetic instances and emit CSV records
    Experiment(ExperimentArgs),
    /// Run the built-in oracle cross-checks
    Selftest,
}

#[derive(Args)]
struct IoArgs {
    /// Input JSON file; '-' or absent reads stdin
    input: Option<PathBuf>,
    /// Write output to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum DistributionArg {
    Logistic,
    Binconcrete,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Fixed,
    Open,
}

#[derive(Args)]
struct DecodeArgs {
    /// Instance JSON file; '-' or absent reads stdin
    input: Option<PathBuf>,
    /// Beam width (1 = greedy)
    #[arg(long, default_value_t = 1)]
    beam_width: usize,
    /// Shorthand for --beam-width 1
    #[arg(long, conflicts_with = "beam_width")]
    greedy: bool,
    /// Decision temperature; defaults to the instance's lambda
    #[arg(long)]
    lambda: Option<f64>,
    /// Noise placement for stochastic search
    #[arg(long, value_enum, default_value_t = DistributionArg::Logistic)]
    distribution: DistributionArg,
    /// Search without noise (default)
    #[arg(long, conflicts_with = "stochastic")]
    deterministic: bool,
    /// Search with Logistic noise on the decision rule
    #[arg(long)]
    stochastic: bool,
    /// fixed: complete path of exactly J steps; open: stop on a Shift past
    /// the last input or at --max-outputs
    #[arg(long, value_enum, default_value_t = ModeArg::Fixed)]
    mode: ModeArg,
    /// Step cap for open mode; defaults to the instance's J
    #[arg(long)]
    max_outputs: Option<usize>,
    /// Noise seed for stochastic search
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write output to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Condition grid JSON file; '-' or absent reads stdin
    grid: Option<PathBuf>,
    /// Generator spec JSON file; defaults to I=5, J=12, logit_scale=2,
    /// no emission (lambda and seed are driven by the grid)
    #[arg(long)]
    generator: Option<PathBuf>,
    /// Write CSV to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    Invalid(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Invalid(_) => ExitCode::from(1),
            CliError::Io(_) => ExitCode::from(2),
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Invalid(m) | CliError::Io(m) => m,
        }
    }
}

impl From<monoalign_core::Error> for CliError {
    fn from(err: monoalign_core::Error) -> Self {
        CliError::Invalid(err.to_string())
    }
}

fn read_input(path: Option<&Path>) -> Result<String, CliError> {
    match path {
        Some(p) if p.as_os_str() != "-" => fs::read_to_string(p)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", p.display()))),
        _ => {
            let mut buf = String::new();
            io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| CliError::Io(format!("cannot read stdin: {e}")))?;
            Ok(buf)
        }
    }
}

fn write_output(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, content)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => io::stdout()
            .write_all(content.as_bytes())
            .map_err(|e| CliError::Io(format!("cannot write stdout: {e}"))),
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(raw: &str, what: &str) -> Result<T, CliError> {
    serde_json::from_str(raw).map_err(|e| CliError::Invalid(format!("invalid {what}: {e}")))
}

fn to_json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("serializable value");
    s.push('\n');
    s
}

fn run_gen(args: &IoArgs) -> Result<(), CliError> {
    let spec: GeneratorSpec = parse_json(&read_input(args.input.as_deref())?, "generator spec")?;
    let instance = monoalign_core::generate_instance(&spec)?;
    write_output(args.out.as_deref(), &to_json_line(&instance))
}

#[derive(Serialize)]
struct LikelihoodReport {
    forward: f64,
    brute_force: Option<f64>,
}

fn run_likelihood(args: &IoArgs) -> Result<(), CliError> {
    let instance: LatticeInstance = parse_json(&read_input(args.input.as_deref())?, "instance")?;
    let forward = monoalign_core::forward_marginal(&instance)?;
    // The brute-force route is guarded; on oversized lattices report the
    // forward value alone.
    let brute_force = monoalign_core::brute_force_marginal(&instance).ok();
    write_output(
        args.out.as_deref(),
        &to_json_line(&LikelihoodReport {
            forward,
            brute_force,
        }),
    )
}

#[derive(Serialize)]
struct DecodeReport {
    path: Vec<usize>,
    score: f64,
}

fn run_decode(args: &DecodeArgs) -> Result<(), CliError> {
    let instance: LatticeInstance = parse_json(&read_input(args.input.as_deref())?, "instance")?;
    let config = SearchConfig {
        beam_width: if args.greedy { 1 } else { args.beam_width },
        stochastic: args.stochastic,
        distribution: match args.distribution {
            DistributionArg::Logistic => DistributionKind::Logistic,
            DistributionArg::Binconcrete => DistributionKind::BinConcrete,
        },
        lambda: args.lambda.unwrap_or_else(|| instance.model().lambda()),
        mode: match args.mode {
            ModeArg::Fixed => SearchMode::FixedLength,
            ModeArg::Open => SearchMode::OpenEnded,
        },
        max_outputs: args.max_outputs.unwrap_or_else(|| instance.max_outputs()),
        seed: args.seed,
    };
    let (path, score) = decode(&instance, &config)?;
    write_output(
        args.out.as_deref(),
        &to_json_line(&DecodeReport {
            path: path.positions().to_vec(),
            score,
        }),
    )
}

fn run_experiment(args: &ExperimentArgs) -> Result<(), CliError> {
    let grid: ConditionGrid = parse_json(&read_input(args.grid.as_deref())?, "condition grid")?;
    let spec = match &args.generator {
        Some(path) => parse_json(&read_input(Some(path))?, "generator spec")?,
        None => GeneratorSpec {
            num_inputs: 5,
            max_outputs: 12,
            logit_scale: 2.0,
            lambda: 1.0,
            emission_sigma: None,
            seed: 0,
        },
    };
    let records = run_grid(&grid, &spec)?;
    write_output(args.out.as_deref(), &render_csv(&records))
}

fn run_selftest_command() -> Result<(), CliError> {
    let outcomes = run_selftest();
    let mut failures = 0usize;
    for outcome in &outcomes {
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        println!("{tag} {} — {}", outcome.name, outcome.detail);
        if !outcome.passed {
            failures += 1;
        }
    }
    if failures > 0 {
        return Err(CliError::Invalid(format!(
            "{failures} of {} self-test checks failed",
            outcomes.len()
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version are not errors.
            if err.use_stderr() {
                eprint!("{err}");
                return ExitCode::from(1);
            }
            print!("{err}");
            return ExitCode::SUCCESS;
        }
    };
    let result = match &cli.command {
        Command::Gen(args) => run_gen(args),
        Command::Likelihood(args) => run_likelihood(args),
        Command::Decode(args) => run_decode(args),
        Command::Experiment(args) => run_experiment(args),
        Command::Selftest => run_selftest_command(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            err.exit_code()
        }
    }
}
