//! Command-line front end. Every subcommand reads explicit flags, writes one
//! JSON document to --out (stdout by default) with a trailing newline, and
//! keeps diagnostics on stderr, so outputs are safe to redirect and diff.
//!
//! Exit codes: 0 ok or success branch, 1 verification failure, 2 usage or
//! parse error, 3 invalid quantum object, 10 probabilistic run landed on a
//! failure branch.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qpga::gates::{gate, GateName};
use qpga::io;
use qpga::progarray::{encode_program, postselect, run_channel_postselect, run_once};
use qpga::verify::{mix_seed, run_suite, success_statistics, success_statistics_parallel};
use qpga::{Error, Operator, Result, StateVector};

#[derive(Parser)]
#[command(
    name = "qpga",
    version,
    about = "Programmable quantum gate array simulator",
    long_about = "Encodes unitaries as entangled program states, runs the \
                  teleportation-based array exactly, estimates success \
                  statistics reproducibly, and executes verification suites."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a unitary as its entangled program state.
    Encode(EncodeArgs),
    /// One seeded probabilistic run; exit 10 when it lands on a failure branch.
    Run(RunArgs),
    /// The exact post-selected success branch: probability and output state.
    Postselect(PostselectArgs),
    /// Monte Carlo estimate of the success probability over many seeded runs.
    Estimate(EstimateArgs),
    /// Run a Kraus-channel program on a density-matrix input, post-selected.
    Channel(ChannelArgs),
    /// Execute a named verification suite; exit 1 on any violation.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct IoFlags {
    /// Tolerance for unitarity and completeness checks.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    /// Gate name (i, x, y, z, h, cnot) or path to an operator JSON file.
    #[arg(long)]
    unitary: String,
    /// Number of data qubits.
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[command(flatten)]
    io: IoFlags,
}

#[derive(Args)]
struct RunArgs {
    /// Gate name or path to an operator JSON file.
    #[arg(long)]
    unitary: String,
    /// Data state: 0, 1, +, - or path to a state JSON file.
    #[arg(long)]
    data: String,
    /// Number of data qubits.
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Master seed; the run consumes trial index 0 of this seed's stream.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    io: IoFlags,
}

#[derive(Args)]
struct PostselectArgs {
    /// Gate name or path to an operator JSON file.
    #[arg(long)]
    unitary: String,
    /// Data state: 0, 1, +, - or path to a state JSON file.
    #[arg(long)]
    data: String,
    /// Number of data qubits.
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[command(flatten)]
    io: IoFlags,
}

#[derive(Args)]
struct EstimateArgs {
    /// Gate name or path to an operator JSON file.
    #[arg(long)]
    unitary: String,
    /// Data state: 0, 1, +, - or path to a state JSON file.
    #[arg(long)]
    data: String,
    /// Number of data qubits.
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Number of trials, at least 1.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// Master seed; trial k draws from the mixed stream (seed, k).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fan trials out across threads; output bytes are unchanged.
    #[arg(long)]
    parallel: bool,
    #[command(flatten)]
    io: IoFlags,
}

#[derive(Args)]
struct ChannelArgs {
    /// Path to a channel JSON file (list of Kraus matrices).
    #[arg(long)]
    kraus: PathBuf,
    /// Path to a density-matrix JSON file for the data register.
    #[arg(long)]
    data_density: PathBuf,
    /// Number of data qubits.
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[command(flatten)]
    io: IoFlags,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name: orthogonality, identity, independence, overlap, residuals.
    #[arg(long)]
    suite: String,
    /// Seed for the suite's instance generators.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    io: IoFlags,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Encode(args) => cmd_encode(args),
        Command::Run(args) => cmd_run(args),
        Command::Postselect(args) => cmd_postselect(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Channel(args) => cmd_channel(args),
        Command::Verify(args) => cmd_verify(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(error_code(&err))
        }
    }
}

/// Parse and format problems are usage-level (2); everything else that can
/// go wrong here is a quantum object failing validation (3).
fn error_code(err: &Error) -> u8 {
    match err {
        Error::Parse(_) | Error::Format(_) => 2,
        _ => 3,
    }
}

fn read_input(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

/// Resolves --unitary: a known gate name wins, otherwise the string is a
/// path. The result must act on exactly m qubits and pass the unitarity
/// check at `tol`.
fn load_unitary(arg: &str, m: usize, tol: f64) -> Result<Operator> {
    let op = match GateName::from_str(arg) {
        Ok(name) => gate(name),
        Err(_) => {
            let path = Path::new(arg);
            if !path.exists() {
                return Err(Error::Parse(format!(
                    "{arg:?} is neither a gate name (i, x, y, z, h, cnot) nor a file"
                )));
            }
            io::parse_operator(&read_input(path)?)?
        }
    };
    if op.num_qubits() != m {
        return Err(Error::DimensionMismatch {
            expected: 1 << m,
            actual: op.dim(),
        });
    }
    if !op.is_unitary(tol) {
        return Err(Error::NotUnitary {
            deviation: op.unitarity_deviation(),
        });
    }
    Ok(op)
}

/// Resolves --data: the names 0, 1, +, - expand to single-qubit states;
/// anything else is a path to a state file on m qubits.
fn load_data(arg: &str, m: usize) -> Result<StateVector> {
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    let named = |a: Complex64, b: Complex64| StateVector::new(1, vec![a, b]);
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let half = Complex64::new(inv, 0.0);
    match arg {
        "0" | "1" | "+" | "-" => {
            if m != 1 {
                return Err(Error::Parse(format!(
                    "named data state {arg:?} is single-qubit; pass a file for m = {m}"
                )));
            }
            match arg {
                "0" => named(one, zero),
                "1" => named(zero, one),
                "+" => named(half, half),
                _ => named(half, -half),
            }
        }
        path => {
            let state = io::parse_state(&read_input(Path::new(path))?)?;
            if state.num_qubits() != m {
                return Err(Error::DimensionMismatch {
                    expected: 1 << m,
                    actual: state.dim(),
                });
            }
            Ok(state)
        }
    }
}

fn emit(out: &Option<PathBuf>, json: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, format!("{json}\n"))
            .map_err(|e| Error::Format(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn cmd_encode(args: EncodeArgs) -> Result<u8> {
    let u = load_unitary(&args.unitary, args.m, args.io.tol)?;
    let program = encode_program(&u)?;
    emit(&args.io.out, &io::state_to_json(program.state()))?;
    Ok(0)
}

fn cmd_run(args: RunArgs) -> Result<u8> {
    let u = load_unitary(&args.unitary, args.m, args.io.tol)?;
    let d = load_data(&args.data, args.m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(args.seed, 0));
    let draws: Vec<f64> = (0..args.m).map(|_| rng.random()).collect();
    let record = run_once(&u, &d, &draws)?;
    emit(&args.io.out, &io::run_record_to_json(&record))?;
    Ok(if record.success { 0 } else { 10 })
}

fn cmd_postselect(args: PostselectArgs) -> Result<u8> {
    let u = load_unitary(&args.unitary, args.m, args.io.tol)?;
    let d = load_data(&args.data, args.m)?;
    let (probability, output) = postselect(&u, &d)?;
    emit(&args.io.out, &io::postselect_to_json(probability, &output))?;
    Ok(0)
}

fn cmd_estimate(args: EstimateArgs) -> Result<u8> {
    let u = load_unitary(&args.unitary, args.m, args.io.tol)?;
    let d = load_data(&args.data, args.m)?;
    let stats = if args.parallel {
        success_statistics_parallel(&u, &d, args.trials, args.seed)?
    } else {
        success_statistics(&u, &d, args.trials, args.seed)?
    };
    emit(&args.io.out, &io::stats_to_json(&stats))?;
    Ok(0)
}

fn cmd_channel(args: ChannelArgs) -> Result<u8> {
    let ch = io::parse_channel(&read_input(&args.kraus)?, args.io.tol)?;
    if ch.num_qubits() != args.m {
        return Err(Error::DimensionMismatch {
            expected: 1 << args.m,
            actual: 1 << ch.num_qubits(),
        });
    }
    let rho = io::parse_density(&read_input(&args.data_density)?)?;
    let (probability, output) = run_channel_postselect(&ch, &rho)?;
    emit(&args.io.out, &io::channel_run_to_json(probability, &output))?;
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<u8> {
    let report = run_suite(&args.suite, args.seed)?;
    emit(&args.io.out, &io::suite_report_to_json(&report))?;
    Ok(if report.passed { 0 } else { 1 })
}
