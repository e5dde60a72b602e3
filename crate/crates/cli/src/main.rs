//! `symflow`: certify `E_pi prod_{i in fix(pi)} a_i >= s_2(sqrt(a))`
//! numerically.
//!
//! Exit status: 0 when every checked invariant holds, 2 when one is
//! violated, 1 on a usage or I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use symflow_core::combinatorics::rat_to_f64;
use symflow_core::verify::{
    check_lemmas, emit_report, eval_report, flow_report, parse_exact, tables_report, verify,
    write_report, Mode, OutputFormat, Report, RunConfig,
};
use symflow_core::{Error, Point};

const THREADS_VAR: &str = "SYMFLOW_THREADS";

#[derive(Debug, Parser)]
#[command(name = "symflow", version, about = "Fixed-point measure vs. pair mean of square roots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Factorials, derangements, binomials and rencontres numbers for n.
    Tables {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Evaluate L_n, R_n and f_n at a point.
    Eval {
        #[arg(long)]
        n: usize,
        /// Comma-separated coordinates (decimals or fractions like 7/3).
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Also compute L_n in exact rational arithmetic.
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Search for violations of f_n >= 0.
    Verify {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "sample", value_parser = parse_mode)]
        mode: Mode,
        /// Upper bound per coordinate [default: 6n].
        #[arg(long = "box")]
        box_bound: Option<f64>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Classify a point and follow the certified descent directions.
    Flow {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        start: String,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Audit the region lemmas and S_k bounds used by the flow argument.
    CheckLemmas {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, default_value = "json", value_parser = parse_format)]
    format: OutputFormat,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s.parse::<Mode>() {
        Ok(m @ (Mode::Sample | Mode::Grid | Mode::Minimize)) => Ok(m),
        Ok(m) => Err(format!("mode {m} is not a verify mode (sample, grid, minimize)")),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Usage(String),
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::RouteDisagreement { .. } => Failure::Violation(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn threads_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t >= 1 => Ok(Some(t)),
            _ => Err(Failure::Usage(format!(
                "{THREADS_VAR} must be a positive integer, got {v:?}"
            ))),
        },
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Failure::Usage(format!("{THREADS_VAR}: {e}"))),
    }
}

fn parse_point(n: usize, text: &str) -> Result<(Point, Vec<symflow_core::combinatorics::ExactRat>), Failure> {
    let exact = text
        .split(',')
        .map(parse_exact)
        .collect::<Result<Vec<_>, _>>()?;
    if exact.len() != n {
        return Err(Failure::Usage(format!(
            "expected {n} coordinates, got {}",
            exact.len()
        )));
    }
    let point = Point::new(exact.iter().map(rat_to_f64).collect())?;
    Ok((point, exact))
}

fn emit<R: Report>(report: &R, out: &OutputArgs) -> Result<bool, Failure> {
    match &out.out {
        Some(path) => write_report(report, out.format, path)?,
        None => print!("{}", emit_report(report, out.format)?),
    }
    Ok(report.passed())
}

fn run(command: Command) -> Result<bool, Failure> {
    let threads = threads_from_env()?;
    match command {
        Command::Tables { n, out } => emit(&tables_report(n)?, &out),
        Command::Eval { n, point, exact, out } => {
            let (x, q) = parse_point(n, &point)?;
            let report = eval_report(&x, exact.then_some(q.as_slice()))?;
            emit(&report, &out)
        }
        Command::Verify {
            n,
            samples,
            seed,
            mode,
            box_bound,
            tol,
            out,
        } => {
            let cfg = RunConfig {
                samples,
                seed,
                tolerance: tol,
                box_bound: box_bound.unwrap_or(6.0 * n as f64),
                mode,
                output_format: out.format,
                threads,
                ..RunConfig::new(n)
            };
            emit(&verify(&cfg)?, &out)
        }
        Command::Flow {
            n,
            start,
            step,
            max_iters,
            out,
        } => {
            let (x, _) = parse_point(n, &start)?;
            emit(&flow_report(&x, step, max_iters)?, &out)
        }
        Command::CheckLemmas {
            n,
            samples,
            seed,
            out,
        } => {
            let cfg = RunConfig {
                samples,
                seed,
                mode: Mode::Lemmas,
                output_format: out.format,
                threads,
                ..RunConfig::new(n)
            };
            emit(&check_lemmas(&cfg)?, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("symflow: invariant violated (see report)");
            ExitCode::from(2)
        }
        Err(Failure::Violation(msg)) => {
            eprintln!("symflow: invariant violated: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("symflow: {msg}");
            ExitCode::from(1)
        }
    }
}
