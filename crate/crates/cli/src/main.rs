//! `sims`: command-line front end for `sims-core`.
//!
//! Results are line-delimited JSON. Exit status is 0 on success, 1 on input
//! errors and 2 on numerical failures.

mod commands;
mod config;
mod record;
mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use config::{RunConfig, Tolerances, TOL_KEYS};
use record::Records;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Numerical-range region and, with --lambda, its admissible pair
    Region,
    /// Case I/II/III at --lambda
    Classify,
    /// m(lambda) by disk limit, or by continuation with --cut / --anchor
    MEval,
    /// Nested disks along the schedule
    DiskTrace,
    /// Poles of m inside --rect
    Poles,
    /// Resolvent checks on --samples or on seeded random functions
    ResolventCheck,
    /// Built-in invariant suite
    Verify,
}

#[derive(Debug, Parser)]
#[command(name = "sims", version, about = "Titchmarsh-Weyl-Sims m-functions for complex Sturm-Liouville problems")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Problem file (`key = value` lines)
    #[arg(long)]
    problem: Option<PathBuf>,
    /// Spectral parameter, e.g. `0+1i`
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Boundary parameter, overriding the problem file
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Rectangle `x0,y0,x1,y1` for `poles`
    #[arg(long, allow_hyphen_values = true)]
    rect: Option<String>,
    /// Truncation schedule `x0:ratio:count`
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long = "tol", value_name = "KEY=VALUE", help = format!("Tolerance override, repeatable. Keys: {TOL_KEYS}"))]
    tol: Vec<String>,
    /// Seed for randomized test-function corpora
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write records here instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
    /// Restrict `verify` to a module or check-name prefix
    #[arg(long)]
    filter: Option<String>,
    /// Samples file for `resolvent-check`: columns `x` and `re+imi`
    #[arg(long)]
    samples: Option<PathBuf>,
    /// Number of random functions for `resolvent-check`
    #[arg(long, default_value_t = 100)]
    count: usize,
    /// Truncation point for the Case I continuation
    #[arg(long, allow_hyphen_values = true)]
    cut: Option<f64>,
    /// Anchor lambda' for continuation in Cases II and III
    #[arg(long, allow_hyphen_values = true)]
    anchor: Option<String>,
}

#[derive(Debug)]
pub enum Failure {
    Input(String),
    Numeric(String),
}

impl From<sims_core::Error> for Failure {
    fn from(e: sims_core::Error) -> Self {
        if e.is_input() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Numeric(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Numeric(m) => m,
        }
    }
}

fn dispatch(cmd: Command, cfg: &RunConfig, out: &mut Records) -> Result<(), Failure> {
    match cmd {
        Command::Region => commands::region(cfg, out),
        Command::Classify => commands::classify(cfg, out),
        Command::MEval => commands::m_eval(cfg, out),
        Command::DiskTrace => commands::disk_trace_cmd(cfg, out),
        Command::Poles => commands::poles(cfg, out),
        Command::ResolventCheck => commands::resolvent_check(cfg, out),
        Command::Verify => match verify::run(&cfg.tol, cfg.seed, cfg.filter.as_deref(), out) {
            None => Err(Failure::Input(format!(
                "filter '{}' selects no checks; modules: {}",
                cfg.filter.as_deref().unwrap_or(""),
                verify::module_names().join(", ")
            ))),
            Some(0) => Ok(()),
            Some(n) => Err(Failure::Numeric(format!("{n} check(s) failed"))),
        },
    }
}

fn emit(records: &Records, output: Option<&PathBuf>) -> Result<(), Failure> {
    let res = match output {
        Some(path) => File::create(path).and_then(|f| records.write_to(&mut BufWriter::new(f))),
        None => records.write_to(&mut io::stdout().lock()),
    };
    res.map_err(|e| Failure::Input(format!("cannot write output: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut tol = Tolerances::default();
    for t in &cli.tol {
        tol.set(t)?;
    }
    let cfg = RunConfig {
        problem_file: cli.problem,
        lambda: cli.lambda,
        alpha: cli.alpha,
        rect: cli.rect,
        schedule: cli.schedule,
        tol,
        seed: cli.seed,
        filter: cli.filter,
        samples: cli.samples,
        count: cli.count,
        cut: cli.cut,
        anchor: cli.anchor,
    };
    let mut records = Records::default();
    let result = dispatch(cli.command, &cfg, &mut records);
    // records produced before a failure are still written
    if records.len() > 0 || result.is_ok() {
        emit(&records, cli.output.as_ref())?;
    }
    result
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let first = e.to_string().lines().next().unwrap_or("invalid arguments").to_string();
            let _ = writeln!(io::stderr(), "{}", first.trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let _ = writeln!(io::stderr(), "sims: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
