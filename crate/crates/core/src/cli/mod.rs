//! Command-line front end: scenario files in, CSV or JSON tables out.
//!
//! Exit codes: 0 when the analysis holds, 1 for a negative result, 2 for
//! malformed input.

pub mod commands;
pub mod reproduce;
pub mod scenario;
pub mod table;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::auction::Concept;
use crate::mediator::Strategy;
use commands::{CommandError, MediatorArgs, Report, SweepArgs};
use reproduce::ReproduceTarget;
use scenario::Scenario;
use table::ResultTable;

pub use commands::SWEEP_COLUMNS;

/// Environment variable overriding the comparison tolerance.
pub const TOL_ENV: &str = "ADLAB_TOL";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "adlab", version, about = "Sponsored-search auction lab")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Print numbers at full precision instead of 6 significant digits.
    #[arg(long, global = true)]
    pub exact: bool,
    /// Also write each table to `<dir>/<table>.csv` (or `.json`).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the bid profile for a symmetric (or plain Nash) equilibrium.
    VerifySne {
        scenario: PathBuf,
        /// Use plain Nash prices for upward deviations.
        #[arg(long)]
        nash: bool,
    },
    /// Minimum symmetric equilibrium bids.
    MinSne { scenario: PathBuf },
    /// Minimum-equilibrium revenue by two independent computations.
    Revenue { scenario: PathBuf },
    /// Efficiency of the score-sorted allocation.
    Efficiency { scenario: PathBuf },
    /// Fork one slot into a landing page and sweep the fitness factor.
    CapacitySweep {
        scenario: PathBuf,
        /// Slot to fork.
        #[arg(long = "l")]
        slot: Option<usize>,
        /// Number of slots on the landing page.
        #[arg(long = "L")]
        extra: Option<usize>,
        #[arg(long)]
        f_min: Option<f64>,
        #[arg(long)]
        f_max: Option<f64>,
        #[arg(long, default_value_t = 11)]
        steps: usize,
        /// Break CTR ties in favour of original slots instead of skipping.
        #[arg(long)]
        original_first: bool,
    },
    /// Synthesize a mediator bidding plan.
    Mediator {
        scenario: PathBuf,
        #[arg(long, value_parser = parse_strategy)]
        strategy: Option<Strategy>,
        /// Coalition size, counted from rank 1 (or from `anchor + 1`).
        #[arg(long = "L")]
        size: Option<usize>,
        /// Rank of the outside bidder directly above an interior coalition.
        #[arg(long)]
        anchor: Option<usize>,
        /// Explicit flat score instead of the computed one.
        #[arg(long)]
        r: Option<f64>,
        /// Mediator's share of the savings.
        #[arg(long)]
        share: Option<f64>,
    },
    /// Rerun a bundled instance against its expected values.
    Reproduce {
        #[arg(long, value_enum)]
        target: ReproduceTarget,
    },
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse()
}

/// Tolerance from `ADLAB_TOL`, falling back to the library default.
pub fn tolerance_from_env() -> Result<f64, CommandError> {
    match std::env::var(TOL_ENV) {
        Err(_) => Ok(crate::DEFAULT_TOL),
        Ok(raw) => match raw.trim().parse::<f64>() {
            Ok(t) if t >= 0.0 && t.is_finite() => Ok(t),
            _ => Err(CommandError::Input(format!("{TOL_ENV}={raw} is not a non-negative number"))),
        },
    }
}

/// Runs one parsed command.
pub fn execute(cli: &Cli, tol: f64) -> Result<Report, CommandError> {
    let load = |p: &PathBuf| Scenario::load(p).map_err(CommandError::from);
    match &cli.command {
        Command::VerifySne { scenario, nash } => {
            let concept = if *nash { Concept::Nash } else { Concept::Symmetric };
            commands::verify(&load(scenario)?, concept, tol)
        }
        Command::MinSne { scenario } => commands::min_sne(&load(scenario)?),
        Command::Revenue { scenario } => commands::revenue(&load(scenario)?, tol),
        Command::Efficiency { scenario } => commands::efficiency_report(&load(scenario)?),
        Command::CapacitySweep {
            scenario,
            slot,
            extra,
            f_min,
            f_max,
            steps,
            original_first,
        } => commands::capacity_sweep(
            &load(scenario)?,
            &SweepArgs {
                slot: *slot,
                extra: *extra,
                f_min: *f_min,
                f_max: *f_max,
                steps: *steps,
                original_first: *original_first,
            },
        ),
        Command::Mediator {
            scenario,
            strategy,
            size,
            anchor,
            r,
            share,
        } => commands::mediator(
            &load(scenario)?,
            &MediatorArgs {
                strategy: *strategy,
                size: *size,
                anchor: *anchor,
                r: *r,
                share: *share,
            },
            tol,
        ),
        Command::Reproduce { target } => {
            let comparison = reproduce::run(*target, tol)?;
            Ok(Report {
                tables: vec![("comparison", comparison.table())],
                negative: !comparison.all_ok(),
                notices: comparison.failures(),
            })
        }
    }
}

fn render(table: &ResultTable, format: Format, exact: bool) -> String {
    match format {
        Format::Csv => table.to_csv(exact),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&table.to_json(exact)).expect("json value");
            s.push('\n');
            s
        }
    }
}

/// Renders a report: tables separated by a blank line on stdout, notices on
/// stderr.
pub fn emit(
    cli: &Cli,
    report: &Report,
    out: &mut impl Write,
    err: &mut impl Write,
) -> std::io::Result<()> {
    for (idx, (name, table)) in report.tables.iter().enumerate() {
        if idx > 0 {
            writeln!(out)?;
        }
        let text = render(table, cli.format, cli.exact);
        out.write_all(text.as_bytes())?;
        if let Some(dir) = &cli.out_dir {
            fs::create_dir_all(dir)?;
            let ext = match cli.format {
                Format::Csv => "csv",
                Format::Json => "json",
            };
            fs::write(dir.join(format!("{name}.{ext}")), text)?;
        }
    }
    for notice in &report.notices {
        writeln!(err, "{notice}")?;
    }
    Ok(())
}

/// Full program: parse arguments, run, print. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let result = tolerance_from_env().and_then(|tol| execute(&cli, tol));
    match result {
        Ok(report) => {
            if let Err(e) = emit(&cli, &report, &mut stdout.lock(), &mut stderr.lock()) {
                eprintln!("error: {e}");
                return 2;
            }
            i32::from(report.negative)
        }
        Err(CommandError::Input(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CommandError::Negative(msg)) => {
            eprintln!("{msg}");
            1
        }
    }
}
