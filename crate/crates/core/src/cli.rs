//! The `gsm` command line.
//!
//! Exit codes: 0 on success (deadlocked runs included), 1 for model,
//! simulation, validation and output errors, 2 for invalid flags.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::ensemble::EnsembleStats;
use crate::error::SimError;
use crate::machine::{RunOutcome, RunSpec};
use crate::model::{AlgorithmKind, Model};
use crate::species::SpeciesKey;

#[derive(Debug, Parser)]
#[command(name = "gsm", version, about = "Stochastic simulation of process-calculus models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a model and write its trajectory as CSV.
    Run(RunConfig),
}

/// Everything needed to run a model.
#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Model file: .crn, .spi or .multi
    pub model: PathBuf,
    #[arg(long, value_enum, default_value_t = AlgorithmKind::Direct)]
    pub algorithm: AlgorithmKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Simulation horizon.
    #[arg(long = "tmax")]
    pub t_max: f64,
    /// Sampling interval.
    #[arg(long = "dt")]
    pub sample_interval: f64,
    /// Number of independent runs; more than one writes mean/sd columns.
    #[arg(long, default_value_t = 1)]
    pub runs: u64,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Audit the machine after every step and fail on any violation.
    #[arg(long)]
    pub validate: bool,
}

impl RunConfig {
    pub fn new(model: impl Into<PathBuf>, t_max: f64, sample_interval: f64) -> Self {
        Self {
            model: model.into(),
            algorithm: AlgorithmKind::Direct,
            seed: 0,
            t_max,
            sample_interval,
            runs: 1,
            out: None,
            validate: false,
        }
    }

    pub fn check(&self) -> Result<(), String> {
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(format!("--tmax must be a positive number, got {}", self.t_max));
        }
        if !(self.sample_interval.is_finite() && self.sample_interval > 0.0) {
            return Err(format!("--dt must be a positive number, got {}", self.sample_interval));
        }
        if self.runs == 0 {
            return Err("--runs must be at least 1".to_string());
        }
        Ok(())
    }

    pub fn spec(&self) -> RunSpec {
        RunSpec {
            t_max: self.t_max,
            sample_interval: self.sample_interval,
            validate: self.validate,
        }
    }
}

/// What an ensemble produced.
#[derive(Debug, Clone)]
pub struct EnsembleSummary {
    /// The CSV written: a plain trace for one run, mean/sd columns otherwise.
    pub csv: Vec<u8>,
    pub species: Vec<SpeciesKey>,
    /// `(run index, clock)` of every run that deadlocked.
    pub deadlocks: Vec<(u64, f64)>,
    pub steps: u64,
}

/// Runs `config.runs` independent simulations, run `i` on stream
/// `(seed, i)`. Runs execute in parallel; output is assembled in run order
/// afterwards, so it does not depend on scheduling.
pub fn run_ensemble(model: &Model, config: &RunConfig) -> Result<EnsembleSummary, SimError> {
    config.check().map_err(SimError::InvalidRun)?;
    let spec = config.spec();
    let outcomes: Vec<RunOutcome> = (0..config.runs)
        .into_par_iter()
        .map(|i| model.simulate(config.algorithm, config.seed, i, &spec))
        .collect::<Result<_, _>>()?;

    let deadlocks = outcomes
        .iter()
        .enumerate()
        .filter_map(|(i, o)| o.deadlock.map(|t| (i as u64, t)))
        .collect();
    let steps = outcomes.iter().map(|o| o.steps).sum();
    let mut csv = Vec::new();
    let species = if outcomes.len() == 1 {
        let trace = &outcomes[0].trace;
        trace.write_csv(&mut csv).map_err(csv_error)?;
        trace.species.clone()
    } else {
        let traces: Vec<_> = outcomes.into_iter().map(|o| o.trace).collect();
        let stats = EnsembleStats::from_traces(&traces);
        stats.write_csv(&mut csv).map_err(csv_error)?;
        stats.species
    };
    Ok(EnsembleSummary {
        csv,
        species,
        deadlocks,
        steps,
    })
}

fn csv_error(e: csv::Error) -> SimError {
    SimError::InvalidRun(format!("writing CSV failed: {e}"))
}

/// Parses `argv` (program name first) and runs the command.
pub fn main_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{rendered}");
            } else {
                let _ = write!(stderr, "{rendered}");
            }
            return code;
        }
    };
    let Command::Run(config) = cli.command;
    if let Err(message) = config.check() {
        let _ = writeln!(stderr, "error: {message}\n\nUsage: gsm run <MODEL> --tmax <TMAX> --dt <DT> [OPTIONS]");
        return 2;
    }

    let model = match Model::load(&config.model) {
        Ok(model) => model,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 1;
        }
    };
    let mut sink: Box<dyn Write> = match &config.out {
        Some(path) => match File::create(path) {
            Ok(file) => Box::new(io::BufWriter::new(file)),
            Err(e) => {
                let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                return 1;
            }
        },
        None => Box::new(&mut *stdout),
    };

    let summary = match run_ensemble(&model, &config) {
        Ok(summary) => summary,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}: {e}", config.model.display());
            return 1;
        }
    };
    if let Err(e) = sink.write_all(&summary.csv).and_then(|()| sink.flush()) {
        let _ = writeln!(stderr, "error: writing output failed: {e}");
        return 1;
    }
    for (run, time) in &summary.deadlocks {
        let _ = writeln!(stderr, "note: run {run} deadlocked at t = {time}");
    }
    0
}

pub fn main() -> i32 {
    let stdout = io::stdout();
    let mut stdout = stdout.lock();
    let mut stderr = io::stderr();
    main_with(std::env::args_os(), &mut stdout, &mut stderr)
}
