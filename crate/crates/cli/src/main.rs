//! `limo`: train, evaluate, and reproduce multi-label experiments.
//!
//! Exit codes: 0 success, 2 argument/validation error, 3 data error,
//! 4 numeric error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ndarray::Array2;

use limo_core::data::{synth_quadrant, Dataset};
use limo_core::error::{Error, Result};
use limo_core::experiment::{emit_report, run_experiment, ExperimentPlan, ReportFormat};
use limo_core::io;
use limo_core::margins;
use limo_core::measures::{self, LabelMatrix? as _};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
