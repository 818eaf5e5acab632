//! Configuration files, experiment drivers and report emission.
//!
//! A run reads one configuration file (see [`config`]), executes the driver
//! named by its `command` key and writes JSON and CSV reports into the output
//! directory. Every report carries the SHA-256 of the resolved configuration
//! and the lattice parameters of each grid.

pub mod config;
mod drivers;
pub mod report;
pub mod verify;

use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{Command, ExperimentConfig, Overrides};
pub use drivers::{reference, Reference};

use crate::{Error, Result};

/// Files written by a run and the names of failed checks.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub failures: Vec<String>,
}

/// Executes the driver named in `cfg`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let mut w = report::Writer::new(cfg)?;
    let mut failures = Vec::new();
    match cfg.command {
        Command::Energy => drivers::energy(cfg, &mut w)?,
        Command::Example => drivers::example(cfg, &mut w)?,
        Command::Relax => drivers::relax(cfg, &mut w)?,
        Command::Minimize => drivers::minimize_driver(cfg, &mut w)?,
        Command::Sweep => drivers::sweep(cfg, &mut w)?,
        Command::Verify => {
            let params = verify::SuiteParams {
                resolutions: cfg.resolutions.clone(),
                seed: cfg.seed,
                random_fields: cfg.verify.random_fields,
            };
            let (checks, grids) = verify::run_suite(&params)?;
            let rows: Vec<Vec<report::Cell>> = checks
                .iter()
                .map(|c| {
                    vec![c.name.into(), c.field.as_str().into(), c.h.into(), c.value.into(), c.tolerance.into(), c.margin.into(), c.pass.into()]
                })
                .collect();
            w.csv("verify.csv", &grids, &["check", "field", "h", "value", "tolerance", "margin", "pass"], &rows)?;
            w.json("verify.json", &grids, &checks)?;
            failures = checks.iter().filter(|c| !c.pass).map(|c| format!("{} [{} h={}]", c.name, c.field, c.h)).collect();
        }
    }
    Ok(RunOutcome { files: w.files, failures })
}

/// 2 for invalid configuration, 1 for numerical or runtime failure.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parameter(_) | Error::Resolution(_) => 2,
        _ => 1,
    }
}

#[derive(Serialize)]
struct Diagnostics<'a> {
    command: &'static str,
    config_hash: String,
    error: Option<String>,
    failed_checks: &'a [String],
}

fn write_diagnostics(cfg: &ExperimentConfig, error: Option<String>, failures: &[String]) -> Option<PathBuf> {
    let d = Diagnostics { command: cfg.command.as_str(), config_hash: report::config_hash(cfg), error, failed_checks: failures };
    let path = cfg.output.join("diagnostics.json");
    std::fs::create_dir_all(&cfg.output).ok()?;
    std::fs::write(&path, report::to_json(&d).ok()?).ok()?;
    Some(path)
}

/// Loads, runs and reports; returns the process exit code.
pub fn main(config: &Path, overrides: &Overrides) -> u8 {
    let cfg = match ExperimentConfig::from_path(config, overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {}", config.display(), e);
            return 2;
        }
    };
    match run(&cfg) {
        Ok(o) if o.failures.is_empty() => {
            for f in &o.files {
                println!("{}", f.display());
            }
            0
        }
        Ok(o) => {
            for f in &o.failures {
                eprintln!("FAIL {}", f);
            }
            let path = write_diagnostics(&cfg, None, &o.failures);
            eprintln!("{} check(s) failed; diagnostics: {}", o.failures.len(), path.map_or("<unwritable>".into(), |p| p.display().to_string()));
            1
        }
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("error: {}", e);
            if code == 1 {
                let path = write_diagnostics(&cfg, Some(e.to_string()), &[]);
                eprintln!("diagnostics: {}", path.map_or("<unwritable>".into(), |p| p.display().to_string()));
            }
            code
        }
    }
}
