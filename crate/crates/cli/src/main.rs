//! `gfrac` — command-line front end for the clock-driven fractional
//! diffusion engine.
//!
//! Every subcommand reads the same flat key/value configuration (optional
//! `--config FILE` plus override flags), builds one scenario, and emits a
//! single artifact on stdout (or `output.path`): CSV curves and grids, or
//! JSON reports. Exit codes: 0 success, 2 configuration error, 3 numeric
//! error.

// Guards are written as `!(x > 0.0)` on purpose: the negated form also
// rejects NaN, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{compile, config_err, CliError, RawConfig, Settings};

#[derive(Parser)]
#[command(
    name = "gfrac",
    version,
    about = "Fractional diffusion on boxes with a configurable internal clock: \
             first-passage curves, exit-time regimes, stationary profiles, and \
             finite-difference validation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// First-passage time density curve (CSV: t,phi,phi_asymptotic)
    Fptd(Overrides),
    /// Survival probability curve (CSV: t,survival)
    Survival(Overrides),
    /// Concentration field on a sample grid at one time (needs --t or time.at)
    Field(Overrides),
    /// Mean first-passage time with its regime (JSON)
    Mfpt(Overrides),
    /// Exit-time regime from the clock and order alone, no series work (JSON)
    Classify(Overrides),
    /// Long-time stationary profile, saturating clocks only
    Stationary(Overrides),
    /// Cross-check the series solution against a finite-difference solver (JSON)
    Validate(Overrides),
}

impl Command {
    fn overrides(&self) -> &Overrides {
        match self {
            Command::Fptd(o)
            | Command::Survival(o)
            | Command::Field(o)
            | Command::Mfpt(o)
            | Command::Classify(o)
            | Command::Stationary(o)
            | Command::Validate(o) => o,
        }
    }
}

/// Flags shared by all subcommands; each overrides the matching
/// configuration key.
#[derive(Args)]
struct Overrides {
    /// Configuration file (flat `key = value` lines)
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Fractional order in (0, 1]  [key: order.alpha]
    #[arg(long, value_name = "ALPHA")]
    alpha: Option<f64>,

    /// Clock family: identity | power_law | dodson  [key: clock.family]
    #[arg(long, value_name = "FAMILY")]
    clock: Option<String>,

    /// Clock parameter: exponent for power_law, rate for dodson
    #[arg(long, value_name = "BETA")]
    beta: Option<f64>,

    /// Spatial dimension  [key: domain.dim]
    #[arg(long, value_name = "D")]
    dim: Option<usize>,

    /// Box edge lengths, comma separated  [key: domain.lengths]
    #[arg(long, value_name = "L1,..")]
    lengths: Option<String>,

    /// Diffusion constant  [key: domain.diffusion]
    #[arg(long, value_name = "D0")]
    diffusion: Option<f64>,

    /// Release point, comma separated  [key: initial.x0]
    #[arg(long, value_name = "X1,..")]
    x0: Option<String>,

    /// Field evaluation time  [key: time.at]
    #[arg(long, value_name = "T")]
    t: Option<f64>,

    /// First sample time  [key: time.min]
    #[arg(long, value_name = "T")]
    tmin: Option<f64>,

    /// Last sample time  [key: time.max]
    #[arg(long, value_name = "T")]
    tmax: Option<f64>,

    /// Number of sample times  [key: time.points]
    #[arg(long, value_name = "N")]
    tpoints: Option<usize>,

    /// Output format: csv | json  [key: output.format]
    #[arg(long, value_name = "FMT")]
    format: Option<String>,

    /// Output file (stdout when absent)  [key: output.path]
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

impl Overrides {
    fn to_raw(&self) -> Result<RawConfig, CliError> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::from_file(path)?,
            None => RawConfig::default(),
        };
        if let Some(v) = self.alpha {
            raw.set("order.alpha", v.to_string());
        }
        if let Some(v) = &self.clock {
            raw.set("clock.family", v.clone());
        }
        if let Some(v) = self.beta {
            // The parameter key depends on the effective clock family.
            let family = raw.get("clock.family").unwrap_or("identity");
            let key = if family == "dodson" { "clock.rate" } else { "clock.beta" };
            raw.set(key, v.to_string());
        }
        if let Some(v) = self.dim {
            raw.set("domain.dim", v.to_string());
        }
        if let Some(v) = &self.lengths {
            raw.set("domain.lengths", v.clone());
        }
        if let Some(v) = self.diffusion {
            raw.set("domain.diffusion", v.to_string());
        }
        if let Some(v) = &self.x0 {
            raw.set("initial.x0", v.clone());
        }
        if let Some(v) = self.t {
            raw.set("time.at", v.to_string());
        }
        if let Some(v) = self.tmin {
            raw.set("time.min", v.to_string());
        }
        if let Some(v) = self.tmax {
            raw.set("time.max", v.to_string());
        }
        if let Some(v) = self.tpoints {
            raw.set("time.points", v.to_string());
        }
        if let Some(v) = &self.format {
            raw.set("output.format", v.clone());
        }
        if let Some(v) = &self.out {
            raw.set(
                "output.path",
                v.to_str()
                    .ok_or_else(|| config_err("--out: path is not valid UTF-8"))?,
            );
        }
        Ok(raw)
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("{e}");
        std::process::exit(i32::from(e.exit_code()));
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let raw = cli.command.overrides().to_raw()?;
    let settings = compile(&raw)?;
    let text = match &cli.command {
        Command::Fptd(_) => commands::cmd_fptd(&settings)?,
        Command::Survival(_) => commands::cmd_survival(&settings)?,
        Command::Field(_) => commands::cmd_field(&settings)?,
        Command::Mfpt(_) => commands::cmd_mfpt(&settings)?,
        Command::Classify(_) => commands::cmd_classify(&settings)?,
        Command::Stationary(_) => commands::cmd_stationary(&settings)?,
        Command::Validate(_) => commands::cmd_validate(&settings)?,
    };
    emit(&settings, &text)
}

fn emit(settings: &Settings, text: &str) -> Result<(), CliError> {
    match &settings.out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => std::fs::write(path, text)
            .map_err(|e| config_err(format!("cannot write {path}: {e}"))),
    }
}
