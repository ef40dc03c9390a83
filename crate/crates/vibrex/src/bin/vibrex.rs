use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use vibrex::cli::{self, apply_kv, parse_config, CliError, ConfigError, RunConfig};

/// Exciton-phonon quantum state transfer: spectra, propagators, sweeps, and
/// closed-form optimality tables from one parameter set.
#[derive(Parser)]
#[command(name = "vibrex", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Path to a `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Exciton-phonon coupling force, pN.
    #[arg(long, global = true)]
    chi_pn: Option<f64>,

    /// Anchoring bond ratio.
    #[arg(long, global = true)]
    epsilon: Option<f64>,

    /// Temperature, K.
    #[arg(long, global = true)]
    temperature_k: Option<f64>,

    /// Propagator engine: exact, pt, pt-diagonal, or three-path.
    #[arg(long, global = true)]
    engine: Option<String>,

    /// Time-grid extent in Phi^-1.
    #[arg(long, global = true)]
    t_max_phi: Option<f64>,

    /// Phonon truncation: `auto`, `auto:<tol>`, or a fixed level count.
    #[arg(long, global = true)]
    n_max: Option<String>,

    /// Directory receiving the CSV tables.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Pair the exact spectrum with the dressed ladder on one truncation.
    Spectrum,
    /// Scan exact and dressed levels against the coupling force.
    Crossing,
    /// Scan the second-order energy and phonon shifts against anchoring.
    Shifts,
    /// Evaluate the transfer amplitude on a time grid.
    Propagate,
    /// Sweep the transfer maximum over the anchoring grid.
    SweepEps,
    /// Sweep the transfer maximum over the temperature grid.
    SweepTemp,
    /// Closed-form optimum and interference tables.
    Analytic,
    /// Run the cross-engine invariant suite.
    Validate,
}

impl Cmd {
    fn as_lib(&self) -> cli::Subcommand {
        match self {
            Cmd::Spectrum => cli::Subcommand::Spectrum,
            Cmd::Crossing => cli::Subcommand::Crossing,
            Cmd::Shifts => cli::Subcommand::Shifts,
            Cmd::Propagate => cli::Subcommand::Propagate,
            Cmd::SweepEps => cli::Subcommand::SweepEps,
            Cmd::SweepTemp => cli::Subcommand::SweepTemp,
            Cmd::Analytic => cli::Subcommand::Analytic,
            Cmd::Validate => cli::Subcommand::Validate,
        }
    }
}

fn resolve_config(args: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| ConfigError::Unreadable {
                    path: path.display().to_string(),
                    msg: e.to_string(),
                })?;
            parse_config(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(v) = args.chi_pn {
        apply_kv(&mut cfg, "chi_pN", &v.to_string(), 0)?;
    }
    if let Some(v) = args.epsilon {
        apply_kv(&mut cfg, "epsilon", &v.to_string(), 0)?;
    }
    if let Some(v) = args.temperature_k {
        apply_kv(&mut cfg, "temperature_K", &v.to_string(), 0)?;
    }
    if let Some(v) = &args.engine {
        apply_kv(&mut cfg, "engine", v, 0)?;
    }
    if let Some(v) = args.t_max_phi {
        apply_kv(&mut cfg, "t_max_phi", &v.to_string(), 0)?;
    }
    if let Some(v) = &args.n_max {
        apply_kv(&mut cfg, "n_max", v, 0)?;
    }
    if let Some(v) = &args.out_dir {
        apply_kv(&mut cfg, "out_dir", &v.display().to_string(), 0)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = match Cli::try_parse() {
        Ok(args) => args,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let cfg = match resolve_config(&args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(e.exit_code());
        }
    };
    match cli::dispatch(args.command.as_lib(), &cfg) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
