// Copyright 2026 The weakdecay Authors
// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use weakdecay::commands;
use weakdecay::config::{self, ExtractConfig, RunConfig};
use weakdecay::validate::{self, ValidateOptions};
use weakdecay::{CliError, CliResult, RunOptions, DEFAULT_TOL};

/// Weak-measurement correlations of decaying quantum states.
#[derive(Parser)]
#[command(name = "weakdecay", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON config file; read from standard input when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, value_name = "N", default_value_t = 1)]
    jobs: usize,
    /// Absolute quadrature tolerance.
    #[arg(long, value_name = "X", default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Conditional average on a t grid.
    Curve(Common),
    /// Two-axis sweep of the violation surface.
    Scan(Common),
    /// Oracle cross-checks.
    Validate {
        /// Multiplies the fitted convention constant (negative control).
        #[arg(long, value_name = "X", default_value_t = 1.0)]
        convention_scale: f64,
    },
    /// Recover |V(k)|² + |V(−k)|² from a perturbative curve.
    Extract {
        #[command(flatten)]
        common: Common,
        /// Input curve CSV.
        #[arg(long, value_name = "PATH")]
        input: Option<String>,
        #[arg(long, value_name = "X")]
        k_max: Option<f64>,
        #[arg(long, value_name = "N")]
        k_count: Option<usize>,
    },
}

fn options(c: &Common) -> CliResult<RunOptions> {
    let o = RunOptions {
        jobs: c.jobs,
        tol: c.tol,
    };
    o.validate()?;
    Ok(o)
}

fn emit(bytes: &[u8], path: Option<PathBuf>) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(&p, bytes)
            .map_err(|e| CliError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display())))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn load_run(c: &Common) -> CliResult<RunConfig> {
    config::parse(&config::read_source(c.config.as_deref())?)
}

fn config_dir(c: &Common) -> Option<&Path> {
    c.config.as_deref().and_then(Path::parent)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Curve(c) => {
            let opts = options(&c)?;
            let cfg = load_run(&c)?;
            let bytes = commands::curve_bytes(&cfg, &opts, config_dir(&c))?;
            emit(&bytes, config::output_path(&cfg.output_path))
        }
        Command::Scan(c) => {
            let opts = options(&c)?;
            let cfg = load_run(&c)?;
            let out = commands::scan(&cfg, &opts)?;
            emit(&out.bytes, config::output_path(&cfg.output_path))?;
            if out.failures.is_empty() {
                Ok(())
            } else {
                for f in &out.failures {
                    eprintln!("{f}");
                }
                Err(CliError::numeric(format!("{} of {} points failed", out.failures.len(), out.records.len())))
            }
        }
        Command::Validate { convention_scale } => {
            if !(convention_scale > 0.0 && convention_scale.is_finite()) {
                return Err(CliError::usage("--convention-scale must be positive"));
            }
            let checks = validate::run(&ValidateOptions { convention_scale });
            print!("{}", validate::report(&checks));
            match checks.iter().filter(|c| !c.passed).count() {
                0 => Ok(()),
                n => Err(CliError::numeric(format!("{n} validation checks failed"))),
            }
        }
        Command::Extract {
            common,
            input,
            k_max,
            k_count,
        } => {
            options(&common)?;
            let mut cfg = if common.config.is_some() || input.is_none() {
                config::parse::<ExtractConfig>(&config::read_source(common.config.as_deref())?)?
            } else {
                ExtractConfig::default()
            };
            cfg.input = input.or(cfg.input);
            cfg.k_max = k_max.or(cfg.k_max);
            cfg.k_count = k_count.or(cfg.k_count);
            let out = commands::extract(&cfg)?;
            for n in &out.notes {
                eprintln!("{n}");
            }
            emit(&out.bytes, config::output_path(&cfg.output_path))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("weakdecay: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
