//! The `ponomarev` command-line front end.
//!
//! Exit codes: 0 success, 2 verification failure, 3 configuration or I/O
//! error, 4 numeric error.

pub mod commands;
pub mod config;
pub mod io;
pub mod render;
pub mod verify;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use config::{RunConfig, Theorem};
pub use io::{parse_points, Stamp};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) | CliError::Unsupported(_) => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ponomarev", version, about = "Gauge-parameterized Ponomarev homeomorphisms")]
pub struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: the config's `out`, else `.`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// ε grid as `lo:hi:count`.
    #[arg(long = "eps-grid", global = true)]
    pub eps_grid: Option<String>,
    #[arg(long, global = true)]
    pub resolution: Option<usize>,
    /// Sequence construction: 1 (positive h-measure) or 2 (null h-measure).
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub theorem: Option<u8>,
    /// Points file for `eval`.
    #[arg(long, global = true)]
    pub points: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Table of a_k, b_k, radii, radial coefficients and theorem checks.
    Sequence,
    /// Evaluate f and f^{-1}(f(x)) at the points of --points.
    Eval,
    /// Run the verification suite; exits 2 if a check fails.
    Verify,
    /// Grand-norm report over the ε grid.
    Norms,
    /// Upper Hausdorff cover sums at every depth.
    Hausdorff,
    /// PGM/PPM renderings of the planar map.
    Render,
}

/// Config file with the command-line overrides applied.
pub fn effective_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(d) = cli.depth {
        cfg.depth = d;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(g) = &cli.eps_grid {
        cfg.eps_grid = Some(g.clone());
    }
    if let Some(r) = cli.resolution {
        cfg.resolution = r;
    }
    if let Some(t) = cli.theorem {
        cfg.theorem = if t == 1 { Theorem::Thm1 } else { Theorem::Thm2 };
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs a parsed command line and returns the exit code.
pub fn run(cli: &Cli) -> Result<i32, CliError> {
    let cfg = effective_config(cli)?;
    let res = cfg.resolve()?;
    let stamp = Stamp {
        config_digest: cfg.digest(),
        seed: cfg.seed,
    };
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let mut out = io::OutputDir::create(&dir, stamp)?;
    let code = match cli.command {
        Command::Sequence => {
            commands::cmd_sequence(&cfg, &res, &mut out)?;
            EXIT_OK
        }
        Command::Eval => {
            let path = cli
                .points
                .as_ref()
                .ok_or_else(|| CliError::Config("eval needs --points".into()))?;
            let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let failed = commands::cmd_eval(&res, &text, &mut out)?;
            if failed > 0 {
                eprintln!("{failed} rows failed; see the error column");
            }
            EXIT_OK
        }
        Command::Verify => {
            let report = commands::cmd_verify(&cfg, &res, &mut out)?;
            for c in &report.checks {
                let tag = if c.passed { "ok  " } else { "FAIL" };
                println!("{tag} {:<32} observed {:e} bound {:e}", c.name, c.observed, c.bound);
            }
            if report.passed {
                EXIT_OK
            } else {
                EXIT_VERIFY
            }
        }
        Command::Norms => {
            let r = commands::cmd_norms(&cfg, &res, &mut out)?;
            println!("sup over grid {:e} (depth {})", r.sup, r.depth);
            EXIT_OK
        }
        Command::Hausdorff => {
            commands::cmd_hausdorff(&res, &mut out)?;
            EXIT_OK
        }
        Command::Render => {
            render::cmd_render(&res, cfg.resolution, &mut out)?;
            EXIT_OK
        }
    };
    for p in out.written() {
        println!("wrote {}", p.display());
    }
    Ok(code)
}

/// Entry point used by the binary: parses `args` (program name first),
/// runs, reports errors on stderr and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
