//! Batch command-line interface.
//!
//! Exit codes: `0` success, `2` configuration or input error, `3` runtime
//! constraint violation (partial output is kept).

pub mod commands;
pub mod config;
pub mod io;
pub mod selftest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::error::HbkError;
use commands::Outcome;
pub use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Regularized spin-1/2 lattice Boltzmann solver.
///
/// Lattice dimension is limited to d <= 3; the direct collision sum costs
/// O(N^(2d)) per point, so d = 3 is practical only for N <= 8.
#[derive(Debug, Parser)]
#[command(name = "hbk", version)]
pub struct Args {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration; defaults are used when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, global = true, value_name = "DIR")]
    pub output: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "HBK_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Overrides `seed` from the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Integrate the kinetic equation and write trajectory, snapshots and report.
    Simulate,
    /// Increments of H_eff or C_diss along a paired (N, epsilon) schedule.
    EpsilonStudy,
    /// Bessel envelope, propagator decay and box integrability checks.
    ValidateDispersion,
    /// Collision-measure mass as a function of the energy offset alpha.
    SigmaColl,
    /// Run the invariant suite; nonzero exit on any failure.
    Selftest,
}

/// Exit status for an error.
pub fn exit_code(e: &HbkError) -> i32 {
    match e {
        HbkError::DtTooLarge { .. }
        | HbkError::NotPsd { .. }
        | HbkError::NotHermitian { .. }
        | HbkError::EmptyInput(_) => EXIT_RUNTIME,
        _ => EXIT_CONFIG,
    }
}

fn load(args: &Args) -> Result<RunConfig, HbkError> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.output {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(command: Command, cfg: &RunConfig) -> Result<Outcome, HbkError> {
    let out = &cfg.output_dir;
    std::fs::create_dir_all(out)?;
    match command {
        Command::Simulate => commands::simulate(cfg, out),
        Command::EpsilonStudy => commands::run_epsilon_study(cfg, out),
        Command::ValidateDispersion => commands::validate_dispersion(cfg, out),
        Command::SigmaColl => commands::sigma_coll(cfg, out),
        Command::Selftest => {
            let reports = selftest::run_suite(cfg.seed)?;
            let failed: Vec<&str> = reports
                .iter()
                .filter(|r| !r.passed())
                .map(|r| r.name.as_str())
                .collect();
            for r in &reports {
                log::info!("{:<44} {:?} (residual {:.3e})", r.name, r.verdict, r.max_residual());
            }
            let (_, cfg_json) = commands::provenance(cfg);
            io::write_json(
                &out.join("selftest.json"),
                &json!({ "config": cfg_json, "failed": failed, "reports": reports }),
            )?;
            if failed.is_empty() {
                Ok(Outcome::Ok)
            } else {
                Ok(Outcome::ConstraintViolated(format!(
                    "selftest failures: {}",
                    failed.join(", ")
                )))
            }
        }
    }
}

/// Parses `argv`, runs the command on a dedicated thread pool and returns
/// the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).try_init();
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let cfg = match load(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(args.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return EXIT_CONFIG;
        }
    };
    match pool.install(|| dispatch(args.command, &cfg)) {
        Ok(Outcome::Ok) => EXIT_OK,
        Ok(Outcome::ConstraintViolated(msg)) => {
            eprintln!("constraint violated: {msg}");
            EXIT_RUNTIME
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
