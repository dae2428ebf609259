//! `paseed`: run preferential-attachment seed experiments from TOML configs.
//!
//! Exit status: 0 success, 2 configuration error, 3 numerical failure
//! (including a failed `validate` check), 4 I/O error.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use paseed::rng::GENERATOR_NAME;

use crate::commands::Context;
use crate::config::{parse, TreeResolver};
use crate::error::{CliError, CliResult};
use crate::output::{sha256_hex, Manifest, Outputs};

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (", env!("PASEED_GIT_DESCRIBE"), ")");

#[derive(Debug, Parser)]
#[command(name = "paseed", version = VERSION, about = "Preferential-attachment seed experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration for the subcommand (optional for `validate`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory receiving the CSV tables and manifest.json.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses all logical cores.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Grow replicas of PA(n, seed); degree trajectories and shape histograms.
    Grow,
    /// Exact, quadrature and asymptotic subset-degree tails over a t grid.
    Tail,
    /// Moments of a scaled statistic against its limit law.
    Moments,
    /// Pattern-weighted maximum degree of fixed host trees.
    Umax,
    /// Pattern-weighted maximum degree along growth.
    UmaxSweep,
    /// Ball distribution of a grown tree against the Polya-point limit.
    LocalLimit,
    /// Statistic-based lower bound on the TV distance between two seeds.
    TvLowerBound,
    /// Empirical rooted-ball distributions for one or more seeds.
    BallDist,
    /// Fast invariant suite.
    Validate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Grow => "grow",
            Command::Tail => "tail",
            Command::Moments => "moments",
            Command::Umax => "umax",
            Command::UmaxSweep => "umax-sweep",
            Command::LocalLimit => "local-limit",
            Command::TvLowerBound => "tv-lower-bound",
            Command::BallDist => "ball-dist",
            Command::Validate => "validate",
        }
    }
}

fn run(cli: &Cli) -> CliResult<bool> {
    let started = Instant::now();
    let started_unix_seconds = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?,
        None if matches!(cli.command, Command::Validate) => String::new(),
        None => return Err(CliError::Config(format!("`{}` needs --config", cli.command.name()))),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;

    let ctx = Context {
        master_seed: cli.seed,
        resolver: TreeResolver::new(cli.config.as_deref()),
    };
    let mut out = Outputs::create(&cli.out)?;
    let passed = match cli.command {
        Command::Grow => commands::grow(&parse(&text)?, &ctx, &mut out).map(|_| true),
        Command::Tail => commands::tail(&parse(&text)?, &mut out).map(|_| true),
        Command::Moments => commands::moments(&parse(&text)?, &ctx, &mut out).map(|_| true),
        Command::Umax => commands::umax(&parse(&text)?, &ctx, &mut out).map(|_| true),
        Command::UmaxSweep => commands::umax_sweep(&parse(&text)?, &ctx, &mut out).map(|_| true),
        Command::LocalLimit => commands::local_limit(&parse(&text)?, &ctx, &mut out).map(|_| true),
        Command::TvLowerBound => commands::tv_lower_bound(&parse(&text)?, &ctx, &mut out).map(|_| true),
        Command::BallDist => commands::ball_dist(&parse(&text)?, &ctx, &mut out).map(|_| true),
        Command::Validate => validate::validate(&parse(&text)?, cli.seed, &mut out),
    }?;

    Manifest {
        subcommand: cli.command.name().to_string(),
        config_path: cli.config.as_ref().map(|p| p.display().to_string()),
        config_sha256: sha256_hex(text.as_bytes()),
        master_seed: cli.seed,
        threads: rayon::current_num_threads(),
        generator: GENERATOR_NAME.to_string(),
        version: VERSION.to_string(),
        status: if passed { "ok" } else { "checks_failed" }.to_string(),
        outputs: out.files().to_vec(),
        started_unix_seconds,
        wall_time_seconds: started.elapsed().as_secs_f64(),
    }
    .write(out.dir())?;
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("paseed: validation checks failed; see validate.csv");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("paseed: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
