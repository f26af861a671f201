//! `lyacov`: steady-state covariance runs from one config file.
//!
//! Every command is a pure function of the resolved configuration (file,
//! then `--set` overrides, then flag overrides) and reproduces its output
//! bytewise on rerun, for any `--threads` value. Exit codes: 0 ok,
//! 2 config error, 3 computation error, 4 verification or statistical
//! failure.

mod commands;
mod config;
mod output;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process;

use clap::{Parser, Subcommand};

use commands::{CmdError, CmdOutput};
use config::{apply_override, parse_config, validate, RunConfig};

const EXIT_CONFIG: i32 = 2;
const EXIT_COMPUTE: i32 = 3;
const EXIT_CHECK: i32 = 4;

#[derive(Parser)]
#[command(
    name = "lyacov",
    version,
    about = "Steady-state covariance of dissipative stochastic systems: \
             spectra, Lyapunov solves, error-bound verification, and \
             Monte Carlo cross-checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Config file of `key = value` lines; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one config key; repeatable, applied in order after the file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Write the result document here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Cap on worker threads; the results are identical for any value.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Random seed override (config key `seed`).
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the truncated eigenvalue spectrum with mode labels.
    Spectrum,
    /// Project the configured noise and solve for the covariance P.
    Solve,
    /// Check truncation bounds, oracle agreement, and decay inequalities.
    Verify,
    /// Estimate P by exact-discretization Monte Carlo and compare.
    Simulate,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // clap exits 0 for --help/--version and 2 for usage errors,
        // matching the config-error code
        Err(e) => e.exit(),
    };
    process::exit(run(cli));
}

fn run(cli: Cli) -> i32 {
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("config error: --threads must be >= 1");
            return EXIT_CONFIG;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot size the thread pool: {e}");
            return EXIT_COMPUTE;
        }
    }

    let cfg = match resolve_config(&cli) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("config error: {msg}");
            return EXIT_CONFIG;
        }
    };

    let result = match cli.command {
        Command::Spectrum => commands::cmd_spectrum(&cfg),
        Command::Solve => commands::cmd_solve(&cfg),
        Command::Verify => commands::cmd_verify(&cfg),
        Command::Simulate => commands::cmd_simulate(&cfg),
    };

    match result {
        Ok(CmdOutput { bytes, failed }) => {
            if let Err(e) = emit(&cfg, &bytes) {
                eprintln!("error: cannot write output: {e}");
                return EXIT_COMPUTE;
            }
            if failed {
                EXIT_CHECK
            } else {
                0
            }
        }
        Err(CmdError::Config(msg)) => {
            eprintln!("config error: {msg}");
            EXIT_CONFIG
        }
        Err(CmdError::Compute(e)) => {
            eprintln!("error: {e}");
            EXIT_COMPUTE
        }
    }
}

fn resolve_config(cli: &Cli) -> Result<RunConfig, String> {
    let text = match &cli.config {
        Some(path) => {
            fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?
        }
        None => String::new(),
    };
    let mut cfg = parse_config(&text).map_err(|e| e.to_string())?;
    for pair in &cli.set {
        apply_override(&mut cfg, pair).map_err(|e| e.to_string())?;
    }
    if let Some(path) = &cli.output {
        cfg.output_path = Some(path.clone());
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let needs_verify = matches!(cli.command, Command::Verify);
    validate(&cfg, needs_verify).map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn emit(cfg: &RunConfig, bytes: &[u8]) -> std::io::Result<()> {
    match &cfg.output_path {
        Some(path) => fs::write(path, bytes),
        None => std::io::stdout().write_all(bytes),
    }
}
