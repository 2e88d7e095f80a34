use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dtg_core::experiment::{self, FileStatus, LoadedConfig, Overrides, RunKind, RunReport};
use dtg_core::Error;

/// Runs discounted-time game experiments from TOML configs.
#[derive(Parser, Debug)]
#[command(name = "dtg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a config using the kind it declares.
    Run(RunArgs),
    /// Estimate one profile at one (eps, delta).
    Eval(RunArgs),
    /// Build the library bimatrix and solve it, per grid point.
    Solve(RunArgs),
    /// Sweep a profile over a rate schedule and extrapolate its limit.
    Sweep(RunArgs),
    /// Check uniform (and strong uniform) regret along a schedule.
    UniformCheck(RunArgs),
    /// Re-run a finished run directory and compare checksums.
    Replay {
        /// Run directory or its manifest.json.
        path: PathBuf,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Experiment config (TOML).
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_for(e: &Error) -> ExitCode {
    if e.is_validation() {
        ExitCode::from(1)
    } else {
        ExitCode::from(2)
    }
}

fn report(r: &RunReport) {
    println!("{} run written to {}", r.kind.as_str(), r.dir.display());
    for f in &r.manifest.files {
        println!("  {:<22} {} {:>8} bytes", f.path, &f.sha256[..16], f.bytes);
    }
    match r.passed {
        Some(true) => println!("result: pass"),
        Some(false) => println!("result: fail"),
        None => {}
    }
}

fn run_config(args: &RunArgs, kind: Option<RunKind>) -> ExitCode {
    // an unreadable config is bad input, whatever the underlying error
    let lc = match LoadedConfig::load(&args.config) {
        Ok(lc) => lc,
        Err(e) => {
            eprintln!("{}: {e}", args.config.display());
            return ExitCode::from(1);
        }
    };
    let o = Overrides { seed: args.seed, samples: args.samples, out: args.out.clone() };
    match experiment::run(lc, &o, kind) {
        Ok(r) => {
            report(&r);
            ExitCode::SUCCESS
        }
        Err(e) => {
            match &e {
                Error::Syntax { .. } => eprintln!("{}: {e}", args.config.display()),
                _ => eprintln!("error: {e}"),
            }
            exit_for(&e)
        }
    }
}

fn replay(path: &Path) -> ExitCode {
    match experiment::replay(path) {
        Ok(rep) => {
            for f in &rep.files {
                let tag = match f.status {
                    FileStatus::Identical => "identical",
                    FileStatus::Diverged => "DIVERGED",
                    FileStatus::Missing => "MISSING",
                };
                match &f.detail {
                    Some(d) => println!("{:<22} {tag} ({d})", f.path),
                    None => println!("{:<22} {tag}", f.path),
                }
            }
            if rep.all_identical() {
                println!("replay: identical");
                ExitCode::SUCCESS
            } else {
                println!("replay: diverged");
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, kind) = match &cli.command {
        Command::Replay { path } => return replay(path),
        Command::Run(a) => (a, None),
        Command::Eval(a) => (a, Some(RunKind::Eval)),
        Command::Solve(a) => (a, Some(RunKind::Solve)),
        Command::Sweep(a) => (a, Some(RunKind::Sweep)),
        Command::UniformCheck(a) => (a, Some(RunKind::UniformCheck)),
    };
    run_config(args, kind)
}
