mod commands;
mod error;
mod manifest;

use clap::{Parser, Subcommand};

use commands::{compare, fit, replay, select, synth, tradeoff};

/// Demand response targeting: fit per-customer temperature response models
/// from hourly meter data and pick the customer set most likely to meet an
/// aggregate curtailment target.
#[derive(Debug, Parser)]
#[command(name = "drtarget", version)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, env = "DRTARGET_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic population with known response parameters.
    Synth(synth::SynthArgs),
    /// Fit response models and write per-customer response estimates.
    Fit(fit::FitArgs),
    /// Select customers for a target from an estimates file.
    Select(select::SelectArgs),
    /// Trace availability/reliability curves.
    Tradeoff(tradeoff::TradeoffArgs),
    /// Tabulate heuristic sweep sizes against greedy and the exact optimum.
    Compare(compare::CompareArgs),
    /// Regenerate a run from its manifest and check every artifact matches.
    Replay(replay::ReplayArgs),
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            std::process::exit(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("thread pool is configured once");
    }
    let result = match cli.command {
        Command::Synth(args) => synth::run(&args),
        Command::Fit(mut args) => fit::run(&mut args),
        Command::Select(mut args) => select::run(&mut args),
        Command::Tradeoff(mut args) => tradeoff::run(&mut args),
        Command::Compare(mut args) => compare::run(&mut args),
        Command::Replay(args) => replay::run(&args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
