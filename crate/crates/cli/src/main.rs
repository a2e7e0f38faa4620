//! `mkt`: synthesize benchmarks, train domain sequences, sweep lambda,
//! score checkpoints and plot forgetting curves.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mkt_core::Method;

#[derive(Debug, Parser)]
#[command(name = "mkt", version, about = "Continual spelling correction with multi-stage knowledge transfer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic benchmark (the default one, or the one a config names) to disk.
    Synth {
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Benchmark seed; defaults to the config's master_seed, or 0.
        #[arg(long)]
        seed: Option<u64>,
        /// Experiment config whose benchmark should be written.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Train the domain sequence described by a config and evaluate after every stage.
    Train {
        #[command(flatten)]
        run: RunArgs,
        /// Overrides the stage lambda.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, value_parser = parse_method)]
        method: Option<Method>,
    },
    /// Run one experiment per lambda over a shared first stage.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated lambdas, replacing the config's list.
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
    },
    /// Score a checkpoint on a `source<TAB>target` corpus file and print JSON metrics.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        /// The run's vocab.txt.
        #[arg(long)]
        vocab: PathBuf,
    },
    /// Draw per-stage F1 of one domain for one or more runs as an SVG.
    Plot {
        /// Run directories, or forgetting.csv / metrics.csv files inside them.
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        domain: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides master_seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse::<Method>().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let chain: Vec<String> = e.chain().map(|c| c.to_string()).collect();
            let report = serde_json::json!({ "error": e.to_string(), "causes": &chain[1..] });
            eprintln!("{report}");
            ExitCode::from(2)
        }
    }
}
