//! `vqrl`: train, evaluate, and size variational-quantum-circuit Q-learning
//! agents from the command line.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use vqrl_lab::runner::{self, EvalBackendArgs};

#[derive(Parser)]
#[command(
    name = "vqrl",
    version,
    about = "Quantum-circuit Q-learning on gridworld and radio-channel benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an agent from an experiment config file
    Train {
        /// Experiment config (JSON)
        config: PathBuf,
        /// Where to put artifacts (overrides the config)
        #[arg(long)]
        output_dir: Option<String>,
        /// Run this many consecutive seeds concurrently, one subdirectory each
        #[arg(long)]
        parallel_seeds: Option<u32>,
    },
    /// Run greedy evaluation episodes from a saved checkpoint
    Eval {
        /// Checkpoint file written by `train` (model.json)
        checkpoint: PathBuf,
        /// Environment: `frozen-lake`, `radio:N`, or a map/pattern file
        env: String,
        /// `analytic` (exact probabilities) or `shots` (sampled)
        #[arg(long, default_value = "analytic")]
        backend: String,
        /// Samples per action decision with the shots backend
        #[arg(long, default_value_t = 1024)]
        shots: u32,
        /// Device table for noisy sampling: a bundled name or a CSV path
        #[arg(long)]
        device: Option<String>,
        /// Device qubits for each circuit qubit, e.g. `0,1,3,4` (default: automatic)
        #[arg(long, value_delimiter = ',')]
        assignment: Option<Vec<usize>>,
        /// Number of evaluation episodes
        #[arg(long, default_value_t = 5)]
        episodes: u32,
        /// Base RNG seed (episode i uses seed + i)
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print trainable-parameter counts of tabular, neural, and quantum agents
    CompareParams {
        /// Inclusive channel range, e.g. `2..5`, or a single count
        #[arg(long, default_value = "2..5")]
        n: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Train { config, output_dir, parallel_seeds } => {
            runner::cmd_train(&config, output_dir.as_deref(), parallel_seeds)
        }
        Command::Eval { checkpoint, env, backend, shots, device, assignment, episodes, seed } => {
            let args = EvalBackendArgs { backend, shots, device, assignment };
            runner::cmd_eval(&checkpoint, &env, &args, episodes, seed)
        }
        Command::CompareParams { n } => runner::cmd_compare_params(&n),
    };
    match result {
        Ok(stdout) => {
            print!("{stdout}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            ExitCode::from(err.exit_code())
        }
    }
}
