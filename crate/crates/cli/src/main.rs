use std::path::PathBuf;
use std::process::ExitCode;

use aptdefense_cli::commands::{self, GenerateArgs, SweepArgs, EXIT_INPUT};
use aptdefense_cli::config::NetworkModel;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "aptdefense",
    version,
    about = "Optimal APT defense on access networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    ScaleFree,
    ScaleFreeExponent,
    SmallWorld,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic access network as an edge list.
    Generate {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Edges per new node (scale-free models).
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Degree exponent (scale-free-exponent).
        #[arg(long, default_value_t = 3.0)]
        gamma: f64,
        /// Even ring degree (small-world).
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Rewiring probability (small-world).
        #[arg(long, default_value_t = 0.1)]
        p: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output file; the edge list goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the optimal control problem described by a config file.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the optimal strategy with the three static baselines.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep admissible bounds or network topology.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// bounds-x, bounds-y, scale-free-gamma, small-world-p or baseline-compare.
        #[arg(long)]
        scenario: String,
        /// Comma-separated values, or `lower:upper` pairs for bound sweeps.
        #[arg(long)]
        points: Option<String>,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> aptdefense_cli::CliResult<i32> {
    match cli.command {
        Command::Generate {
            model,
            n,
            m,
            gamma,
            k,
            p,
            seed,
            out,
        } => commands::generate(&GenerateArgs {
            model: match model {
                Model::ScaleFree => NetworkModel::ScaleFree,
                Model::ScaleFreeExponent => NetworkModel::ScaleFreeExponent,
                Model::SmallWorld => NetworkModel::SmallWorld,
            },
            n,
            m,
            gamma,
            k,
            p,
            seed,
            out,
        }),
        Command::Solve { config, out } => commands::solve(&config, out),
        Command::Compare { config, out } => commands::compare(&config, out),
        Command::Sweep {
            config,
            scenario,
            points,
            replicates,
            out,
        } => commands::sweep(&SweepArgs {
            config,
            scenario,
            points,
            replicates,
            out,
        }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors; everything else is an
            // input error, keeping exit code 2 for non-convergence.
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
