use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use subsel::config::ExperimentConfig;
use subsel::pipeline::{default_output_dir, execute, Command};
use subsel::{presets, report, RunError};

/// Source-subset selection experiments: split, partition, ensemble and bandit
/// selection, policy comparison.
#[derive(Parser)]
#[command(name = "subsel", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate simulated datasets (one per repetition).
    Simulate(Common),
    /// Split into target and source.
    Split(Common),
    /// Split and partition the source into subsets.
    Partition(Common),
    /// Dirichlet random-search ensemble selection.
    Ensemble(Common),
    /// Bandit selection with the configured policy.
    Bandit(Common),
    /// Thompson sampling against random selection over paired repetitions.
    Compare(Common),
    /// Everything the config's `method` asks for.
    Run(Common),
    /// Verify a run directory against its manifest and summarize it.
    Report {
        /// Run directory containing manifest.json.
        dir: PathBuf,
    },
    /// List the built-in presets, or print one.
    Presets {
        name: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long, short, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset name.
    #[arg(long, short)]
    preset: Option<String>,
    /// Output directory [default: $SUBSEL_OUTPUT_ROOT/<name>-<command>].
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of repetitions.
    #[arg(long)]
    repetitions: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::Simulate(c) => (Command::Simulate, c),
        Cmd::Split(c) => (Command::Split, c),
        Cmd::Partition(c) => (Command::Partition, c),
        Cmd::Ensemble(c) => (Command::Ensemble, c),
        Cmd::Bandit(c) => (Command::Bandit, c),
        Cmd::Compare(c) => (Command::Compare, c),
        Cmd::Run(c) => (Command::Run, c),
        Cmd::Report { dir } => {
            return match report::report(&dir) {
                Ok(text) => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(3)
                }
            };
        }
        Cmd::Presets { name: None } => {
            presets::NAMES.iter().for_each(|n| println!("{n}"));
            return ExitCode::SUCCESS;
        }
        Cmd::Presets { name: Some(name) } => {
            return match presets::source(&name) {
                Some(text) => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                None => {
                    eprintln!("error: unknown preset `{name}`");
                    ExitCode::from(2)
                }
            };
        }
    };

    match run(command, common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command, common: Common) -> Result<(), RunError> {
    let mut config = match (&common.config, &common.preset) {
        (Some(path), _) => ExperimentConfig::from_path(path)?,
        (None, Some(name)) => presets::load(name)?,
        (None, None) => unreachable!("clap requires one of --config and --preset"),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(r) = common.repetitions {
        config.repetitions = r;
    }
    let out = common
        .out
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| default_output_dir(&config, command));
    let outcome = execute(command, &config, &out)?;
    for c in &outcome.comparisons {
        println!(
            "K={}: thompson beat random in {}/{} pairs (win rate {:.3}); mean final {} {:.6} vs {:.6}",
            c.k, c.wins, c.repetitions, c.win_rate, c.metric, c.thompson_final_mean, c.random_final_mean
        );
    }
    println!("wrote {} files to {}", outcome.manifest.files.len() + 1, outcome.dir.display());
    Ok(())
}
