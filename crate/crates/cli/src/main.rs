use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ela_predict::error::Error;
use ela_predict_cli::config::{ConfigFile, Profile, RunConfig};
use ela_predict_cli::{cmd_evaluate, cmd_explain, cmd_features, cmd_ingest, cmd_simulate};

/// Landscape-aware optimizer performance prediction with exact Shapley
/// explanations.
#[derive(Parser)]
#[command(name = "ela-predict", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed; every randomized stage derives from it.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Experiment scale: "desk" (minutes) or "paper" (full protocol).
    #[arg(long, global = true)]
    profile: Option<String>,

    /// Output directory for all artifacts.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the ELA feature matrix over the benchmark suite.
    Features,
    /// Generate synthetic optimizer performance data.
    Simulate,
    /// Validate a per-run performance CSV and write the medianized table.
    Ingest,
    /// Cross-validate STR/MTR models and emit the per-problem MAE report.
    Evaluate,
    /// Emit importance, beeswarm, Venn, representation, t-SNE and local
    /// explanation artifacts.
    Explain,
}

fn run(cli: Cli) -> Result<(), Error> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let profile = cli.profile.as_deref().map(Profile::parse).transpose()?;
    let cfg = RunConfig::resolve(&file, profile, cli.seed, cli.out_dir.clone())?;
    let written = match cli.command {
        Command::Features => cmd_features(&cfg)?,
        Command::Simulate => cmd_simulate(&cfg)?,
        Command::Ingest => cmd_ingest(&cfg)?,
        Command::Evaluate => cmd_evaluate(&cfg)?,
        Command::Explain => cmd_explain(&cfg)?,
    };
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_user_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
