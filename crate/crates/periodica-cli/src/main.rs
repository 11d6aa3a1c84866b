use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use periodica_cli::config::{load_config, Mode, Overrides};
use periodica_cli::error::{CliError, CliResult};
use periodica_cli::pipeline;

/// Periodic-component extraction and bootstrapped-EM imputation for daily
/// series.
#[derive(Parser)]
#[command(name = "periodica", version, about)]
struct Cli {
    /// Configuration file (TOML); flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Global seed; every stochastic stage derives its own sub-seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Input series CSV (overrides [input].path).
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Output directory (overrides [output].dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Imputation conditions to run: enhanced, baseline, or both.
    #[arg(long, global = true)]
    mode: Option<Mode>,

    /// Bootstrap replicate count (overrides [bootstrap].replicates).
    #[arg(long, global = true)]
    replicates: Option<usize>,

    /// Number of imputations (overrides [imputation].imputations).
    #[arg(long, global = true)]
    imputations: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inject the configured MAR mask into a complete series.
    Simulate,
    /// Extract periodic components and bootstrap their significance.
    Components,
    /// Run the bootstrapped-EM multiple imputation.
    Impute,
    /// Smooth the combined imputed series (LOESS and moving average).
    Smooth,
    /// Score imputations against the held-out truth.
    Evaluate,
    /// Run every stage and write the manifest.
    Pipeline,
    /// Emit tidy long-format data for external plotting.
    PlotData,
}

fn configure_threads() -> CliResult<()> {
    if let Ok(raw) = std::env::var("PERIODICA_THREADS") {
        let n: usize = raw
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| {
                CliError::Config(format!(
                    "PERIODICA_THREADS must be a positive integer, got '{raw}'"
                ))
            })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let overrides = Overrides {
        seed: cli.seed,
        input: cli.input,
        out: cli.out,
        mode: cli.mode,
        replicates: cli.replicates,
        imputations: cli.imputations,
    };
    let cfg = load_config(cli.config.as_deref(), &overrides)?;
    match cli.command {
        Command::Simulate => pipeline::cmd_simulate(&cfg),
        Command::Components => pipeline::cmd_components(&cfg),
        Command::Impute => pipeline::cmd_impute(&cfg),
        Command::Smooth => pipeline::cmd_smooth(&cfg),
        Command::Evaluate => pipeline::cmd_evaluate(&cfg),
        Command::Pipeline => {
            let manifest = pipeline::run_pipeline(&cfg)?;
            for w in &manifest.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "pipeline complete: {} files, significant components: {}",
                manifest.files.len(),
                if manifest.significant_components.is_empty() {
                    "none".to_string()
                } else {
                    manifest.significant_components.join(", ")
                }
            );
            Ok(())
        }
        Command::PlotData => pipeline::cmd_plotdata(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
