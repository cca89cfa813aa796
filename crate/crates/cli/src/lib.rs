//! Command-line front end: scenario runs, baselines, census tools and renders.

pub mod commands;
pub mod scenario;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use brouwer_core::exec::Executor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "brouwer", version, about = "Concept invention and construction experiments")]
pub struct Cli {
    /// JSON config file for the command.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the seed in the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 evaluates sequentially.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Format of the summary printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the invent-and-construct loop on a scenario.
    Run,
    /// Solve a STRIPS planning problem.
    Plan,
    /// Evolve mazes in novelty or objective mode.
    Evolve,
    /// Distill a conserved expression from trajectory data.
    Regress,
    /// Classify every blockworld goal concept as realizable or not.
    Census,
    /// Draw a maze (JSON) or a CSV history as SVG.
    Render { file: PathBuf },
    /// Rank alternatives under a weighted-sum evaluation model.
    Evaluate,
    /// Fit an affine least-squares predictor.
    Fit,
    /// Deductive closure of a propositional theory.
    Closure,
    /// Compare maze coverage of novelty and objective selection.
    Contrast,
}

/// Settings shared by every command.
pub struct Settings {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub exec: Executor,
}

impl Settings {
    pub fn config_path(&self) -> Result<&PathBuf> {
        self.config.as_ref().context("this command needs --config PATH")
    }
}

/// Runs the parsed command and returns the process exit code.
pub fn execute(cli: Cli) -> Result<i32> {
    let exec = Executor::with_threads(cli.threads).context("cannot start the worker pool")?;
    let ctx = Settings {
        config: cli.config,
        seed: cli.seed,
        out: cli.out,
        format: cli.format,
        exec,
    };
    use commands::*;
    match cli.command {
        Command::Run => cmd_run(&ctx),
        Command::Plan => cmd_plan(&ctx),
        Command::Evolve => cmd_evolve(&ctx),
        Command::Regress => cmd_regress(&ctx),
        Command::Census => cmd_census(&ctx),
        Command::Render { file } => cmd_render(&ctx, &file),
        Command::Evaluate => cmd_evaluate(&ctx),
        Command::Fit => cmd_fit(&ctx),
        Command::Closure => cmd_closure(&ctx),
        Command::Contrast => cmd_contrast(&ctx),
    }
}

/// Entry point used by the binary: argument errors and failures exit 1,
/// so that 2 stays reserved for an exhausted run.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
