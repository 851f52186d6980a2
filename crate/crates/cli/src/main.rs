use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use editstyle_cli::{cmd_analyze, cmd_index, cmd_review, cmd_transfer, CliError, ProjectConfig};

#[derive(Parser, Debug)]
#[command(name = "editstyle", version, about = "Extract the editing style of a video and re-apply it to raw footage")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Project configuration (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Override a config value, e.g. `--set shot_detect.cut_threshold=0.6`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// RANSAC seed; overrides `seed` in the config
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Detect shots and extract per-shot styles from the source
    Analyze(Common),
    /// Index the raw-footage repository
    Index(Common),
    /// Select footage, render output.y4m and write plan.json
    Transfer(Common),
    /// Emit side-by-side video, timeline and mosaic gallery
    Review(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Analyze(c) | Command::Index(c) | Command::Transfer(c) | Command::Review(c) => c,
        }
    }
}

fn run(args: Args) -> Result<(), CliError> {
    let common = args.command.common();
    let cfg = ProjectConfig::load(&common.config, &common.overrides, common.seed)?;
    match args.command {
        Command::Analyze(_) => {
            let (shots, _) = cmd_analyze(&cfg)?;
            eprintln!("analyze: {} shots", shots.len());
        }
        Command::Index(_) => {
            let index = cmd_index(&cfg)?;
            eprintln!("index: {} clips", index.len());
        }
        Command::Transfer(_) => {
            let plan = cmd_transfer(&cfg)?;
            eprintln!("transfer: {} shots rendered", plan.records.len());
        }
        Command::Review(_) => {
            let timeline = cmd_review(&cfg)?;
            eprintln!("review: {} shots on the timeline", timeline.source.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
