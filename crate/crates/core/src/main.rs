use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use reglue_kit::app::{load_job, run};
use reglue_kit::config::Command;

/// Cut, classify and reglue quadratic rational maps.
#[derive(Parser)]
#[command(name = "reglue-kit", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify a grid of parameters (PPM raster + JSONL cells, resumable).
    Scan(JobArgs),
    /// Classify the free critical orbit of one parameter.
    Classify(JobArgs),
    /// Locate a center from an angle p/q (spider) or a landing time (Newton).
    Center(JobArgs),
    /// Build the cut family and its complex.
    Cuts(JobArgs),
    /// Trace an internal or external ray.
    Ray(JobArgs),
    /// Sample the cut plane and its opened image.
    ReglueDemo(JobArgs),
}

#[derive(Args)]
struct JobArgs {
    /// File of key=value lines; settings given on the command line win.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short)]
    out: Option<String>,
    /// Settings such as k=2 a=3 depth=4 window=[-3,5]x[-4,4].
    settings: Vec<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let message = e.render().to_string();
            eprintln!("{}", serde_json::json!({ "error": "config", "message": message.trim_end() }));
            return ExitCode::from(2);
        }
    };
    let (command, args) = match cli.command {
        Cmd::Scan(a) => (Command::Scan, a),
        Cmd::Classify(a) => (Command::Classify, a),
        Cmd::Center(a) => (Command::Center, a),
        Cmd::Cuts(a) => (Command::Cuts, a),
        Cmd::Ray(a) => (Command::Ray, a),
        Cmd::ReglueDemo(a) => (Command::ReglueDemo, a),
    };
    let mut settings = args.settings;
    if let Some(out) = args.out {
        settings.push(format!("out={out}"));
    }
    match load_job(command, args.config.as_deref(), &settings).and_then(|cfg| run(&cfg)) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
