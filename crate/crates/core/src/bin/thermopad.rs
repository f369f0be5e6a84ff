use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thermopad::config::ExperimentConfig;
use thermopad::pipeline::{cmd_gen_data, cmd_report, cmd_run};

/// Thermal and visible-light hand presentation attack detection workbench.
#[derive(Parser)]
#[command(name = "thermopad", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic paired RGB/TH dataset.
    GenData {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train, score and fuse on every split, then write the report.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rebuild the report of a finished experiment directory.
    Report {
        #[arg(long)]
        exp: PathBuf,
        #[arg(long)]
        svg: bool,
    },
}

fn config_dir(path: &Path) -> &Path {
    path.parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::GenData { config, out } => ExperimentConfig::load(&config)
            .and_then(|cfg| cmd_gen_data(&cfg, &out))
            .map(|s| s.to_string()),
        Command::Run { config, data, out } => ExperimentConfig::load(&config)
            .and_then(|cfg| cmd_run(&cfg, config_dir(&config), &data, &out))
            .map(|r| format!("{}\nwritten to {}\n", r, r.dir.display())),
        Command::Report { exp, svg } => cmd_report(&exp, svg).map(|r| r.to_string()),
    };
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
