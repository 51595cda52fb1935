use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use surfrev_cli::{run, Command, CommandSpec, Flags};

/// Spectral data and inverse reconstruction for surfaces of revolution.
#[derive(Parser)]
#[command(name = "surfrev", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Input JSON file.
    input: PathBuf,
    /// Primary output file; companion artifacts share its stem.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    flags: Flags,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let spec = CommandSpec { command: cli.command, input: cli.input, output: cli.out, flags: cli.flags };
    match run(&spec) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for a in &outcome.artifacts {
                eprintln!("wrote {}", a.display());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
