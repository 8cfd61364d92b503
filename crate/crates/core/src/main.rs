use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cby::cli_io::{self, CliError};

#[derive(Parser)]
#[command(name = "cby", version, about = "Frame-gauge Einstein and Einstein-Euler evolution on a periodic box")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a scenario, writing residuals.csv and snapshots.
    Run { config: PathBuf },
    /// Report hyperbolicity, speeds and initial residuals without evolving.
    Check { config: PathBuf },
    /// Write the initial state of a scenario as a snapshot.
    Idata {
        config: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
}

fn dispatch(cmd: Command) -> Result<i32, CliError> {
    let mut out = io::stdout().lock();
    match cmd {
        Command::Run { config } => Ok(cli_io::run(&cli_io::load_config(config)?, &mut out)?.exit_code),
        Command::Check { config } => cli_io::check(&cli_io::load_config(config)?, &mut out),
        Command::Idata { config, output } => {
            cli_io::idata(&cli_io::load_config(config)?, &output)?;
            Ok(cli_io::EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match dispatch(cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
