use std::process::ExitCode;

use clap::Parser;
use radial_spectra_cli::output::OUTPUT_DIR_ENV;
use radial_spectra_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let env_out = std::env::var(OUTPUT_DIR_ENV).ok();
    match run(&cli.command, env_out.as_deref()) {
        Ok(outcome) => {
            for path in &outcome.written {
                println!("{}", path.display());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("rspec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
