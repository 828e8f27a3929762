use std::process::ExitCode;

use alexgeo::cli::{run, Cli, Verdict};
use clap::Parser;

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Verdict::Done) => ExitCode::SUCCESS,
        Ok(Verdict::Breach) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
