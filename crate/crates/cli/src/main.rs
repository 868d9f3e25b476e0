use std::process::ExitCode;

use clap::Parser;
use voronoi_rsw_cli::{run, Cli};

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("voronoi-rsw: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
