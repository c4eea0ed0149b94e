use std::process::ExitCode;

use clap::Parser;
use costkit::commands::{run, write_output, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result =
        run(&cli, &mut std::io::stdin().lock()).and_then(|bytes| write_output(cli.output.as_deref(), &bytes));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("costkit: {e}");
            ExitCode::FAILURE
        }
    }
}
