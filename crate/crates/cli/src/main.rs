use std::process::ExitCode;

use clap::Parser;
use dynspec_cli::{commands, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match commands::run(&cli) {
        Ok(r) => {
            print!("{}", r.body);
            r.outcome.code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    ExitCode::from(code)
}
