//! Command-line front end for the solver library. Parsing failures exit
//! with code 2, failures while doing the work exit with code 1.

mod args;
mod commands;

use clap::Parser;

use args::{Cli, Command};
use commands::CliError;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // clap's own exit: 0 for --help/--version, 2 for bad usage.
        Err(e) => e.exit(),
    };
    let outcome = match &cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Solve(a) => commands::solve_cmd(a),
        Command::Bound(a) => commands::bound(a),
        Command::Compare(a) => commands::compare(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Noise(a) => commands::noise(a),
        Command::Plot(a) => commands::plot(a),
    };
    match outcome {
        Ok(()) => {}
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
    }
}
