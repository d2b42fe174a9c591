mod args;
mod commands;
mod points;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::{Ctx, Outcome};

const EXIT_CONFIG: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;
const EXIT_IO: u8 = 4;

/// Maps the first recognisable cause to an exit code; anything unrecognised
/// is treated as bad input.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<magbend_core::Error>() {
            return match e {
                magbend_core::Error::Io { .. } => EXIT_IO,
                magbend_core::Error::Diverged(_) => EXIT_NOT_CONVERGED,
                _ => EXIT_CONFIG,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_IO;
        }
        if let Some(e) = cause.downcast_ref::<csv::Error>() {
            return if e.is_io_error() { EXIT_IO } else { EXIT_CONFIG };
        }
    }
    EXIT_CONFIG
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx {
        quiet: cli.quiet,
        json: cli.json,
        out_dir: cli.out_dir,
    };
    let result = match &cli.command {
        Command::Field(a) => commands::field(&ctx, a),
        Command::Solve(a) => commands::solve(&ctx, a),
        Command::Fit(a) => commands::fit(&ctx, a),
        Command::Sweep(a) => commands::sweep(&ctx, a),
        Command::Train(a) => commands::train(&ctx, a),
        Command::Predict(a) => commands::predict(&ctx, a),
        Command::Extract(a) => commands::extract(&ctx, a),
        Command::Render(a) => commands::render(&ctx, a),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::NotConverged(n)) => {
            eprintln!("error: {n} solve(s) did not converge");
            ExitCode::from(EXIT_NOT_CONVERGED)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
