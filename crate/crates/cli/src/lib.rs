//! Command-line surface over the fracpois library: special-function
//! evaluation, density tabulation, process sampling, marginal pmfs and the
//! Monte Carlo experiments, all emitting CSV/JSON for external plotting.
//!
//! Exit codes: 0 success (and experiment verdict pass), 1 experiment verdict
//! fail, 2 usage error, 3 numerical error. All randomness is controlled by
//! `--seed`; identical argv produce byte-identical outputs for any
//! `--workers` count.

mod commands;
mod config;

use clap::error::ErrorKind;
use clap::Parser;

pub use commands::Cli;

/// Runs the CLI on the given argv (including the program name) and returns
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let args: Vec<String> = argv.into_iter().map(Into::into).collect();
    let args = match config::apply_config_layer(args) {
        Ok(args) => args,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version through the error path with exit 0.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
