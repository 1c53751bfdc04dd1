//! rfest: recovery-factor estimation from reservoir descriptions.
//!
//! Batch commands over CSV datasets: generate synthetic scenarios, fit
//! interval-producing models, predict with confidence intervals, evaluate by
//! cross-validation, run cluster diagnostics and fit production curves.
//! Every run is fully determined by its config; outputs embed the config and
//! the software version. Exit codes: 0 success, 1 runtime/data error, 2
//! usage error.

mod commands;
mod config;
mod svg;

use clap::Parser;

fn main() {
    let cli = config::Cli::parse();
    match commands::run(cli) {
        Ok(()) => {}
        Err(err) => {
            if let Some(usage) = err.downcast_ref::<config::UsageError>() {
                eprintln!("usage error: {usage}");
                std::process::exit(2);
            }
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}
