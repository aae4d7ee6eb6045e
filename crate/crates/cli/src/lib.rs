//! Command-line layer: argument parsing, configuration, data export and
//! plot scripts on top of the `spinchain_echo` library.

pub mod args;
pub mod commands;
pub mod config;
pub mod export;
pub mod plot;

pub use args::Cli;
pub use commands::{oracle_report, oracle_report_with, run, Outcome};
