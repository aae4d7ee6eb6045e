use std::process::ExitCode;

use clap::Parser;
use spinchain_echo_cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            for entry in &outcome.manifest.outputs {
                println!("{}", outcome.out_dir.join(&entry.path).display());
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("check failed; see report in {}", outcome.out_dir.display());
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
