//! `glyphpress`: render text to pages, measure compression, search rendering
//! configs, generate training data and audit policy-optimization math.

mod args;
mod commands;
mod error;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::CliError;
use crate::run::RunManifest;

fn dispatch(cli: &Cli, manifest: &mut RunManifest) -> Result<Option<PathBuf>, CliError> {
    match &cli.command {
        Command::Config(a) => commands::config::run(a, manifest),
        Command::Render(a) => commands::render::render(a, manifest),
        Command::Stats(a) => commands::render::stats(a, manifest),
        Command::Search(a) => commands::search::run(a, manifest),
        Command::Datagen(a) => commands::datagen::run(a, manifest, cli.jobs),
        Command::Rlcheck(a) => commands::rlcheck::run(a, manifest),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut manifest = RunManifest::new(std::env::args().collect());
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        pool = pool.num_threads(n as usize);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    };
    let result = pool.install(|| dispatch(&cli, &mut manifest));
    match result {
        Ok(default_path) => {
            let json = manifest.to_json();
            match cli.run_manifest.as_ref().or(default_path.as_ref()) {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, format!("{json}\n")) {
                        eprintln!("error: {}: {e}", path.display());
                        return ExitCode::from(1);
                    }
                }
                None => eprintln!("{json}"),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
