use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

mod commands;
mod config;

use commands::{RunOutput, Status};
use config::{Cli, CliError, RunConfig};

fn write_artifacts(cfg: &RunConfig, out: &RunOutput) -> Result<(), CliError> {
    let Some(dir) = &cfg.output_path else { return Ok(()) };
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
    for (name, body) in &out.files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|source| CliError::Io { path, source })?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap would use 2, which is reserved for validation failures.
            return ExitCode::from(if e.use_stderr() { Status::ConfigError.code() as u8 } else { 0 });
        }
    };
    let result = RunConfig::from_cli(cli).and_then(|cfg| {
        let out = commands::run(&cfg)?;
        write_artifacts(&cfg, &out)?;
        Ok(out)
    });
    match result {
        Ok(out) => {
            print!("{}", out.stdout);
            let _ = std::io::stdout().flush();
            for d in &out.diagnostics {
                eprintln!("splitting-lab: {d}");
            }
            ExitCode::from(out.status.code() as u8)
        }
        Err(e) => {
            eprintln!("splitting-lab: {e}");
            ExitCode::from(Status::ConfigError.code() as u8)
        }
    }
}
