use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use mbs_slocc_cli::{run, Cli, CliError, RunConfig};

fn emit(cfg: &RunConfig, output: &str) -> Result<(), CliError> {
    match &cfg.out_path {
        Some(path) => std::fs::write(path, output).map_err(|e| CliError::io(path, e)),
        None => std::io::stdout().write_all(output.as_bytes()).map_err(|e| CliError::io("<stdout>".as_ref(), e)),
    }
}

fn fail(err: &CliError) -> ExitCode {
    eprintln!("{}", err.to_json());
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cfg = RunConfig::from(Cli::parse());
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    if let Err(e) = emit(&cfg, &outcome.output) {
        return fail(&e);
    }
    match &outcome.failure {
        Some(e) => fail(e),
        None => ExitCode::SUCCESS,
    }
}
