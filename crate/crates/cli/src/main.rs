mod args;
mod charge;
mod commands;
mod error;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use fermi_stability::QuadratureConfig;

use args::Cli;
use error::CliError;

const THREADS_VAR: &str = "FERMI_STABILITY_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_VAR} must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure {n} threads: {e}")))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    let g = &cli.global;
    let cfg = QuadratureConfig::new(g.rel_tol, g.abs_tol, g.max_subdivisions, QuadratureConfig::default().base_order)
        .map_err(|e| CliError::Domain(e.to_string()))?;
    let doc = commands::run(&cli.command, &cfg)?;
    let text = doc.render(g.format.unwrap_or(doc.default_format));
    match &g.output {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
