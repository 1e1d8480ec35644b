//! Batch front-end for the damped-evolution laboratory.
//!
//! Subcommands:
//!   simulate <config>              run a simulation, write reports
//!   rates <csv> <targets.json>     refit decay rates from an emitted CSV
//!   check-identities <config>      run and verify the exact identities
//!   check-inequalities <params>    verify an interpolation/convolution bound
//!   sweep <config-glob>            run many configs concurrently
//!
//! Exit codes: 0 success, 2 validation error, 3 blow-up detected,
//! 4 numerical failure.

mod config;
mod runner;

use std::process::ExitCode;

use config::{ConfigError, InequalityParams, RunConfig};
use runner::{RunError, RunStatus};

const EXIT_OK: u8 = 0;
const EXIT_VALIDATION: u8 = 2;
const EXIT_BLOWUP: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

fn fail(code: u8, message: impl std::fmt::Display) -> u8 {
    eprintln!("error: {message}");
    code
}

fn run_error_code(e: &RunError) -> u8 {
    match e {
        RunError::Validation(_) => EXIT_VALIDATION,
        RunError::Numerical(_) | RunError::Io(_) => EXIT_NUMERICAL,
    }
}

fn load_config(path: &str) -> Result<RunConfig, u8> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail(EXIT_VALIDATION, format!("cannot read '{path}': {e}")))?;
    RunConfig::from_text(&text).map_err(|e: ConfigError| fail(EXIT_VALIDATION, e))
}

fn simulate(path: &str) -> u8 {
    let config = match load_config(path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let artifacts = match runner::run_simulation(&config) {
        Ok(a) => a,
        Err(e) => return fail(run_error_code(&e), e),
    };
    if let Err(e) = runner::write_artifacts(&config, &artifacts, &config.output_dir) {
        return fail(run_error_code(&e), e);
    }
    runner::print_summary(&artifacts, &mut std::io::stdout());
    match artifacts.status {
        RunStatus::Completed => {
            let failed_rate = artifacts.rate_reports.iter().any(|r| !r.pass);
            let failed_identity = artifacts.identities.iter().any(|r| !r.pass);
            if failed_rate || failed_identity {
                return fail(EXIT_NUMERICAL, "one or more enabled checks failed");
            }
            EXIT_OK
        }
        RunStatus::BlowUp { .. } => EXIT_BLOWUP,
    }
}

fn rates(csv: &str, targets: &str) -> u8 {
    match runner::refit_rates(std::path::Path::new(csv), std::path::Path::new(targets)) {
        Ok(json) => {
            print!("{json}");
            EXIT_OK
        }
        Err(e) => fail(run_error_code(&e), e),
    }
}

fn check_identities(path: &str) -> u8 {
    let config = match load_config(path) {
        Ok(mut c) => {
            c.check_identities = true;
            c.check_rates = false;
            c
        }
        Err(code) => return code,
    };
    let artifacts = match runner::run_simulation(&config) {
        Ok(a) => a,
        Err(e) => return fail(run_error_code(&e), e),
    };
    if let Err(e) = std::fs::create_dir_all(&config.output_dir) {
        return fail(EXIT_NUMERICAL, e);
    }
    let json = match serde_json::to_string_pretty(&artifacts.identities) {
        Ok(mut s) => {
            s.push('\n');
            s
        }
        Err(e) => return fail(EXIT_NUMERICAL, e),
    };
    if let Err(e) = std::fs::write(config.output_dir.join("identities.json"), json) {
        return fail(EXIT_NUMERICAL, e);
    }
    runner::print_summary(&artifacts, &mut std::io::stdout());
    if let RunStatus::BlowUp { .. } = artifacts.status {
        return EXIT_BLOWUP;
    }
    if artifacts.identities.iter().any(|r| !r.pass) {
        return fail(EXIT_NUMERICAL, "identity check failed");
    }
    EXIT_OK
}

fn check_inequalities(path: &str) -> u8 {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_VALIDATION, format!("cannot read '{path}': {e}")),
    };
    let params = match InequalityParams::from_text(&text) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_VALIDATION, e),
    };
    match runner::write_inequalities(&params) {
        Ok(()) => {
            println!("inequality report written to {}", params.output_dir().display());
            EXIT_OK
        }
        Err(e) => fail(run_error_code(&e), e),
    }
}

fn sweep(pattern: &str) -> u8 {
    let paths: Vec<_> = match glob::glob(pattern) {
        Ok(iter) => iter.filter_map(|p| p.ok()).collect(),
        Err(e) => return fail(EXIT_VALIDATION, format!("bad glob '{pattern}': {e}")),
    };
    if paths.is_empty() {
        return fail(EXIT_VALIDATION, format!("no configs match '{pattern}'"));
    }
    let handles: Vec<_> = paths
        .into_iter()
        .map(|path| {
            std::thread::spawn(move || {
                let code = simulate(path.to_string_lossy().as_ref());
                (path, code)
            })
        })
        .collect();
    let mut worst = EXIT_OK;
    for handle in handles {
        match handle.join() {
            Ok((path, code)) => {
                println!("{}: exit {code}", path.display());
                worst = worst.max(code);
            }
            Err(_) => worst = worst.max(EXIT_NUMERICAL),
        }
    }
    worst
}

fn usage() -> u8 {
    eprintln!(
        "usage: dampwave <command> ...\n\
         \n\
         commands:\n\
         \x20 simulate <config>              run one simulation\n\
         \x20 rates <csv> <targets.json>     refit rates from an emitted CSV (stdout)\n\
         \x20 check-identities <config>      run and verify exact identities\n\
         \x20 check-inequalities <params>    verify one inequality, write report\n\
         \x20 sweep <config-glob>            run matching configs concurrently"
    );
    EXIT_VALIDATION
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let code = match args.get(1).map(String::as_str) {
        Some("simulate") if args.len() == 3 => simulate(&args[2]),
        Some("rates") if args.len() == 4 => rates(&args[2], &args[3]),
        Some("check-identities") if args.len() == 3 => check_identities(&args[2]),
        Some("check-inequalities") if args.len() == 3 => check_inequalities(&args[2]),
        Some("sweep") if args.len() == 3 => sweep(&args[2]),
        _ => usage(),
    };
    ExitCode::from(code)
}
