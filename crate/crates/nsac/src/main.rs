//! Command-line driver.
//!
//! ```text
//! nsac run <config>
//! nsac mms <config> --case <elliptic|ac-dynamic|ac-bulk|stokes-slip>
//! nsac delta <config> --deltas <d1,d2,...>   (strictly decreasing, > 0)
//! nsac decay <config>
//! ```
//!
//! Exit codes: 0 success, 2 validation error, 3 solver failure.

use std::process::ExitCode;

use nsac::harness::{
    parse_config, run_delta_study, run_mms, run_simulation, DeltaError, MmsCase, RunConfig,
    RunError,
};

fn usage() -> String {
    [
        "usage:",
        "  nsac run <config>",
        "  nsac mms <config> --case <elliptic|ac-dynamic|ac-bulk|stokes-slip>",
        "  nsac delta <config> --deltas <d1,d2,...>",
        "  nsac decay <config>",
    ]
    .join("\n")
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_SOLVER: u8 = 3;

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn run_error_code(e: &RunError) -> u8 {
    match e {
        RunError::Grid(_) | RunError::Preset(_) => EXIT_VALIDATION,
        _ => EXIT_SOLVER,
    }
}

fn load_config(path: &str) -> Result<RunConfig, ExitCode> {
    let text =
        std::fs::read_to_string(path).map_err(|e| fail(EXIT_VALIDATION, format!("{path}: {e}")))?;
    parse_config(&text).map_err(|e| fail(EXIT_VALIDATION, format!("{path}: {e}")))
}

fn cmd_run(cfg: &RunConfig) -> ExitCode {
    match run_simulation(cfg) {
        Ok(report) => {
            for line in &report.summary {
                println!("{line}");
            }
            println!("diagnostics: {}", report.diagnostics_path.display());
            println!("final state: {}", report.final_state_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => fail(run_error_code(&e), e),
    }
}

fn cmd_mms(cfg: &RunConfig, case_arg: Option<&str>) -> ExitCode {
    let Some(case_name) = case_arg else {
        return fail(EXIT_VALIDATION, "mms requires --case <id>");
    };
    let Some(case) = MmsCase::parse(case_name) else {
        return fail(
            EXIT_VALIDATION,
            format!(
                "unknown case '{case_name}'; known cases: {}",
                MmsCase::ALL.join(", ")
            ),
        );
    };
    match run_mms(cfg, case) {
        Ok(table) => {
            print!("{table}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(run_error_code(&e), e),
    }
}

fn cmd_delta(cfg: &RunConfig, deltas_arg: Option<&str>) -> ExitCode {
    let Some(list) = deltas_arg else {
        return fail(EXIT_VALIDATION, "delta requires --deltas <d1,d2,...>");
    };
    let deltas: Result<Vec<f64>, _> = list.split(',').map(|t| t.trim().parse()).collect();
    let Ok(deltas) = deltas else {
        return fail(EXIT_VALIDATION, format!("malformed delta list '{list}'"));
    };
    match run_delta_study(cfg, &deltas) {
        Ok(study) => {
            print!("{study}");
            ExitCode::SUCCESS
        }
        Err(DeltaError::BadDeltas(d)) => fail(EXIT_VALIDATION, DeltaError::BadDeltas(d)),
        Err(DeltaError::Run(e)) => fail(run_error_code(&e), e),
    }
}

fn cmd_decay(cfg: &RunConfig) -> ExitCode {
    match run_simulation(cfg) {
        Ok(report) => {
            for line in &report.summary {
                println!("{line}");
            }
            // the small-data regime keeps 3 phi^2 - 1 >= 1 throughout
            if report.phi_sq_min < 2.0 / 3.0 || report.phi_sq_max > 4.0 {
                return fail(
                    EXIT_SOLVER,
                    format!(
                        "phase bound violated: phi^2 range [{:.6}, {:.6}] outside [2/3, 4]",
                        report.phi_sq_min, report.phi_sq_max
                    ),
                );
            }
            match report.decay {
                Some(fit) if fit.alpha > 0.0 => {
                    println!(
                        "decay: alpha = {:.6} (> 0), c0 = {:.6e}, r2 = {:.6}",
                        fit.alpha, fit.c0, fit.r2
                    );
                    ExitCode::SUCCESS
                }
                Some(fit) => fail(
                    EXIT_SOLVER,
                    format!("fitted decay rate not positive: alpha = {:.6e}", fit.alpha),
                ),
                None => fail(
                    EXIT_SOLVER,
                    "decay fit unavailable (too few samples past fit_t0 or nonpositive data)",
                ),
            }
        }
        Err(e) => fail(run_error_code(&e), e),
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() < 2 {
        return fail(EXIT_VALIDATION, usage());
    }
    let cmd = args[0].as_str();
    let cfg = match load_config(&args[1]) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let flag = |name: &str| -> Option<&str> {
        args.iter()
            .position(|a| a == name)
            .and_then(|i| args.get(i + 1))
            .map(|s| s.as_str())
    };
    match cmd {
        "run" => cmd_run(&cfg),
        "mms" => cmd_mms(&cfg, flag("--case")),
        "delta" => cmd_delta(&cfg, flag("--deltas")),
        "decay" => cmd_decay(&cfg),
        other => fail(
            EXIT_VALIDATION,
            format!("unknown command '{other}'\n{}", usage()),
        ),
    }
}
