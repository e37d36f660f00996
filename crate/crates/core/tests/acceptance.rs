//! Runs every acceptance criterion at its pinned tolerance and prints one
//! pass/fail line per criterion. Built without the libtest harness so the
//! lines are never captured.

use std::process::ExitCode;

use colored_ldp::validation::{run_suites, ValidationConfig};

fn main() -> ExitCode {
    let cfg = ValidationConfig::default();
    let reports = match run_suites(&[], &cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("acceptance: suites did not run: {e}");
            return ExitCode::FAILURE;
        }
    };
    for r in &reports {
        println!("{}", r.line());
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("acceptance: {} of {} criteria passed", reports.len() - failed, reports.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
