//! Acceptance criteria, one line each. Runs without the libtest harness so
//! every line is printed; exits 1 if any criterion fails.

use std::process::ExitCode;

use alexgeo::suite::run_all;

fn main() -> ExitCode {
    let quick = std::env::var_os("ALEXGEO_QUICK").is_some();
    let results = run_all(quick);
    for r in &results {
        println!("{}", r.line());
    }
    let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| format!("C{:02}", r.id)).collect();
    println!("acceptance: {}/{} passed", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
