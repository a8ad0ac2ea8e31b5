//! Acceptance criteria 1-10 plus the asymptotic property checks.

use std::process::ExitCode;

use mgc_core::verify::{all_passed, run_with, Level, VerifyConfig};

fn main() -> ExitCode {
    let cfg = VerifyConfig::new(Level::Full, 20240607);
    let results = run_with(&cfg, |r| println!("{r} ({:.1} s)", r.seconds));
    let failed: Vec<&str> = results
        .iter()
        .filter(|r| r.status == mgc_core::verify::Status::Fail)
        .map(|r| r.id.as_str())
        .collect();
    if all_passed(&results) {
        println!("acceptance: all {} checks passed", results.len());
        ExitCode::SUCCESS
    } else {
        println!(
            "acceptance: {} of {} checks failed: {}",
            failed.len(),
            results.len(),
            failed.join(", ")
        );
        ExitCode::FAILURE
    }
}
