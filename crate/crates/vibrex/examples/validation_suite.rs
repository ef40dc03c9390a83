//! Run the built-in invariant suite at the reference parameters: operator
//! identities, regime bounds, dark-state decoupling, amplitude bounds,
//! engine collapse at zero coupling, and cross-thread determinism.
//!
//! Takes a few minutes; most of it is the zero-coupling engine comparison
//! and the determinism replays.

use std::process::ExitCode;
use vibrex::harness::{validate, SeriesOptions};
use vibrex::params::ModelParams;

fn main() -> ExitCode {
    let report = validate(&ModelParams::reference(), &SeriesOptions::default());
    for c in &report.checks {
        println!(
            "{}  {}: {}",
            if c.passed { "pass" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    println!(
        "{} of {} checks passed",
        report.checks.len() - failed,
        report.checks.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
