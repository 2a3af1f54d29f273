//! Run every quadrature check over the parameter sweep and print a table.

use std::time::Instant;

use induced_coherence::oracle::{run_checks, OracleSettings};
use induced_coherence::physics::OpticalConfig;

fn main() -> induced_coherence::Result<()> {
    let start = Instant::now();
    let results = run_checks(&OpticalConfig::default(), "all", &OracleSettings::default(), None)?;
    println!("{:<18} {:<14} {:<30} {:>11} {:>9}  status", "check", "case", "quantity", "error", "tol");
    for r in &results {
        println!(
            "{:<18} {:<14} {:<30} {:>11.3e} {:>9.1e}  {}",
            r.check,
            r.case,
            r.quantity,
            r.error,
            r.tolerance,
            if r.passed { "pass" } else { r.failure.as_deref().unwrap_or("FAIL") }
        );
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("{} checks, {failed} failed, {:.2} s", results.len(), start.elapsed().as_secs_f64());
    Ok(())
}
