//! Acceptance suite: runs every named validation check sequentially at its
//! stated tolerance and prints one pass/fail line per check.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines
//! for passing runs too.

use noisy_cavities::validate::{run_checks, ValidateOptions};

#[test]
fn acceptance_criteria() {
    let results = run_checks(&ValidateOptions::default());
    assert_eq!(results.len(), 10, "expected the full suite");
    let mut failed = Vec::new();
    for result in &results {
        let status = if result.passed { "PASS" } else { "FAIL" };
        println!(
            "[{status}] {} ({:.2} s): {}",
            result.name, result.seconds, result.detail
        );
        if !result.passed {
            failed.push(result.name);
        }
    }
    println!(
        "{}/{} acceptance checks passed",
        results.len() - failed.len(),
        results.len()
    );
    assert!(failed.is_empty(), "failed acceptance checks: {failed:?}");
}
