//! Acceptance gate: runs every built-in acceptance criterion, prints one
//! pass/fail line per criterion, and fails if any criterion fails.

use effent::acceptance::run_all;

#[test]
fn acceptance_criteria() {
    let reports = run_all();
    let mut failed = Vec::new();
    for report in &reports {
        println!("{}", report.summary_line());
        if !report.passed {
            failed.push(report.id);
        }
    }
    assert!(
        failed.is_empty(),
        "acceptance criteria failed: {failed:?} (see lines above)"
    );
}
