//! Acceptance suite: one PASS/FAIL line per numbered criterion, plus the
//! command-line contract of the `belltensor` binary.

mod commands;
mod criteria;

use std::io::Write;
use std::time::Instant;

use criteria::Outcome;

#[test]
fn acceptance_criteria() {
    type Criterion = (&'static str, fn() -> Outcome);
    let suite: [Criterion; 11] = [
        ("tensor agreement", criteria::tensor_agreement),
        ("even-N exact value", criteria::even_construction),
        ("odd-N threshold", criteria::odd_threshold),
        ("two-qubit CHSH", criteria::gisin_case),
        ("MABK behavior", criteria::mabk_behavior),
        ("even-N non-MABK violation", criteria::even_non_mabk),
        ("oracle equivalence", criteria::oracle_equivalence),
        ("criterion necessity bridge", criteria::necessity_bridge),
        ("postselection", criteria::postselection),
        ("invariance suite", criteria::invariance_suite),
        ("separability support", criteria::separability),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in suite.iter().enumerate() {
        let start = Instant::now();
        let out = check();
        // straight to stderr so the lines survive output capture
        let _ = writeln!(
            std::io::stderr(),
            "criterion {:>2} {:<28} {}  ({:.1}s) {}",
            i + 1,
            name,
            if out.passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            out.detail
        );
        if !out.passed {
            failed.push(format!("{} ({name})", i + 1));
        }
    }
    assert!(failed.is_empty(), "failed criteria: {}", failed.join(", "));
}
