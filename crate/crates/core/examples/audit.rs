//! Audits default designs for the 2-good and 3-good properties over every
//! reachable stage-1 outcome.

use multistage_gt::{audit_2good, audit_3good, compute_params, generate_matrix, OutcomeScope, Overrides};

fn main() -> multistage_gt::Result<()> {
    let two = generate_matrix(&compute_params(64, 2, &Overrides::default())?)?;
    let report = audit_2good(&two, &OutcomeScope::Reachable);
    println!("2-good, t=64: {} outcomes, passed={}", report.checked_outcomes, report.passed());

    let three = generate_matrix(&compute_params(64, 3, &Overrides::default())?)?;
    let report = audit_3good(&three, &OutcomeScope::Reachable);
    println!("3-good, t=64: {} outcomes, passed={}", report.checked_outcomes, report.passed());

    // A design far too short for its size fails, and the report says where.
    let short = Overrides {
        n: Some(12),
        ..Overrides::default()
    };
    let weak = generate_matrix(&compute_params(64, 2, &short)?)?;
    let report = audit_2good(&weak, &OutcomeScope::Reachable);
    println!("2-good, t=64, N=12: passed={}", report.passed());
    for (property, count) in report.count_by_property() {
        println!("  {property:?}: {count}");
    }
    if let Some(v) = report.violations.first() {
        println!("  first witness: {:?}", v.witness);
    }
    Ok(())
}
