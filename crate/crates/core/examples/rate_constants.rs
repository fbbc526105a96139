//! Numerically optimized rate constants for the default column weights.

use multistage_gt::rates::{default_rate_report, e1_bound, entropy, exponent_a, ExponentKind};

fn main() -> multistage_gt::Result<()> {
    let r = default_rate_report()?;
    println!("c3             {:.6}", r.c3);
    println!("s=2 maximum    {:.9} at omega = {:.9}", r.value_s2, r.omega_star_s2);
    println!("E1 exponent    {:.5} log2 t", r.e1_bound);

    let p = 1.0 - 0.5f64.sqrt();
    println!("\nh(p) - p at the s=2 weight: {:.6}", entropy(p)? - p);

    let p3 = 0.206299474016;
    println!("\nA2(2, p, omega) for s=3 at p = {p3}:");
    for i in 0..8 {
        let omega = p3 + i as f64 * p3 / 4.0;
        let a2 = exponent_a(ExponentKind::A2, 2, Some(p3), omega, p3)?;
        println!("  omega={omega:.4}  A2={a2:.5}");
    }

    let (omega1, omega, value) = e1_bound(p3, 2.0 * r.c3)?;
    println!("\nE1 maximum {value:.5} at omega1={omega1:.4}, omega={omega:.4}");
    Ok(())
}
