//! Builds default stage-1 designs and prints their parameters, then writes
//! a small matrix in the text file format.
//!
//! ```sh
//! cargo run --example design
//! ```

use multistage_gt::{compute_params, generate_matrix, io, Overrides};

fn main() -> multistage_gt::Result<()> {
    println!("{:>8} {:>2} {:>5} {:>4} {:>3}", "t", "s", "N", "k", "L1");
    for s in [2, 3] {
        for bits in [6, 10, 16, 20] {
            let p = compute_params(1 << bits, s, &Overrides::default())?;
            println!("{:>8} {:>2} {:>5} {:>4} {:>3}", p.t(), s, p.n(), p.k(), p.sparsity());
        }
    }

    let small = Overrides {
        n: Some(8),
        ..Overrides::default()
    };
    let matrix = generate_matrix(&compute_params(12, 2, &small)?.with_seed(7))?;
    println!("\n{}", io::matrix_to_string(&matrix));
    Ok(())
}
