//! Three-stage search for two defectives.
//!
//! A short design leaves several candidate pairs after stage 1, so the
//! pair-group and bit-mask stages actually run.

use multistage_gt::decode::two::decode_s2_with_diagnostics;
use multistage_gt::{compute_params, generate_matrix, NoiselessOracle, Overrides};

fn main() -> multistage_gt::Result<()> {
    let overrides = Overrides {
        n: Some(10),
        sparsity: Some(3),
        ..Overrides::default()
    };
    let matrix = generate_matrix(&compute_params(64, 2, &overrides)?)?;

    for hidden in [[4, 9], [11, 50], [0, 63]] {
        let mut oracle = NoiselessOracle::new(64, &hidden)?.with_stage_limit(3);
        let (result, diag) = decode_s2_with_diagnostics(&matrix, &mut oracle)?;
        let h = diag.hypergraph.expect("stage 1 always runs");
        println!(
            "hidden {:?}: {} candidate pairs, path {:?}, tests per stage {:?}, recovered {:?}",
            hidden,
            h.len(),
            diag.path,
            result.transcript.tests_per_stage(),
            result.defectives()
        );
    }
    Ok(())
}
