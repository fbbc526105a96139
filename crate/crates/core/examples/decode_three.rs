//! Five-stage search for three defectives, showing the structure built from
//! the candidate hypergraph.

use multistage_gt::decode::three::decode_s3_with_diagnostics;
use multistage_gt::{compute_params, generate_matrix, DecodePath, NoiselessOracle, Overrides};

fn main() -> multistage_gt::Result<()> {
    // Sparse enough that sibling pairs appear; seed 1 passes the structural audit.
    let overrides = Overrides {
        n: Some(20),
        sparsity: Some(2),
        ..Overrides::default()
    };
    let matrix = generate_matrix(&compute_params(64, 3, &overrides)?.with_seed(1))?;

    let mut shown = [false; 3];
    for a in 0..64 {
        for b in a + 1..64 {
            for c in b + 1..64 {
                let mut oracle = NoiselessOracle::new(64, &[a, b, c])?.with_stage_limit(5);
                let (result, diag) = decode_s3_with_diagnostics(&matrix, &mut oracle)?;
                let slot = match diag.path {
                    Some(DecodePath::Unique) => 0,
                    Some(DecodePath::EdgeGroups) => 1,
                    Some(DecodePath::Siblings) => 2,
                    _ => continue,
                };
                if shown[slot] {
                    continue;
                }
                shown[slot] = true;
                println!("hidden {:?} -> {:?} via {:?}", [a, b, c], result.defectives(), diag.path);
                println!("  tests per stage {:?}", result.transcript.tests_per_stage());
                if let Some(st) = diag.structure {
                    println!(
                        "  |H|={} siblings={} E1={} E2={} edge groups={} vertex groups={}",
                        diag.hypergraph.map_or(0, |h| h.len()),
                        st.siblings.len(),
                        st.e1.len(),
                        st.e2.len(),
                        st.e2_groups.len(),
                        st.v_groups.len()
                    );
                }
                if shown.iter().all(|&x| x) {
                    return Ok(());
                }
            }
        }
    }
    Ok(())
}
