//! Three-stage decoder for two defectives.

use crate::decode::{hit_groups, split_tests, DecodePath, Diagnostics, Session};
use crate::hypergraph::{bitmask_identify, candidates, greedy_partition, ConflictGraph};
use crate::model::{CandidateHypergraph, DecodeResult, FailureReason, PoolMatrix};
use crate::oracle::{ProtocolError, StageOracle};

/// Splits the edges of a 2-uniform candidate graph into groups in which no
/// two edges intersect and no edge touches two members.
///
/// Two edges conflict exactly when some edge (possibly one of them) touches
/// both, so every set of edges touching a common edge forms a clique of the
/// conflict graph. Groups hold edge indices.
pub fn partition_edges_s2(h: &CandidateHypergraph) -> Vec<Vec<usize>> {
    let mut graph = ConflictGraph::new(h.len());
    for e in h.edges() {
        let touching = h.touching(e.vertices());
        for (i, &a) in touching.iter().enumerate() {
            for &b in &touching[i + 1..] {
                graph.add_arc(a, b);
            }
        }
    }
    greedy_partition(&graph)
}

/// Finds two defectives in at most three stages.
pub fn decode_s2<O: StageOracle + ?Sized>(
    matrix: &PoolMatrix,
    oracle: &mut O,
) -> Result<DecodeResult, ProtocolError> {
    decode_s2_with_diagnostics(matrix, oracle).map(|(r, _)| r)
}

pub fn decode_s2_with_diagnostics<O: StageOracle + ?Sized>(
    matrix: &PoolMatrix,
    oracle: &mut O,
) -> Result<(DecodeResult, Diagnostics), ProtocolError> {
    let mut diag = Diagnostics::default();
    let mut session = Session::new(oracle);
    if matrix.params().s() != 2 {
        return Ok((session.fail(FailureReason::InvalidParams), diag));
    }

    let y = session.rows(matrix)?;
    let h = candidates(matrix, 2, &y);
    if h.len() <= 1 {
        let result = match h.edges().first() {
            Some(edge) => {
                diag.path = Some(DecodePath::Unique);
                session.finish(edge)
            }
            None => session.fail(FailureReason::AmbiguousCandidates),
        };
        diag.hypergraph = Some(h);
        return Ok((result, diag));
    }

    let groups = partition_edges_s2(&h);
    let tests: Vec<Vec<usize>> = groups
        .iter()
        .flat_map(|g| {
            let edges: Vec<_> = g.iter().map(|&i| h.edge(i)).collect();
            split_tests(matrix.t(), &edges)
        })
        .collect();
    let outcomes = session.stage(tests)?;
    diag.stage2_hits = hit_groups(&outcomes);
    diag.path = Some(DecodePath::PairGroups);
    let group = match diag.stage2_hits.as_slice() {
        &[g] => &groups[g],
        _ => {
            diag.hypergraph = Some(h);
            return Ok((session.fail(FailureReason::AmbiguousCandidates), diag));
        }
    };

    let items: Vec<Vec<usize>> = group.iter().map(|&i| h.edge(i).vertices().to_vec()).collect();
    let plan = bitmask_identify(&items).expect("groups are non-empty");
    let outcomes = session.stage(plan.tests().to_vec())?;
    let result = match plan.decode(&outcomes) {
        Ok(i) => session.finish(h.edge(group[i])),
        Err(reason) => session.fail(reason),
    };
    diag.hypergraph = Some(h);
    Ok((result, diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{compute_params, generate_matrix};
    use crate::model::{DesignParams, OutcomeVector, Overrides};
    use crate::oracle::NoiselessOracle;

    #[test]
    fn partition_separates_touching_edges() {
        // path 0-1-2-3-4 plus a far edge 7-8
        let h = CandidateHypergraph::from_vertex_lists(
            2,
            OutcomeVector::zeros(1),
            &[&[0, 1], &[1, 2], &[2, 3], &[3, 4], &[7, 8]],
        )
        .unwrap();
        let groups = partition_edges_s2(&h);
        // 0-1 and 2-3 are both touched by 1-2; 0-1 and 3-4 are not.
        assert_eq!(groups, vec![vec![0, 3, 4], vec![1], vec![2]]);
    }

    #[test]
    fn decodes_every_pair_at_small_t() {
        let params = compute_params(32, 2, &Overrides::default()).unwrap().with_seed(3);
        let m = generate_matrix(&params).unwrap();
        for a in 0..32 {
            for b in a + 1..32 {
                let mut o = NoiselessOracle::new(32, &[a, b]).unwrap().with_stage_limit(3);
                let r = decode_s2(&m, &mut o).unwrap();
                assert_eq!(r.defectives(), Some(&[a, b][..]), "pair {a},{b}");
            }
        }
    }

    #[test]
    fn wrong_defective_count_is_invalid() {
        let params = DesignParams::with_weight(8, 3, 6, 2, 1).unwrap();
        let m = generate_matrix(&params).unwrap();
        let mut o = NoiselessOracle::new(8, &[0, 1]).unwrap();
        let r = decode_s2(&m, &mut o).unwrap();
        assert_eq!(r.failure_reason(), Some(FailureReason::InvalidParams));
        assert_eq!(r.transcript.stage_count(), 0);
    }
}
