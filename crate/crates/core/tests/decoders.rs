use fixedbitset::FixedBitSet;
use multistage_gt::audit::reachable_sets;
use multistage_gt::campaign::{
    baseline_binary_splitting, run_baseline, run_campaign, CampaignConfig, CampaignMode,
};
use multistage_gt::decode::three::decode_s3_with_diagnostics;
use multistage_gt::decode::two::decode_s2_with_diagnostics;
use multistage_gt::{
    build_structure, compute_params, decode_s2, decode_s3, generate_matrix, DecodePath,
    DesignParams, FailureReason, Hyperedge, NoiselessOracle, Overrides, PoolMatrix,
};

fn unit_columns(n: usize, rows: &[usize]) -> Vec<FixedBitSet> {
    rows.iter()
        .map(|&r| {
            let mut b = FixedBitSet::with_capacity(n);
            b.insert(r);
            b
        })
        .collect()
}

fn identity(t: usize, s: usize) -> PoolMatrix {
    let params = DesignParams::with_weight(t, s, t, 1, 1).unwrap();
    PoolMatrix::from_columns(params, unit_columns(t, &(0..t).collect::<Vec<_>>())).unwrap()
}

#[test]
fn identity_short_circuits_two() {
    let m = identity(8, 2);
    // 1-based {3, 7}
    let mut o = NoiselessOracle::new(8, &[2, 6]).unwrap();
    let (r, diag) = decode_s2_with_diagnostics(&m, &mut o).unwrap();
    assert_eq!(r.defectives(), Some(&[2, 6][..]));
    assert_eq!(r.transcript.tests_per_stage(), vec![8]);
    assert_eq!(diag.path, Some(DecodePath::Unique));
}

#[test]
fn identity_short_circuits_three() {
    let m = identity(12, 3);
    // 1-based {2, 5, 9}
    let mut o = NoiselessOracle::new(12, &[1, 4, 8]).unwrap();
    let r = decode_s3(&m, &mut o).unwrap();
    assert_eq!(r.defectives(), Some(&[1, 4, 8][..]));
    assert_eq!(r.transcript.stage_count(), 1);
}

#[test]
fn duplicated_columns_two_defectives() {
    // columns 1 and 2 (1-based) identical; hidden {1, 3}
    let params = DesignParams::with_weight(4, 2, 4, 2, 1).unwrap();
    let m = PoolMatrix::from_column_strings(params, &["1100", "1100", "0011", "1010"]).unwrap();
    let mut o = NoiselessOracle::new(4, &[0, 2]).unwrap().with_stage_limit(3);
    let (r, diag) = decode_s2_with_diagnostics(&m, &mut o).unwrap();
    let h = diag.hypergraph.unwrap();
    assert_eq!(h.len(), 2);
    assert_eq!(diag.stage2_hits, vec![0]);
    assert_eq!(r.defectives(), Some(&[0, 2][..]));
    // two groups of one edge: four split tests, then an empty bit mask
    assert_eq!(r.transcript.tests_per_stage(), vec![4, 4, 0]);

    let mut o = NoiselessOracle::new(4, &[1, 2]).unwrap();
    let r = decode_s2(&m, &mut o).unwrap();
    assert_eq!(r.defectives(), Some(&[1, 2][..]));
}

#[test]
fn hidden_triple_in_second_edge_group() {
    // columns 1 and 2 (1-based) identical unit vectors
    let params = DesignParams::with_weight(6, 3, 5, 1, 1).unwrap();
    let m = PoolMatrix::from_columns(params, unit_columns(5, &[0, 0, 1, 2, 3, 4])).unwrap();
    let mut o = NoiselessOracle::new(6, &[1, 2, 3]).unwrap().with_stage_limit(5);
    let (r, diag) = decode_s3_with_diagnostics(&m, &mut o).unwrap();
    let st = diag.structure.unwrap();
    assert!(st.e1.is_empty());
    assert_eq!(st.e2_groups.len(), 2);
    assert_eq!(diag.stage2_hits, vec![1]);
    assert_eq!(diag.path, Some(DecodePath::EdgeGroups));
    assert_eq!(r.defectives(), Some(&[1, 2, 3][..]));
    assert_eq!(r.transcript.stage_count(), 3);
}

#[test]
fn sibling_branch_uses_five_stages() {
    // three identical unit columns plus two more; the pair {4, 5} (1-based)
    // lies in three candidate edges
    let params = DesignParams::with_weight(5, 3, 3, 1, 1).unwrap();
    let m = PoolMatrix::from_columns(params, unit_columns(3, &[0, 0, 0, 1, 2])).unwrap();
    for hidden in [[0, 3, 4], [1, 3, 4], [2, 3, 4]] {
        let mut o = NoiselessOracle::new(5, &hidden).unwrap().with_stage_limit(5);
        let (r, diag) = decode_s3_with_diagnostics(&m, &mut o).unwrap();
        assert_eq!(r.defectives(), Some(&hidden[..]), "{hidden:?}");
        assert_eq!(diag.path, Some(DecodePath::Siblings));
        assert_eq!(diag.stage3_positives, Some(3));
        let st = diag.structure.unwrap();
        assert_eq!(st.v_groups, vec![vec![0, 1, 2], vec![3], vec![4]]);
        // empty stage 2, three group tests, two bit-mask tests, then W plus U
        assert_eq!(r.transcript.tests_per_stage(), vec![3, 0, 3, 2, 3]);
        assert_eq!(o.queries(), r.transcript.total_tests());
    }
}

#[test]
fn single_edge_structure() {
    let m = identity(6, 3);
    let y = multistage_gt::outcome(&m, &[0, 1, 2]).unwrap();
    let h = multistage_gt::candidates(&m, 3, &y);
    let st = build_structure(&h, 3);
    assert!(st.siblings.is_empty() && st.e1.is_empty());
    assert_eq!(st.e2, vec![0]);
    assert_eq!(st.e2_groups, vec![vec![0]]);
}

#[test]
fn wrong_decoder_for_params() {
    let m = identity(8, 2);
    let mut o = NoiselessOracle::new(8, &[0, 1, 2]).unwrap();
    let r = decode_s3(&m, &mut o).unwrap();
    assert_eq!(r.failure_reason(), Some(FailureReason::InvalidParams));
}

/// Small `N` and `L1 = 2` make the candidate hypergraphs rich enough that
/// every stage of both decoders is exercised.
fn desk_matrix(s: usize, n: usize, sparsity: usize, seed: u64) -> PoolMatrix {
    let overrides = Overrides {
        n: Some(n),
        sparsity: Some(sparsity),
        p: None,
    };
    let params = compute_params(64, s, &overrides).unwrap().with_seed(seed);
    generate_matrix(&params).unwrap()
}

#[test]
fn two_defective_invariants_exhaustive() {
    let m = desk_matrix(2, 10, 3, 0);
    let mut used_stage3 = false;
    for hidden in reachable_sets(64, 2) {
        let mut o = NoiselessOracle::new(64, &hidden).unwrap().with_stage_limit(3);
        let (r, diag) = decode_s2_with_diagnostics(&m, &mut o).unwrap();
        assert_eq!(r.defectives(), Some(&hidden[..]));
        assert!(r.transcript.consistent_with(&hidden));
        assert_eq!(o.queries(), r.transcript.total_tests());
        let h = diag.hypergraph.unwrap();
        if diag.path == Some(DecodePath::PairGroups) {
            // exactly one group answers (1, 0), and it holds the hidden pair
            assert_eq!(diag.stage2_hits.len(), 1);
            let groups = multistage_gt::partition_edges_s2(&h);
            let target = h.position(&Hyperedge::new(hidden.clone()).unwrap()).unwrap();
            assert!(groups[diag.stage2_hits[0]].contains(&target));
            let per_stage = r.transcript.tests_per_stage();
            assert_eq!(per_stage[1], 2 * groups.len());
            let size = groups[diag.stage2_hits[0]].len();
            assert_eq!(per_stage[2], multistage_gt::hypergraph::index_bits(size));
            used_stage3 |= per_stage[2] > 0;
        }
    }
    assert!(used_stage3);
}

#[test]
fn three_defective_invariants_exhaustive() {
    // seed 1 passes the structural bounds at N = 20, L1 = 2
    let m = desk_matrix(3, 20, 2, 1);
    let mut paths = std::collections::BTreeSet::new();
    for hidden in reachable_sets(64, 3) {
        let mut o = NoiselessOracle::new(64, &hidden).unwrap().with_stage_limit(5);
        let (r, diag) = decode_s3_with_diagnostics(&m, &mut o).unwrap();
        assert_eq!(r.defectives(), Some(&hidden[..]), "{hidden:?}");
        assert_eq!(o.queries(), r.transcript.total_tests());
        let h = diag.hypergraph.unwrap();
        let target = h.position(&Hyperedge::new(hidden.clone()).unwrap()).unwrap();
        paths.insert(diag.path.unwrap());
        let Some(st) = diag.structure else { continue };
        let per_stage = r.transcript.tests_per_stage();
        assert_eq!(per_stage[1], 2 * st.e2_groups.len());
        let in_group = st.e2_groups.iter().position(|g| g.contains(&target));
        // case 1 iff the hidden edge is in E2, and then its group answers
        match in_group {
            Some(g) => {
                assert_eq!(diag.stage2_hits, vec![g]);
                assert_eq!(r.transcript.stage_count(), 3);
                assert_eq!(per_stage[2], multistage_gt::hypergraph::index_bits(st.e2_groups[g].len()));
            }
            None => {
                assert!(st.e1.contains(&target));
                assert!(diag.stage2_hits.is_empty());
                assert_eq!(diag.stage3_positives, Some(3));
                assert_eq!(per_stage[2], st.v_groups.len());
                assert_eq!(r.transcript.stage_count(), 5);
            }
        }
    }
    assert!(paths.contains(&DecodePath::EdgeGroups));
    assert!(paths.contains(&DecodePath::Siblings));
}

#[test]
fn three_defective_partitions_are_separated() {
    let m = desk_matrix(3, 20, 2, 1);
    for hidden in reachable_sets(64, 3).step_by(97) {
        let y = multistage_gt::outcome(&m, &hidden).unwrap();
        let h = multistage_gt::candidates(&m, 3, &y);
        let st = build_structure(&h, 6);
        for &i in &st.e1 {
            let v = st.additional[&i];
            let rest = h.edge(i).without(&[v]);
            assert!(st.siblings.contains(&(rest[0], rest[1])));
        }
        for g in &st.e2_groups {
            for &a in g {
                for &b in g {
                    if a == b {
                        continue;
                    }
                    let (ea, eb) = (h.edge(a), h.edge(b));
                    assert!(!ea.intersects(eb));
                    for &c in &st.e2 {
                        let ec = h.edge(c);
                        assert!(!(ec.intersects(ea) && ec.intersects(eb)));
                    }
                    for &(x, y) in &st.siblings {
                        assert!(!(ea.intersects_set(&[x, y]) && eb.intersects_set(&[x, y])));
                    }
                    for &e in &st.e1 {
                        let extra = st.additional[&e];
                        assert!(!(ea.contains(extra) && h.edge(e).intersects(eb)));
                    }
                }
            }
        }
        for g in &st.v_groups {
            for &a in g {
                for &b in g {
                    assert!(!st.arcs.contains(&(a, b)));
                }
            }
        }
    }
}

#[test]
fn campaigns_are_deterministic() {
    let config = CampaignConfig {
        overrides: Overrides {
            n: Some(20),
            sparsity: Some(2),
            p: None,
        },
        ..CampaignConfig::default()
    };
    let mode = CampaignMode::Random { trials: 3000 };
    let a = run_campaign(mode, 64, 3, 5, &config).unwrap();
    let b = run_campaign(mode, 64, 3, 5, &config).unwrap();
    assert_eq!(a.without_timing(), b.without_timing());
    assert_eq!(a.failures, 0);
    assert_eq!(a.runs, 3000);
    assert!(a.max_stages <= 5);
}

#[test]
fn baseline_bounds() {
    let exhaustive = run_baseline(CampaignMode::Exhaustive, 64, 2, 0, u128::MAX).unwrap();
    assert_eq!(exhaustive.failures, 0);
    assert!(exhaustive.max_tests <= 12);
    let random = run_baseline(CampaignMode::Random { trials: 1000 }, 1024, 3, 0, 0).unwrap();
    assert_eq!(random.failures, 0);
    assert!(random.max_tests <= 30);
}

#[test]
fn baseline_uses_one_test_per_stage() {
    let mut o = NoiselessOracle::new(100, &[3, 50, 99]).unwrap();
    let r = baseline_binary_splitting(100, 3, &mut o).unwrap();
    assert_eq!(r.defectives(), Some(&[3, 50, 99][..]));
    assert!(r.transcript.tests_per_stage().iter().all(|&n| n == 1));
    assert_eq!(o.stages_committed(), r.transcript.stage_count());
}
