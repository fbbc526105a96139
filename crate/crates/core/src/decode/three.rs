//! Five-stage decoder for three defectives.
//!
//! Edges of the candidate hypergraph containing a pair that occurs in at
//! least `L2` edges (a sibling pair) form `E1`; the rest form `E2`. If the
//! hidden edge lies in `E2`, grouping `E2` and splitting every group at
//! stage 2 isolates it and a bit mask finishes at stage 3. Otherwise the
//! hidden edge contains a sibling pair and stages 3 to 5 locate one of its
//! vertices and then the edge around it.

use std::collections::{BTreeMap, BTreeSet};

use crate::audit::{AuditReport, Property, Violation, Witness};
use crate::decode::{hit_groups, split_tests, DecodePath, Diagnostics, Session};
use crate::hypergraph::{
    bitmask_identify, candidates, greedy_disjoint, greedy_partition, pair_counts, ConflictGraph,
};
use crate::model::{CandidateHypergraph, DecodeResult, FailureReason, DesignParams, PoolMatrix};
use crate::oracle::{ProtocolError, StageOracle};

/// Derived graphs of a 3-uniform candidate hypergraph.
///
/// Edge sets hold indices into the hypergraph; vertex groups hold sample
/// indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Structure {
    /// Pairs `(a, b)`, `a < b`, contained in at least `L2` edges.
    pub siblings: BTreeSet<(usize, usize)>,
    pub e1: Vec<usize>,
    pub e2: Vec<usize>,
    /// Additional vertex of every `E1` edge: the lowest vertex whose
    /// removal leaves a sibling pair.
    pub additional: BTreeMap<usize, usize>,
    /// Vertex arcs: additional vertex to both others, and both ways between
    /// the remaining pair.
    pub arcs: BTreeSet<(usize, usize)>,
    /// Conflicts between `E2` edges, indexed by position in `e2`.
    pub e2_conflicts: ConflictGraph,
    pub e2_groups: Vec<Vec<usize>>,
    /// Vertices carrying at least one arc, ascending.
    pub arc_vertices: Vec<usize>,
    pub v_groups: Vec<Vec<usize>>,
}

impl Structure {
    /// Undirected sibling degree of every vertex that has one.
    pub fn sibling_degrees(&self) -> BTreeMap<usize, usize> {
        let mut deg = BTreeMap::new();
        for &(a, b) in &self.siblings {
            *deg.entry(a).or_insert(0) += 1;
            *deg.entry(b).or_insert(0) += 1;
        }
        deg
    }

    pub fn arc_out_degrees(&self) -> BTreeMap<usize, usize> {
        let mut deg = BTreeMap::new();
        for &(a, _) in &self.arcs {
            *deg.entry(a).or_insert(0) += 1;
        }
        deg
    }
}

/// Builds sibling pairs, the `E1`/`E2` split, both conflict graphs and both
/// greedy partitions. `sibling_threshold` is `L2`.
pub fn build_structure(h: &CandidateHypergraph, sibling_threshold: usize) -> Structure {
    let siblings: BTreeSet<(usize, usize)> = pair_counts(h)
        .into_iter()
        .filter(|&(_, c)| c >= sibling_threshold)
        .map(|(pair, _)| pair)
        .collect();
    let sib = |a: usize, b: usize| siblings.contains(&(a.min(b), a.max(b)));

    let mut e1 = Vec::new();
    let mut e2 = Vec::new();
    let mut additional = BTreeMap::new();
    let mut arcs = BTreeSet::new();
    for (i, e) in h.edges().iter().enumerate() {
        let v = e.vertices();
        let extra = (0..3).find(|&x| {
            let rest: Vec<usize> = (0..3).filter(|&y| y != x).map(|y| v[y]).collect();
            sib(rest[0], rest[1])
        });
        match extra {
            Some(x) => {
                let v1 = v[x];
                let rest: Vec<usize> = (0..3).filter(|&y| y != x).map(|y| v[y]).collect();
                arcs.extend([(v1, rest[0]), (v1, rest[1]), (rest[0], rest[1]), (rest[1], rest[0])]);
                additional.insert(i, v1);
                e1.push(i);
            }
            None => e2.push(i),
        }
    }

    let mut e2_at: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (pos, &i) in e2.iter().enumerate() {
        for &v in h.edge(i).vertices() {
            e2_at.entry(v).or_default().push(pos);
        }
    }
    let touching_e2 = |vertices: &[usize]| -> Vec<usize> {
        let mut out: Vec<usize> = vertices
            .iter()
            .filter_map(|v| e2_at.get(v))
            .flatten()
            .copied()
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    };

    let mut conflicts = ConflictGraph::new(e2.len());
    let clique = |g: &mut ConflictGraph, members: &[usize]| {
        for &a in members {
            for &b in members {
                g.add_arc(a, b);
            }
        }
    };
    for members in e2_at.values() {
        clique(&mut conflicts, members);
    }
    for &i in &e2 {
        clique(&mut conflicts, &touching_e2(h.edge(i).vertices()));
    }
    for &(a, b) in &siblings {
        clique(&mut conflicts, &touching_e2(&[a, b]));
    }
    for &i in &e1 {
        let from = e2_at.get(&additional[&i]).cloned().unwrap_or_default();
        let to = touching_e2(h.edge(i).vertices());
        for &a in &from {
            for &b in &to {
                conflicts.add_arc(a, b);
            }
        }
    }
    let e2_groups = greedy_partition(&conflicts)
        .into_iter()
        .map(|g| g.into_iter().map(|pos| e2[pos]).collect())
        .collect();

    let arc_vertices: Vec<usize> = arcs
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut vertex_conflicts = ConflictGraph::new(arc_vertices.len());
    let index = |v: usize| arc_vertices.binary_search(&v).unwrap();
    for &(a, b) in &arcs {
        vertex_conflicts.add_arc(index(a), index(b));
    }
    let v_groups = greedy_partition(&vertex_conflicts)
        .into_iter()
        .map(|g| g.into_iter().map(|i| arc_vertices[i]).collect())
        .collect();

    Structure {
        siblings,
        e1,
        e2,
        additional,
        arcs,
        e2_conflicts: conflicts,
        e2_groups,
        arc_vertices,
        v_groups,
    }
}

/// Checks the size bounds the decoder's test count relies on.
///
/// With `L1` the sparsity threshold and `L2 = 3 L1`: sibling degree below
/// `L1`; vertex degree within `E2` at most `2 L1 L2`; `|E2|` at most
/// `6 L1 L2` times a greedy disjoint packing of `E2`; arc out-degree below
/// `3 L1^2`; at most `96 L1^2 L2^2` edge groups and `6 L1^2` vertex groups.
pub fn structural_audit(
    h: &CandidateHypergraph,
    structure: &Structure,
    params: &DesignParams,
) -> AuditReport {
    let l1 = params.sparsity();
    let l2 = params.sibling_threshold();
    let mut violations = Vec::new();
    let mut push = |property, witness| {
        violations.push(Violation {
            property,
            outcome: Some(h.outcome().clone()),
            witness,
        })
    };

    if let Some((&vertex, &degree)) = structure.sibling_degrees().iter().max_by_key(|(_, &d)| d) {
        if degree >= l1 {
            push(
                Property::SiblingDegree,
                Witness::Degree {
                    vertex,
                    degree,
                    bound: l1 as f64,
                },
            );
        }
    }

    let mut e2_degree: BTreeMap<usize, usize> = BTreeMap::new();
    for &i in &structure.e2 {
        for &v in h.edge(i).vertices() {
            *e2_degree.entry(v).or_insert(0) += 1;
        }
    }
    if let Some((&vertex, &degree)) = e2_degree.iter().max_by_key(|(_, &d)| d) {
        if degree > 2 * l1 * l2 {
            push(
                Property::H2Degree,
                Witness::Degree {
                    vertex,
                    degree,
                    bound: (2 * l1 * l2) as f64,
                },
            );
        }
    }

    let packing = greedy_disjoint(structure.e2.iter().map(|&i| h.edge(i).vertices())).len();
    if structure.e2.len() > 6 * l1 * l2 * packing {
        push(
            Property::E2Size,
            Witness::Count {
                value: structure.e2.len(),
                bound: (6 * l1 * l2 * packing) as f64,
            },
        );
    }

    if let Some((&vertex, &degree)) = structure.arc_out_degrees().iter().max_by_key(|(_, &d)| d) {
        if degree >= 3 * l1 * l1 {
            push(
                Property::ArcOutDegree,
                Witness::Degree {
                    vertex,
                    degree,
                    bound: (3 * l1 * l1) as f64,
                },
            );
        }
    }

    let group_bound = 96 * l1 * l1 * l2 * l2;
    if structure.e2_groups.len() > group_bound {
        push(
            Property::E2Groups,
            Witness::Count {
                value: structure.e2_groups.len(),
                bound: group_bound as f64,
            },
        );
    }
    if structure.v_groups.len() > 6 * l1 * l1 {
        push(
            Property::VertexGroups,
            Witness::Count {
                value: structure.v_groups.len(),
                bound: (6 * l1 * l1) as f64,
            },
        );
    }

    AuditReport {
        checked_outcomes: 1,
        violations,
    }
}

/// Finds three defectives in at most five stages.
pub fn decode_s3<O: StageOracle + ?Sized>(
    matrix: &PoolMatrix,
    oracle: &mut O,
) -> Result<DecodeResult, ProtocolError> {
    decode_s3_with_diagnostics(matrix, oracle).map(|(r, _)| r)
}

pub fn decode_s3_with_diagnostics<O: StageOracle + ?Sized>(
    matrix: &PoolMatrix,
    oracle: &mut O,
) -> Result<(DecodeResult, Diagnostics), ProtocolError> {
    let mut diag = Diagnostics::default();
    let mut session = Session::new(oracle);
    let params = matrix.params();
    if params.s() != 3 {
        return Ok((session.fail(FailureReason::InvalidParams), diag));
    }

    let y = session.rows(matrix)?;
    let h = candidates(matrix, 3, &y);
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

    let st = build_structure(&h, params.sibling_threshold());
    let result = run_stages(matrix, &h, &st, session, &mut diag);
    diag.hypergraph = Some(h);
    diag.structure = Some(st);
    Ok((result?, diag))
}

fn run_stages<O: StageOracle + ?Sized>(
    matrix: &PoolMatrix,
    h: &CandidateHypergraph,
    st: &Structure,
    mut session: Session<'_, O>,
    diag: &mut Diagnostics,
) -> Result<DecodeResult, ProtocolError> {
    let t = matrix.t();
    let tests: Vec<Vec<usize>> = st
        .e2_groups
        .iter()
        .flat_map(|g| {
            let edges: Vec<_> = g.iter().map(|&i| h.edge(i)).collect();
            split_tests(t, &edges)
        })
        .collect();
    let outcomes = session.stage(tests)?;
    diag.stage2_hits = hit_groups(&outcomes);

    match *diag.stage2_hits.as_slice() {
        [g] => {
            diag.path = Some(DecodePath::EdgeGroups);
            let group = &st.e2_groups[g];
            let items: Vec<Vec<usize>> =
                group.iter().map(|&i| h.edge(i).vertices().to_vec()).collect();
            let plan = bitmask_identify(&items).expect("groups are non-empty");
            let outcomes = session.stage(plan.tests().to_vec())?;
            return Ok(match plan.decode(&outcomes) {
                Ok(i) => session.finish(h.edge(group[i])),
                Err(reason) => session.fail(reason),
            });
        }
        [] => {}
        _ => return Ok(session.fail(FailureReason::AmbiguousCandidates)),
    }

    diag.path = Some(DecodePath::Siblings);
    if st.e1.is_empty() {
        return Ok(session.fail(FailureReason::AmbiguousCandidates));
    }

    let outcomes = session.stage(st.v_groups.clone())?;
    let positive: Vec<usize> = (0..outcomes.len()).filter(|&i| outcomes[i]).collect();
    diag.stage3_positives = Some(positive.len());
    if positive.len() != 3 {
        return Ok(session.fail(FailureReason::StructuralViolation));
    }

    let first = &st.v_groups[positive[0]];
    let singletons: Vec<Vec<usize>> = first.iter().map(|&v| vec![v]).collect();
    let plan = bitmask_identify(&singletons).expect("vertex groups are non-empty");
    let outcomes = session.stage(plan.tests().to_vec())?;
    let v = match plan.decode(&outcomes) {
        Ok(i) => first[i],
        Err(reason) => return Ok(session.fail(reason)),
    };

    let mut w = BTreeSet::new();
    let mut v_prime = BTreeSet::new();
    let mut u = BTreeSet::new();
    for &i in &st.e1 {
        let extra = st.additional[&i];
        let e = h.edge(i);
        if extra == v {
            w.extend(e.vertices().iter().copied().filter(|&x| x != v));
        } else if e.contains(v) {
            v_prime.extend(e.vertices().iter().copied().filter(|&x| x != v && x != extra));
        }
        u.insert(extra);
    }
    let u: Vec<Vec<usize>> = u
        .into_iter()
        .filter(|x| *x != v && !v_prime.contains(x))
        .map(|x| vec![x])
        .collect();
    let mut tests: Vec<Vec<usize>> = w.iter().chain(&v_prime).map(|&x| vec![x]).collect();
    if !u.is_empty() {
        tests.extend(bitmask_identify(&u).expect("non-empty").tests().iter().cloned());
    }
    let outcomes = session.stage(tests.clone())?;

    let survivors: Vec<usize> = st
        .e1
        .iter()
        .copied()
        .filter(|&i| h.edge(i).contains(v))
        .filter(|&i| {
            let e = h.edge(i);
            tests
                .iter()
                .zip(&outcomes)
                .all(|(test, &o)| e.intersects_set(test) == o)
        })
        .collect();
    Ok(match survivors.as_slice() {
        &[i] => session.finish(h.edge(i)),
        _ => session.fail(FailureReason::AmbiguousCandidates),
    })
}
