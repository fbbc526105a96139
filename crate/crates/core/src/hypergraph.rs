//! Candidate enumeration and the combinatorial subroutines used by every
//! stage: configuration search, matchings, greedy conflict partitioning and
//! bit-mask identification.

use std::collections::{BTreeMap, BTreeSet};

use fixedbitset::Block;
use rayon::prelude::*;

use crate::error::Result;
use crate::model::{CandidateHypergraph, FailureReason, Hyperedge, OutcomeVector, PoolMatrix};

/// Above this many covered columns the enumeration fans out over the first
/// index.
const PARALLEL_COVERED: usize = 48;

/// `H(X, s, y)`: every `s`-set of columns whose union is exactly `y`.
///
/// Only columns covered by `y` can take part, so those are filtered first
/// (ascending); `s`-subsets of them are enumerated lexicographically and
/// kept when the union has the weight of `y`.
pub fn candidates(matrix: &PoolMatrix, s: usize, y: &OutcomeVector) -> CandidateHypergraph {
    let covered = covered_columns(matrix, y);
    let blocks: Vec<&[Block]> = covered.iter().map(|&j| matrix.column(j).as_slice()).collect();
    let target = y.weight();
    let width = y.bits().as_slice().len();

    let enumerate_from = |first: usize| -> Vec<Hyperedge> {
        let mut out = Vec::new();
        let mut acc = vec![0 as Block; width];
        acc.copy_from_slice(blocks[first]);
        let mut chosen = vec![first];
        extend(&blocks, &covered, s, target, &mut chosen, &acc, &mut out);
        out
    };

    let edges: Vec<Hyperedge> = if s == 0 || covered.len() < s {
        Vec::new()
    } else if covered.len() > PARALLEL_COVERED {
        (0..=covered.len() - s)
            .into_par_iter()
            .flat_map_iter(enumerate_from)
            .collect()
    } else {
        (0..=covered.len() - s).flat_map(enumerate_from).collect()
    };

    CandidateHypergraph::from_edges(s, y.clone(), edges).expect("enumerated edges have size s")
}

/// Columns `z` with `z | y == y`, ascending.
pub fn covered_columns(matrix: &PoolMatrix, y: &OutcomeVector) -> Vec<usize> {
    (0..matrix.t())
        .filter(|&j| matrix.column(j).is_subset(y.bits()))
        .collect()
}

fn extend(
    blocks: &[&[Block]],
    covered: &[usize],
    s: usize,
    target: usize,
    chosen: &mut Vec<usize>,
    acc: &[Block],
    out: &mut Vec<Hyperedge>,
) {
    if chosen.len() == s {
        let weight: u32 = acc.iter().map(|b| b.count_ones()).sum();
        if weight as usize == target {
            out.push(Hyperedge::from_sorted(chosen.iter().map(|&i| covered[i]).collect()));
        }
        return;
    }
    let last = *chosen.last().unwrap();
    let remaining = s - chosen.len();
    let mut next = acc.to_vec();
    for i in last + 1..=blocks.len() - remaining {
        for (dst, (a, b)) in next.iter_mut().zip(acc.iter().zip(blocks[i])) {
            *dst = a | b;
        }
        chosen.push(i);
        extend(blocks, covered, s, target, chosen, &next, out);
        chosen.pop();
    }
}

/// `L` hyperedges whose pairwise intersections all equal the same
/// `k`-set `core`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    pub core: Vec<usize>,
    pub edges: Vec<Hyperedge>,
}

impl Configuration {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Checks the defining property directly.
    pub fn is_valid(&self, k: usize) -> bool {
        self.core.len() == k
            && self.edges.iter().all(|e| self.core.iter().all(|&v| e.contains(v)))
            && self.edges.iter().enumerate().all(|(i, a)| {
                self.edges[i + 1..].iter().all(|b| a.intersection(b) == self.core)
            })
    }
}

/// Exact search for an `(s, k)` configuration of size `size` (at least 1).
///
/// Cores are tried in lexicographic order and, per core, edges are chosen
/// depth-first in edge order, so the result is the lexicographically first
/// configuration. Exponential in the worst case; meant for audits.
pub fn find_configuration(h: &CandidateHypergraph, k: usize, size: usize) -> Option<Configuration> {
    let size = size.max(1);
    if k >= h.s() || h.is_empty() {
        return None;
    }
    let cores: BTreeSet<Vec<usize>> = if k == 0 {
        BTreeSet::from([Vec::new()])
    } else {
        h.edges()
            .iter()
            .flat_map(|e| subsets(e.vertices(), k))
            .collect()
    };
    for core in cores {
        let members: Vec<usize> = if let Some(&v) = core.first() {
            h.incident(v)
                .iter()
                .copied()
                .filter(|&i| core.iter().all(|&u| h.edge(i).contains(u)))
                .collect()
        } else {
            (0..h.len()).collect()
        };
        if members.len() < size {
            continue;
        }
        let residuals: Vec<Vec<usize>> = members.iter().map(|&i| h.edge(i).without(&core)).collect();
        let mut picked = Vec::with_capacity(size);
        let mut used = BTreeSet::new();
        if pack(&residuals, 0, size, &mut picked, &mut used) {
            return Some(Configuration {
                edges: picked.iter().map(|&r| h.edge(members[r]).clone()).collect(),
                core,
            });
        }
    }
    None
}

fn pack(
    residuals: &[Vec<usize>],
    from: usize,
    size: usize,
    picked: &mut Vec<usize>,
    used: &mut BTreeSet<usize>,
) -> bool {
    if picked.len() == size {
        return true;
    }
    if residuals.len() - from < size - picked.len() {
        return false;
    }
    for i in from..residuals.len() {
        if residuals.len() - i < size - picked.len() {
            return false;
        }
        let r = &residuals[i];
        if r.iter().any(|v| used.contains(v)) {
            continue;
        }
        used.extend(r.iter().copied());
        picked.push(i);
        if pack(residuals, i + 1, size, picked, used) {
            return true;
        }
        picked.pop();
        for v in r {
            used.remove(v);
        }
    }
    false
}

/// All `k`-subsets of a sorted slice, lexicographic.
pub(crate) fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn go(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            go(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Greedy inclusion-maximal matching, scanning edges in index order.
/// Returns edge indices.
pub fn maximal_matching(h: &CandidateHypergraph) -> Vec<usize> {
    greedy_disjoint(h.edges().iter().map(Hyperedge::vertices))
}

/// Greedy pairwise-disjoint selection over arbitrary vertex sets.
pub(crate) fn greedy_disjoint<'a>(sets: impl Iterator<Item = &'a [usize]>) -> Vec<usize> {
    let mut used = BTreeSet::new();
    let mut picked = Vec::new();
    for (i, set) in sets.enumerate() {
        if set.iter().all(|v| !used.contains(v)) {
            used.extend(set.iter().copied());
            picked.push(i);
        }
    }
    picked
}

/// Directed constraint graph over items `0..len`; an arc in either
/// direction forbids sharing a group.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConflictGraph {
    len: usize,
    arcs: BTreeSet<(usize, usize)>,
}

impl ConflictGraph {
    pub fn new(len: usize) -> Self {
        Self {
            len,
            arcs: BTreeSet::new(),
        }
    }

    /// Adds `(from, to)`; self-arcs and duplicates are ignored. Returns
    /// whether the arc was new.
    pub fn add_arc(&mut self, from: usize, to: usize) -> bool {
        assert!(from < self.len && to < self.len, "arc endpoint out of range");
        from != to && self.arcs.insert((from, to))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.arcs.iter().copied()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn has_arc(&self, from: usize, to: usize) -> bool {
        self.arcs.contains(&(from, to))
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.len];
        for &(u, _) in &self.arcs {
            deg[u] += 1;
        }
        deg
    }

    /// Undirected neighbour lists, ascending and deduplicated.
    pub fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.len];
        for &(u, v) in &self.arcs {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Largest number of arcs (in plus out) at one item.
    pub fn max_total_degree(&self) -> usize {
        let mut deg = vec![0; self.len];
        for &(u, v) in &self.arcs {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg.into_iter().max().unwrap_or(0)
    }
}

/// First-fit colouring in item order. Each group lists item indices in
/// ascending order.
pub fn greedy_partition(graph: &ConflictGraph) -> Vec<Vec<usize>> {
    let adj = graph.neighbours();
    let mut colour: Vec<Option<usize>> = vec![None; graph.len()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for item in 0..graph.len() {
        let taken: BTreeSet<usize> = adj[item].iter().filter_map(|&n| colour[n]).collect();
        let c = (0..).find(|c| !taken.contains(c)).unwrap();
        colour[item] = Some(c);
        if c == groups.len() {
            groups.push(Vec::new());
        }
        groups[c].push(item);
    }
    groups
}

/// Group index of every item, given a partition.
pub fn group_of(groups: &[Vec<usize>], len: usize) -> Vec<usize> {
    let mut out = vec![usize::MAX; len];
    for (g, members) in groups.iter().enumerate() {
        for &m in members {
            out[m] = g;
        }
    }
    out
}

/// Non-adaptive binary search among `m` items, exactly one of which is
/// hot: test `b` pools every item whose index has bit `b` set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitmaskPlan {
    items: usize,
    tests: Vec<Vec<usize>>,
}

impl BitmaskPlan {
    pub fn tests(&self) -> &[Vec<usize>] {
        &self.tests
    }

    pub fn item_count(&self) -> usize {
        self.items
    }

    /// Reads the outcomes as a little-endian index.
    pub fn decode(&self, outcomes: &[bool]) -> std::result::Result<usize, FailureReason> {
        if outcomes.len() != self.tests.len() {
            return Err(FailureReason::AmbiguousCandidates);
        }
        let index = outcomes
            .iter()
            .enumerate()
            .filter(|(_, &o)| o)
            .fold(0usize, |acc, (b, _)| acc | (1 << b));
        if index < self.items {
            Ok(index)
        } else {
            Err(FailureReason::AmbiguousCandidates)
        }
    }
}

/// `ceil(log2 m)` for `m >= 1`.
pub fn index_bits(m: usize) -> usize {
    if m <= 1 {
        0
    } else {
        (usize::BITS - (m - 1).leading_zeros()) as usize
    }
}

/// Plans `ceil(log2 m)` tests identifying the single hot item.
pub fn bitmask_identify(items: &[Vec<usize>]) -> Result<BitmaskPlan> {
    if items.is_empty() {
        return Err(crate::error::Error::InvalidParams(
            "bit-mask identification needs at least one item".into(),
        ));
    }
    let tests = (0..index_bits(items.len()))
        .map(|b| {
            let set: BTreeSet<usize> = items
                .iter()
                .enumerate()
                .filter(|(i, _)| i >> b & 1 == 1)
                .flat_map(|(_, item)| item.iter().copied())
                .collect();
            set.into_iter().collect()
        })
        .collect();
    Ok(BitmaskPlan {
        items: items.len(),
        tests,
    })
}

/// Counts, for every vertex pair, how many edges contain it.
pub(crate) fn pair_counts(h: &CandidateHypergraph) -> BTreeMap<(usize, usize), usize> {
    let mut counts = BTreeMap::new();
    for e in h.edges() {
        let v = e.vertices();
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                *counts.entry((v[i], v[j])).or_insert(0) += 1;
            }
        }
    }
    counts
}
