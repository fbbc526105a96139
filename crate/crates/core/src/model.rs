//! Shared data model: design parameters, pool matrices, outcome vectors,
//! candidate hypergraphs, transcripts and decode results.
//!
//! Sample indices are 0-based everywhere in this crate. File formats and
//! user-facing reports shift them to 1-based.

use std::collections::BTreeMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};

/// Relative column weight `p`, stored as an exact rational so that the
/// column weight `floor(p * N)` is reproducible bit-for-bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RelativeWeight(Ratio<u64>);

impl RelativeWeight {
    /// `1 - sqrt(0.5)` to 12 decimal digits.
    pub const TWO_DEFECTIVES: (u64, u64) = (292_893_218_813, 1_000_000_000_000);
    /// `1 - 0.5^(1/3)` to 12 decimal digits.
    pub const THREE_DEFECTIVES: (u64, u64) = (206_299_474_016, 1_000_000_000_000);

    pub fn new(numer: u64, denom: u64) -> Result<Self> {
        if denom == 0 || numer == 0 || numer >= denom {
            return Err(Error::InvalidParams(format!(
                "relative weight {numer}/{denom} must lie strictly inside (0, 1)"
            )));
        }
        Ok(Self(Ratio::new(numer, denom)))
    }

    /// The default weight for `s` defectives. Panics on `s` outside {2, 3}.
    pub fn for_defectives(s: usize) -> Self {
        let (n, d) = match s {
            2 => Self::TWO_DEFECTIVES,
            3 => Self::THREE_DEFECTIVES,
            _ => panic!("no default relative weight for s = {s}"),
        };
        Self(Ratio::new(n, d))
    }

    /// `floor(p * n)`, computed in integers.
    pub fn column_weight(&self, n: usize) -> usize {
        let num = *self.0.numer() as u128 * n as u128;
        (num / *self.0.denom() as u128) as usize
    }

    pub fn numer(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u64 {
        *self.0.denom()
    }

    pub fn value(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }
}

impl fmt::Display for RelativeWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

/// Values the caller forced instead of the formulaic defaults.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub n: Option<usize>,
    pub p: Option<RelativeWeight>,
    pub sparsity: Option<usize>,
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        self.n.is_none() && self.p.is_none() && self.sparsity.is_none()
    }
}

/// Stage-1 design parameters.
///
/// `sparsity` is the degree threshold `d` for two defectives and the
/// configuration threshold `L1` for three; the sibling threshold `L2` is
/// `3 * L1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignParams {
    t: usize,
    s: usize,
    p: RelativeWeight,
    n: usize,
    k: usize,
    sparsity: usize,
    seed: u64,
    c3: Option<f64>,
    overrides: Overrides,
}

impl DesignParams {
    /// Builds a parameter record from explicit values. `k` is derived from
    /// `p` and `n`.
    pub fn new(
        t: usize,
        s: usize,
        p: RelativeWeight,
        n: usize,
        sparsity: usize,
        seed: u64,
    ) -> Result<Self> {
        let k = p.column_weight(n);
        let params = Self {
            t,
            s,
            p,
            n,
            k,
            sparsity,
            seed,
            c3: None,
            overrides: Overrides::default(),
        };
        params.validate()?;
        Ok(params)
    }

    /// Parameters for a hand-built matrix with a given column weight. `p` is
    /// recorded as `k / n`.
    pub fn with_weight(t: usize, s: usize, n: usize, k: usize, sparsity: usize) -> Result<Self> {
        if n == 0 || k == 0 || k >= n {
            return Err(Error::InvalidParams(format!(
                "column weight k = {k} must satisfy 0 < k < N = {n}"
            )));
        }
        let p = RelativeWeight::new(k as u64, n as u64)?;
        let mut params = Self::new(t, s, p, n, sparsity, 0)?;
        params.overrides.p = Some(p);
        Ok(params)
    }

    pub(crate) fn from_parts(
        t: usize,
        s: usize,
        p: RelativeWeight,
        n: usize,
        sparsity: usize,
        seed: u64,
        c3: Option<f64>,
        overrides: Overrides,
    ) -> Result<Self> {
        let mut params = Self::new(t, s, p, n, sparsity, seed)?;
        params.c3 = c3;
        params.overrides = overrides;
        Ok(params)
    }

    fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.s) {
            return Err(Error::InvalidParams(format!("s = {} not in {{2, 3}}", self.s)));
        }
        if self.t < self.s {
            return Err(Error::InvalidParams(format!("t = {} < s = {}", self.t, self.s)));
        }
        if self.k == 0 || self.k >= self.n {
            return Err(Error::InvalidParams(format!(
                "column weight k = {} must satisfy 0 < k < N = {}",
                self.k, self.n
            )));
        }
        if self.sparsity == 0 {
            return Err(Error::InvalidParams("sparsity threshold must be positive".into()));
        }
        Ok(())
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn p(&self) -> RelativeWeight {
        self.p
    }

    /// Number of stage-1 tests.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Column weight `floor(p * N)`.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sparsity(&self) -> usize {
        self.sparsity
    }

    /// `L2 = 3 * L1`; only meaningful for three defectives.
    pub fn sibling_threshold(&self) -> usize {
        3 * self.sparsity
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The cached rate constant used to size `N` for three defectives.
    pub fn c3(&self) -> Option<f64> {
        self.c3
    }

    pub fn overrides(&self) -> &Overrides {
        &self.overrides
    }

    /// Same parameters, different seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn with_defectives(&self, s: usize) -> Result<Self> {
        let params = Self { s, ..self.clone() };
        params.validate()?;
        Ok(params)
    }
}

/// The stage-1 design: `N` tests over `t` samples, stored column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PoolMatrix {
    params: DesignParams,
    columns: Vec<FixedBitSet>,
}

impl PoolMatrix {
    /// Validates dimensions and the constant column weight.
    pub fn from_columns(params: DesignParams, columns: Vec<FixedBitSet>) -> Result<Self> {
        if columns.len() != params.t() {
            return Err(Error::InvalidParams(format!(
                "expected {} columns, got {}",
                params.t(),
                columns.len()
            )));
        }
        for (j, col) in columns.iter().enumerate() {
            if col.len() != params.n() {
                return Err(Error::InvalidParams(format!(
                    "column {j} has length {}, expected N = {}",
                    col.len(),
                    params.n()
                )));
            }
            let weight = col.count_ones(..);
            if weight != params.k() {
                return Err(Error::InvalidParams(format!(
                    "column {j} has weight {weight}, expected k = {}",
                    params.k()
                )));
            }
        }
        Ok(Self { params, columns })
    }

    /// Builds a matrix from 0/1 column strings such as `"1100"`.
    pub fn from_column_strings(params: DesignParams, columns: &[&str]) -> Result<Self> {
        let cols = columns
            .iter()
            .map(|c| bits_from_str(c))
            .collect::<Result<Vec<_>>>()?;
        Self::from_columns(params, cols)
    }

    pub fn params(&self) -> &DesignParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n()
    }

    pub fn t(&self) -> usize {
        self.params.t()
    }

    pub fn column(&self, j: usize) -> &FixedBitSet {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[FixedBitSet] {
        &self.columns
    }

    /// Samples included in test `i`.
    pub fn row(&self, i: usize) -> Vec<usize> {
        (0..self.t()).filter(|&j| self.columns[j].contains(i)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        (0..self.n()).map(|i| self.row(i)).collect()
    }
}

pub(crate) fn bits_from_str(s: &str) -> Result<FixedBitSet> {
    let mut bits = FixedBitSet::with_capacity(s.len());
    for (i, c) in s.chars().enumerate() {
        match c {
            '1' => bits.insert(i),
            '0' => {}
            other => return Err(Error::Format(format!("unexpected character {other:?}"))),
        }
    }
    Ok(bits)
}

pub(crate) fn bits_to_string(bits: &FixedBitSet) -> String {
    (0..bits.len())
        .map(|i| if bits.contains(i) { '1' } else { '0' })
        .collect()
}

/// Pooled stage-1 results `r(X, S)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OutcomeVector {
    bits: FixedBitSet,
    weight: usize,
}

impl OutcomeVector {
    pub fn new(bits: FixedBitSet) -> Self {
        let weight = bits.count_ones(..);
        Self { bits, weight }
    }

    pub fn from_str_bits(s: &str) -> Result<Self> {
        Ok(Self::new(bits_from_str(s)?))
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(FixedBitSet::with_capacity(n))
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.bits
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.len() == 0
    }

    /// Bitwise `self <= other`.
    pub fn is_covered_by(&self, other: &OutcomeVector) -> bool {
        self.bits.is_subset(&other.bits)
    }
}

impl fmt::Display for OutcomeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&bits_to_string(&self.bits))
    }
}

/// A candidate defective set in canonical (sorted) form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Hyperedge(Vec<usize>);

impl Hyperedge {
    pub fn new(mut vertices: Vec<usize>) -> Result<Self> {
        vertices.sort_unstable();
        let len = vertices.len();
        vertices.dedup();
        if vertices.len() != len {
            return Err(Error::InvalidParams(format!(
                "hyperedge vertices must be distinct: {vertices:?}"
            )));
        }
        if vertices.is_empty() {
            return Err(Error::InvalidParams("empty hyperedge".into()));
        }
        Ok(Self(vertices))
    }

    pub(crate) fn from_sorted(vertices: Vec<usize>) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Self(vertices)
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn intersects(&self, other: &Hyperedge) -> bool {
        self.0.iter().any(|&v| other.contains(v))
    }

    pub fn intersects_set(&self, other: &[usize]) -> bool {
        other.iter().any(|&v| self.contains(v))
    }

    pub fn intersection(&self, other: &Hyperedge) -> Vec<usize> {
        self.0.iter().copied().filter(|&v| other.contains(v)).collect()
    }

    /// Vertices of `self` not in `core`.
    pub fn without(&self, core: &[usize]) -> Vec<usize> {
        self.0.iter().copied().filter(|v| !core.contains(v)).collect()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl fmt::Display for Hyperedge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one_based: Vec<String> = self.0.iter().map(|v| (v + 1).to_string()).collect();
        write!(f, "{{{}}}", one_based.join(","))
    }
}

/// `H(X, s, y)`: every `s`-set whose column union equals the outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateHypergraph {
    s: usize,
    outcome: OutcomeVector,
    edges: Vec<Hyperedge>,
    adjacency: BTreeMap<usize, Vec<usize>>,
}

impl CandidateHypergraph {
    /// Wraps an explicit edge list. Edges are sorted and deduplicated; the
    /// consistency of each edge with `outcome` is the caller's concern.
    pub fn from_edges(s: usize, outcome: OutcomeVector, mut edges: Vec<Hyperedge>) -> Result<Self> {
        if let Some(bad) = edges.iter().find(|e| e.len() != s) {
            return Err(Error::InvalidParams(format!(
                "edge {bad} does not have {s} vertices"
            )));
        }
        edges.sort();
        edges.dedup();
        let mut adjacency: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (idx, e) in edges.iter().enumerate() {
            for &v in e.vertices() {
                adjacency.entry(v).or_default().push(idx);
            }
        }
        Ok(Self {
            s,
            outcome,
            edges,
            adjacency,
        })
    }

    /// Convenience for tests and fixtures: edges given as vertex lists.
    pub fn from_vertex_lists(s: usize, outcome: OutcomeVector, lists: &[&[usize]]) -> Result<Self> {
        let edges = lists
            .iter()
            .map(|l| Hyperedge::new(l.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_edges(s, outcome, edges)
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn outcome(&self) -> &OutcomeVector {
        &self.outcome
    }

    pub fn edges(&self) -> &[Hyperedge] {
        &self.edges
    }

    pub fn edge(&self, idx: usize) -> &Hyperedge {
        &self.edges[idx]
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Indices of edges containing `v`.
    pub fn incident(&self, v: usize) -> &[usize] {
        self.adjacency.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incident(v).len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.values().map(Vec::len).max().unwrap_or(0)
    }

    /// Non-isolated vertices in ascending order.
    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.adjacency.keys().copied()
    }

    pub fn position(&self, edge: &Hyperedge) -> Option<usize> {
        self.edges.binary_search(edge).ok()
    }

    /// Edge indices sharing at least one vertex with `edge` (including
    /// `edge` itself when present), ascending.
    pub fn touching(&self, vertices: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = vertices
            .iter()
            .flat_map(|&v| self.incident(v).iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// One batch of simultaneously committed tests.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stage {
    pub tests: Vec<Vec<usize>>,
    pub outcomes: Vec<bool>,
}

/// Ordered record of every stage a decoder ran.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    stages: Vec<Stage>,
}

impl Transcript {
    pub const MAX_STAGES: usize = 5;

    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, tests: Vec<Vec<usize>>, outcomes: Vec<bool>) {
        assert_eq!(tests.len(), outcomes.len(), "one outcome per test");
        self.stages.push(Stage { tests, outcomes });
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    pub fn tests_per_stage(&self) -> Vec<usize> {
        self.stages.iter().map(|s| s.tests.len()).collect()
    }

    pub fn total_tests(&self) -> usize {
        self.stages.iter().map(|s| s.tests.len()).sum()
    }

    /// True if `hidden` would have produced every recorded outcome.
    pub fn consistent_with(&self, hidden: &[usize]) -> bool {
        self.stages.iter().all(|stage| {
            stage
                .tests
                .iter()
                .zip(&stage.outcomes)
                .all(|(test, &out)| test.iter().any(|v| hidden.contains(v)) == out)
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum FailureReason {
    AmbiguousCandidates,
    StructuralViolation,
    InvalidParams,
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self {
            FailureReason::AmbiguousCandidates => "ambiguous_candidates",
            FailureReason::StructuralViolation => "structural_violation",
            FailureReason::InvalidParams => "invalid_params",
        };
        f.write_str(tag)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecodeOutcome {
    /// The recovered defective set, sorted.
    Recovered(Vec<usize>),
    Failure(FailureReason),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeResult {
    pub outcome: DecodeOutcome,
    pub transcript: Transcript,
}

impl DecodeResult {
    pub fn recovered(mut set: Vec<usize>, transcript: Transcript) -> Self {
        set.sort_unstable();
        Self {
            outcome: DecodeOutcome::Recovered(set),
            transcript,
        }
    }

    pub fn failure(reason: FailureReason, transcript: Transcript) -> Self {
        Self {
            outcome: DecodeOutcome::Failure(reason),
            transcript,
        }
    }

    pub fn defectives(&self) -> Option<&[usize]> {
        match &self.outcome {
            DecodeOutcome::Recovered(set) => Some(set),
            DecodeOutcome::Failure(_) => None,
        }
    }

    pub fn failure_reason(&self) -> Option<FailureReason> {
        match self.outcome {
            DecodeOutcome::Failure(r) => Some(r),
            DecodeOutcome::Recovered(_) => None,
        }
    }
}
