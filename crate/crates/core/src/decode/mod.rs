//! Adaptive decoders that run after the stage-1 matrix.
//!
//! Both decoders talk to the defectives only through a [`StageOracle`] and
//! record every stage, including stages that happen to need no tests, so
//! stage indices in a transcript always mean the same step of the
//! algorithm.

pub mod three;
pub mod two;

use crate::model::{
    CandidateHypergraph, DecodeResult, FailureReason, Hyperedge, OutcomeVector, PoolMatrix,
    Transcript,
};
use crate::oracle::{ProtocolError, StageOracle};

/// Which branch of a decoder produced the answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DecodePath {
    /// Stage 1 left a single candidate.
    Unique,
    /// Two defectives: group split at stage 2, bit mask at stage 3.
    PairGroups,
    /// Three defectives, the hidden edge lies in the second edge set.
    EdgeGroups,
    /// Three defectives, the hidden edge contains a frequent pair.
    Siblings,
}

/// Intermediate quantities of one decode, for tests and campaigns.
#[derive(Clone, Debug, Default)]
pub struct Diagnostics {
    pub hypergraph: Option<CandidateHypergraph>,
    pub path: Option<DecodePath>,
    /// Indices of stage-2 groups that answered (positive, negative).
    pub stage2_hits: Vec<usize>,
    /// Positive vertex-group tests at stage 3 of the sibling branch.
    pub stage3_positives: Option<usize>,
    pub structure: Option<three::Structure>,
}

pub(crate) struct Session<'a, O: StageOracle + ?Sized> {
    oracle: &'a mut O,
    pub transcript: Transcript,
}

impl<'a, O: StageOracle + ?Sized> Session<'a, O> {
    pub fn new(oracle: &'a mut O) -> Self {
        Self {
            oracle,
            transcript: Transcript::new(),
        }
    }

    pub fn stage(&mut self, tests: Vec<Vec<usize>>) -> Result<Vec<bool>, ProtocolError> {
        let outcomes = self.oracle.run_stage(&tests)?;
        self.transcript.push(tests, outcomes.clone());
        Ok(outcomes)
    }

    /// Stage 1: every row of the matrix is a test.
    pub fn rows(&mut self, matrix: &PoolMatrix) -> Result<OutcomeVector, ProtocolError> {
        let outcomes = self.stage(matrix.rows())?;
        let mut bits = fixedbitset::FixedBitSet::with_capacity(matrix.n());
        for (i, o) in outcomes.into_iter().enumerate() {
            bits.set(i, o);
        }
        Ok(OutcomeVector::new(bits))
    }

    pub fn fail(self, reason: FailureReason) -> DecodeResult {
        DecodeResult::failure(reason, self.transcript)
    }

    /// Accepts `edge` only if it explains every recorded outcome.
    pub fn finish(self, edge: &Hyperedge) -> DecodeResult {
        if self.transcript.consistent_with(edge.vertices()) {
            DecodeResult::recovered(edge.vertices().to_vec(), self.transcript)
        } else {
            DecodeResult::failure(FailureReason::AmbiguousCandidates, self.transcript)
        }
    }
}

/// The pair of stage-2 tests for one group of edges: the union of its
/// vertices and the complement of that union.
pub(crate) fn split_tests(t: usize, edges: &[&Hyperedge]) -> [Vec<usize>; 2] {
    let mut inside = vec![false; t];
    for e in edges {
        for &v in e.vertices() {
            inside[v] = true;
        }
    }
    let union = (0..t).filter(|&v| inside[v]).collect();
    let rest = (0..t).filter(|&v| !inside[v]).collect();
    [union, rest]
}

/// Groups whose tests answered (positive, negative).
pub(crate) fn hit_groups(outcomes: &[bool]) -> Vec<usize> {
    outcomes
        .chunks(2)
        .enumerate()
        .filter(|(_, pair)| pair[0] && !pair[1])
        .map(|(g, _)| g)
        .collect()
}
