//! Noiseless OR oracle with a stage firewall.
//!
//! Tests are submitted into the open stage and their outcomes stay sealed
//! until the stage is committed. A decoder therefore cannot let one test of
//! a stage depend on another's result, and the number of commits is the
//! number of stages it used.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("outcome of test {test} read before stage {stage} was committed")]
    OutcomeBeforeCommit { stage: usize, test: usize },

    #[error("stage limit of {limit} exceeded")]
    StageLimit { limit: usize },

    #[error("unknown ticket for stage {stage}, test {test}")]
    UnknownTicket { stage: usize, test: usize },

    #[error("tested sample {index} outside 0..{t}")]
    SampleOutOfRange { index: usize, t: usize },
}

/// Handle to a submitted test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ticket {
    stage: usize,
    test: usize,
}

impl Ticket {
    pub fn stage(&self) -> usize {
        self.stage
    }
}

/// Anything that answers pooled tests stage by stage.
pub trait StageOracle {
    fn submit(&mut self, test: &[usize]) -> Result<Ticket, ProtocolError>;

    /// Seals the open stage and releases its outcomes.
    fn commit(&mut self) -> Result<(), ProtocolError>;

    fn outcome(&self, ticket: Ticket) -> Result<bool, ProtocolError>;

    /// Submits a whole stage, commits it and returns the outcomes in order.
    fn run_stage(&mut self, tests: &[Vec<usize>]) -> Result<Vec<bool>, ProtocolError> {
        let tickets = tests
            .iter()
            .map(|t| self.submit(t))
            .collect::<Result<Vec<_>, _>>()?;
        self.commit()?;
        tickets.into_iter().map(|t| self.outcome(t)).collect()
    }
}

/// `query(T) = [T ∩ hidden != ∅]` with query counting.
#[derive(Clone, Debug)]
pub struct NoiselessOracle {
    t: usize,
    hidden: Vec<usize>,
    stage_limit: Option<usize>,
    committed: Vec<Vec<bool>>,
    open: Vec<bool>,
    queries: usize,
}

impl NoiselessOracle {
    pub fn new(t: usize, hidden: &[usize]) -> Result<Self, ProtocolError> {
        if let Some(&index) = hidden.iter().find(|&&v| v >= t) {
            return Err(ProtocolError::SampleOutOfRange { index, t });
        }
        let mut hidden = hidden.to_vec();
        hidden.sort_unstable();
        hidden.dedup();
        Ok(Self {
            t,
            hidden,
            stage_limit: None,
            committed: Vec::new(),
            open: Vec::new(),
            queries: 0,
        })
    }

    /// Rejects any commit beyond `limit` stages.
    pub fn with_stage_limit(mut self, limit: usize) -> Self {
        self.stage_limit = Some(limit);
        self
    }

    pub fn hidden(&self) -> &[usize] {
        &self.hidden
    }

    /// Total tests answered so far, sealed or not.
    pub fn queries(&self) -> usize {
        self.queries
    }

    pub fn stages_committed(&self) -> usize {
        self.committed.len()
    }

    fn answer(&self, test: &[usize]) -> bool {
        test.iter().any(|v| self.hidden.binary_search(v).is_ok())
    }
}

impl StageOracle for NoiselessOracle {
    fn submit(&mut self, test: &[usize]) -> Result<Ticket, ProtocolError> {
        if let Some(&index) = test.iter().find(|&&v| v >= self.t) {
            return Err(ProtocolError::SampleOutOfRange { index, t: self.t });
        }
        if let Some(limit) = self.stage_limit {
            if self.committed.len() >= limit {
                return Err(ProtocolError::StageLimit { limit });
            }
        }
        let ticket = Ticket {
            stage: self.committed.len(),
            test: self.open.len(),
        };
        let answer = self.answer(test);
        self.open.push(answer);
        self.queries += 1;
        Ok(ticket)
    }

    fn commit(&mut self) -> Result<(), ProtocolError> {
        if let Some(limit) = self.stage_limit {
            if self.committed.len() >= limit {
                return Err(ProtocolError::StageLimit { limit });
            }
        }
        self.committed.push(std::mem::take(&mut self.open));
        Ok(())
    }

    fn outcome(&self, ticket: Ticket) -> Result<bool, ProtocolError> {
        let Ticket { stage, test } = ticket;
        if stage == self.committed.len() && test < self.open.len() {
            return Err(ProtocolError::OutcomeBeforeCommit { stage, test });
        }
        self.committed
            .get(stage)
            .and_then(|s| s.get(test))
            .copied()
            .ok_or(ProtocolError::UnknownTicket { stage, test })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn or_semantics() {
        // 1-based hidden {1, 2}
        let mut o = NoiselessOracle::new(10, &[0, 1]).unwrap();
        let out = o.run_stage(&[vec![2], vec![1, 8]]).unwrap();
        assert_eq!(out, vec![false, true]);
        assert_eq!(o.queries(), 2);
        assert_eq!(o.stages_committed(), 1);
    }

    #[test]
    fn mid_stage_read_is_rejected() {
        let mut o = NoiselessOracle::new(10, &[0, 1]).unwrap();
        let ticket = o.submit(&[0]).unwrap();
        assert_eq!(
            o.outcome(ticket),
            Err(ProtocolError::OutcomeBeforeCommit { stage: 0, test: 0 })
        );
        o.commit().unwrap();
        assert_eq!(o.outcome(ticket), Ok(true));
    }

    #[test]
    fn stage_limit_enforced() {
        let mut o = NoiselessOracle::new(4, &[0, 1]).unwrap().with_stage_limit(1);
        o.run_stage(&[vec![0]]).unwrap();
        assert_eq!(o.submit(&[1]), Err(ProtocolError::StageLimit { limit: 1 }));
        assert_eq!(o.commit(), Err(ProtocolError::StageLimit { limit: 1 }));
    }

    #[test]
    fn out_of_range_samples() {
        assert!(NoiselessOracle::new(4, &[4]).is_err());
        let mut o = NoiselessOracle::new(4, &[0]).unwrap();
        assert!(o.submit(&[9]).is_err());
    }
}
