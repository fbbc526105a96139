//! Verification campaigns: decode many hidden sets against one matrix and
//! aggregate what happened.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::audit::{audit_2good, audit_3good, reachable_sets, OutcomeScope};
use crate::decode::three::{decode_s3_with_diagnostics, structural_audit};
use crate::decode::two::decode_s2_with_diagnostics;
use crate::decode::Diagnostics;
use crate::design::{compute_params, generate_matrix, outcome};
use crate::error::{Error, Result};
use crate::model::{
    DecodeOutcome, DecodeResult, FailureReason, Hyperedge, Overrides, PoolMatrix, Transcript,
};
use crate::oracle::{NoiselessOracle, ProtocolError, StageOracle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CampaignMode {
    /// Every `s`-subset of `0..t`.
    Exhaustive,
    /// `trials` uniformly random `s`-subsets.
    Random { trials: usize },
}

/// What makes a matrix unacceptable before or during a campaign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AuditPolicy {
    Off,
    /// Three defectives: regenerate if any decode meets a structure that
    /// breaks a size bound or a stage precondition.
    Structure,
    /// Additionally check the 2-good or 3-good properties on the outcomes
    /// of every hidden set in the campaign before decoding.
    Goodness,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignConfig {
    pub overrides: Overrides,
    /// Largest number of hidden sets an exhaustive campaign may visit.
    pub budget: u128,
    /// Matrices tried before giving up (seeds `seed`, `seed + 1`, ...).
    pub retries: usize,
    pub audit: AuditPolicy,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            overrides: Overrides::default(),
            budget: 1_000_000,
            retries: 16,
            audit: AuditPolicy::Structure,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AuditSummary {
    /// Matrices generated, including the accepted one.
    pub attempts: usize,
    pub rejected_seeds: Vec<u64>,
    /// Violations seen on rejected matrices, by property.
    pub violations: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignReport {
    pub t: usize,
    pub s: usize,
    /// Seed of the matrix the campaign ran on.
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub runs: usize,
    pub failures: usize,
    pub failures_by_reason: BTreeMap<String, usize>,
    pub max_tests: usize,
    pub mean_tests: f64,
    pub stage_max: [usize; Transcript::MAX_STAGES],
    pub max_stages: usize,
    /// `max_tests / (s log2 t)`.
    pub ratio: f64,
    /// Runs whose hidden set was missing from the candidate hypergraph.
    pub completeness_violations: usize,
    /// Runs where oracle queries and transcript length disagreed.
    pub query_mismatches: usize,
    pub audit: AuditSummary,
    pub wall_clock_secs: f64,
}

impl CampaignReport {
    pub fn successes(&self) -> usize {
        self.runs - self.failures
    }

    /// The report with the timing zeroed, for comparing runs.
    pub fn without_timing(&self) -> Self {
        Self {
            wall_clock_secs: 0.0,
            ..self.clone()
        }
    }
}

/// Hidden sets visited by a campaign, each sorted.
pub fn hidden_sets(mode: CampaignMode, t: usize, s: usize, seed: u64, budget: u128) -> Result<Vec<Vec<usize>>> {
    if s == 0 || s > t {
        return Err(Error::InvalidParams(format!("cannot hide {s} of {t} samples")));
    }
    match mode {
        CampaignMode::Exhaustive => {
            let needed = binomial_u128(t, s);
            if needed > budget {
                return Err(Error::BudgetExceeded { needed, budget });
            }
            Ok(reachable_sets(t, s).collect())
        }
        CampaignMode::Random { trials } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..trials)
                .map(|_| {
                    let mut set = rand::seq::index::sample(&mut rng, t, s).into_vec();
                    set.sort_unstable();
                    set
                })
                .collect())
        }
    }
}

fn binomial_u128(n: usize, k: usize) -> u128 {
    let k = k.min(n - k) as u128;
    let n = n as u128;
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Decodes with the decoder matching the matrix's defective count.
pub fn decode<O: StageOracle + ?Sized>(
    matrix: &PoolMatrix,
    oracle: &mut O,
) -> std::result::Result<(DecodeResult, Diagnostics), ProtocolError> {
    if matrix.params().s() == 3 {
        decode_s3_with_diagnostics(matrix, oracle)
    } else {
        decode_s2_with_diagnostics(matrix, oracle)
    }
}

#[derive(Clone, Debug, Default)]
struct Tally {
    runs: usize,
    failures: BTreeMap<String, usize>,
    total_tests: usize,
    max_tests: usize,
    stage_max: [usize; Transcript::MAX_STAGES],
    max_stages: usize,
    completeness_violations: usize,
    query_mismatches: usize,
    structural: BTreeMap<String, usize>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.runs += other.runs;
        for (k, v) in other.failures {
            *self.failures.entry(k).or_insert(0) += v;
        }
        for (k, v) in other.structural {
            *self.structural.entry(k).or_insert(0) += v;
        }
        self.total_tests += other.total_tests;
        self.max_tests = self.max_tests.max(other.max_tests);
        for (a, b) in self.stage_max.iter_mut().zip(other.stage_max) {
            *a = (*a).max(b);
        }
        self.max_stages = self.max_stages.max(other.max_stages);
        self.completeness_violations += other.completeness_violations;
        self.query_mismatches += other.query_mismatches;
        self
    }

    fn fail(&mut self, reason: &str) {
        *self.failures.entry(reason.to_string()).or_insert(0) += 1;
    }
}

fn run_one(matrix: &PoolMatrix, hidden: &[usize], check_structure: bool) -> Tally {
    let mut tally = Tally {
        runs: 1,
        ..Tally::default()
    };
    let mut oracle = NoiselessOracle::new(matrix.t(), hidden)
        .expect("hidden sets are in range")
        .with_stage_limit(Transcript::MAX_STAGES);
    let (result, diag) = match decode(matrix, &mut oracle) {
        Ok(r) => r,
        Err(_) => {
            tally.fail("protocol");
            return tally;
        }
    };
    let transcript = &result.transcript;
    let total = transcript.total_tests();
    tally.total_tests = total;
    tally.max_tests = total;
    tally.max_stages = transcript.stage_count();
    for (slot, n) in tally.stage_max.iter_mut().zip(transcript.tests_per_stage()) {
        *slot = n;
    }
    if oracle.queries() != total {
        tally.query_mismatches = 1;
    }
    if let Some(h) = &diag.hypergraph {
        let edge = Hyperedge::new(hidden.to_vec()).expect("non-empty");
        if h.position(&edge).is_none() {
            tally.completeness_violations = 1;
        }
    }
    match &result.outcome {
        DecodeOutcome::Recovered(set) if set == hidden => {}
        DecodeOutcome::Recovered(_) => tally.fail("wrong_set"),
        DecodeOutcome::Failure(reason) => tally.fail(&reason.to_string()),
    }
    if check_structure {
        if result.failure_reason() == Some(FailureReason::StructuralViolation) {
            *tally.structural.entry(FailureReason::StructuralViolation.to_string()).or_insert(0) += 1;
        }
        if let (Some(h), Some(st)) = (&diag.hypergraph, &diag.structure) {
            for (p, n) in structural_audit(h, st, matrix.params()).count_by_property() {
                *tally.structural.entry(format!("{p:?}")).or_insert(0) += n;
            }
        }
    }
    tally
}

/// Generates a matrix, retrying with the next seed while the audit policy
/// rejects it, then decodes every hidden set of the campaign.
pub fn run_campaign(
    mode: CampaignMode,
    t: usize,
    s: usize,
    seed: u64,
    config: &CampaignConfig,
) -> Result<CampaignReport> {
    let start = Instant::now();
    let base = compute_params(t, s, &config.overrides)?;
    let sets = hidden_sets(mode, t, s, seed, config.budget)?;
    let mut summary = AuditSummary::default();

    for attempt in 0..config.retries.max(1) {
        let matrix_seed = seed.wrapping_add(attempt as u64);
        summary.attempts += 1;
        let matrix = generate_matrix(&base.with_seed(matrix_seed))?;
        log::debug!("campaign t={t} s={s}: trying matrix seed {matrix_seed}");

        if config.audit == AuditPolicy::Goodness {
            let outcomes = sets
                .iter()
                .map(|set| outcome(&matrix, set))
                .collect::<Result<Vec<_>>>()?;
            let scope = OutcomeScope::Listed(outcomes);
            let report = if s == 2 {
                audit_2good(&matrix, &scope)
            } else {
                audit_3good(&matrix, &scope)
            };
            if !report.passed() {
                reject(&mut summary, matrix_seed, report.count_by_property().into_iter().map(|(p, n)| (format!("{p:?}"), n)));
                continue;
            }
        }

        let check_structure = s == 3 && config.audit != AuditPolicy::Off;
        let tally = sets
            .par_iter()
            .map(|set| run_one(&matrix, set, check_structure))
            .reduce(Tally::default, Tally::merge);
        if !tally.structural.is_empty() {
            reject(&mut summary, matrix_seed, tally.structural.clone().into_iter());
            continue;
        }

        let failures = tally.failures.values().sum();
        let log_t = (t as f64).log2();
        return Ok(CampaignReport {
            t,
            s,
            seed: matrix_seed,
            n: matrix.n(),
            k: matrix.params().k(),
            runs: tally.runs,
            failures,
            failures_by_reason: tally.failures,
            max_tests: tally.max_tests,
            mean_tests: if tally.runs == 0 {
                0.0
            } else {
                tally.total_tests as f64 / tally.runs as f64
            },
            stage_max: tally.stage_max,
            max_stages: tally.max_stages,
            ratio: tally.max_tests as f64 / (s as f64 * log_t),
            completeness_violations: tally.completeness_violations,
            query_mismatches: tally.query_mismatches,
            audit: summary,
            wall_clock_secs: start.elapsed().as_secs_f64(),
        });
    }
    Err(Error::AuditRetriesExhausted {
        attempts: summary.attempts,
    })
}

fn reject(summary: &mut AuditSummary, seed: u64, violations: impl Iterator<Item = (String, usize)>) {
    log::info!("matrix seed {seed} rejected");
    summary.rejected_seeds.push(seed);
    for (k, n) in violations {
        *summary.violations.entry(k).or_insert(0) += n;
    }
}

/// Fully adaptive halving: binary-search one defective in the remaining
/// samples, set it aside, repeat. Every test is its own stage.
///
/// Uses at most `s * ceil(log2 t)` tests.
pub fn baseline_binary_splitting<O: StageOracle + ?Sized>(
    t: usize,
    s: usize,
    oracle: &mut O,
) -> std::result::Result<DecodeResult, ProtocolError> {
    let mut transcript = Transcript::new();
    let mut remaining: Vec<usize> = (0..t).collect();
    let mut found = Vec::with_capacity(s);
    for _ in 0..s.min(t) {
        let mut range = remaining.as_slice();
        while range.len() > 1 {
            let (left, right) = range.split_at(range.len() / 2);
            let out = oracle.run_stage(&[left.to_vec()])?;
            transcript.push(vec![left.to_vec()], out.clone());
            range = if out[0] { left } else { right };
        }
        let v = range[0];
        found.push(v);
        remaining.retain(|&x| x != v);
    }
    Ok(DecodeResult::recovered(found, transcript))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaselineReport {
    pub t: usize,
    pub s: usize,
    pub runs: usize,
    pub failures: usize,
    pub max_tests: usize,
    pub mean_tests: f64,
}

/// Runs the adaptive baseline on the same hidden sets a campaign would use.
pub fn run_baseline(mode: CampaignMode, t: usize, s: usize, seed: u64, budget: u128) -> Result<BaselineReport> {
    let sets = hidden_sets(mode, t, s, seed, budget)?;
    let (failures, max_tests, total) = sets
        .par_iter()
        .map(|set| {
            let mut oracle = NoiselessOracle::new(t, set).expect("in range");
            let r = baseline_binary_splitting(t, s, &mut oracle).expect("no stage limit");
            let tests = r.transcript.total_tests();
            (usize::from(r.defectives() != Some(set)), tests, tests)
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1.max(b.1), a.2 + b.2));
    Ok(BaselineReport {
        t,
        s,
        runs: sets.len(),
        failures,
        max_tests,
        mean_tests: if sets.is_empty() { 0.0 } else { total as f64 / sets.len() as f64 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_single_defective() {
        let mut o = NoiselessOracle::new(8, &[4]).unwrap();
        let r = baseline_binary_splitting(8, 1, &mut o).unwrap();
        assert_eq!(r.defectives(), Some(&[4][..]));
        assert_eq!(r.transcript.total_tests(), 3);
        assert_eq!(r.transcript.stage_count(), 3);
    }

    #[test]
    fn exhaustive_budget_is_enforced() {
        let err = hidden_sets(CampaignMode::Exhaustive, 64, 3, 0, 1000).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { needed: 41664, budget: 1000 }));
    }

    #[test]
    fn random_hidden_sets_are_reproducible() {
        let a = hidden_sets(CampaignMode::Random { trials: 50 }, 1000, 3, 9, 0).unwrap();
        let b = hidden_sets(CampaignMode::Random { trials: 50 }, 1000, 3, 9, 0).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|s| s.len() == 3 && s.windows(2).all(|w| w[0] < w[1])));
    }

    #[test]
    fn small_exhaustive_campaign() {
        let report = run_campaign(CampaignMode::Exhaustive, 32, 2, 1, &CampaignConfig::default()).unwrap();
        assert_eq!(report.runs, 496);
        assert_eq!(report.failures, 0);
        assert_eq!(report.successes(), 496);
        assert!(report.max_stages <= 3);
        assert_eq!(report.completeness_violations, 0);
        assert_eq!(report.query_mismatches, 0);
    }

    #[test]
    fn retry_budget_exhaustion() {
        // N so small that the sibling branch cannot separate anything
        let config = CampaignConfig {
            overrides: Overrides {
                n: Some(6),
                ..Overrides::default()
            },
            retries: 2,
            ..CampaignConfig::default()
        };
        match run_campaign(CampaignMode::Random { trials: 200 }, 64, 3, 0, &config) {
            Err(Error::AuditRetriesExhausted { attempts: 2 }) => {}
            other => panic!("expected exhausted retries, got {other:?}"),
        }
    }
}
