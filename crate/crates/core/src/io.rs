//! File formats: matrix text files, transcript JSON, campaign CSV and the
//! rate report.
//!
//! Matrix file:
//!
//! ```text
//! GTMATRIX v1 N=4 t=3 s=2 k=2 seed=0
//! 100
//! 110
//! 011
//! 001
//! ```
//!
//! one line per test, one character per sample. Transcripts use 1-based
//! sample indices.

use std::io::{BufRead, Write};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::campaign::CampaignReport;
use crate::design::{compute_params, sparsity_threshold};
use crate::error::{Error, Result};
use crate::model::{DesignParams, Overrides, PoolMatrix, RelativeWeight, Transcript};
use crate::rates::{self, RateReport};

const MAGIC: &str = "GTMATRIX";
const VERSION: &str = "v1";

pub fn write_matrix<W: Write>(matrix: &PoolMatrix, mut out: W) -> Result<()> {
    let p = matrix.params();
    writeln!(
        out,
        "{MAGIC} {VERSION} N={} t={} s={} k={} seed={}",
        p.n(),
        p.t(),
        p.s(),
        p.k(),
        p.seed()
    )?;
    let mut line = String::with_capacity(p.t());
    for i in 0..p.n() {
        line.clear();
        line.extend(matrix.columns().iter().map(|c| if c.contains(i) { '1' } else { '0' }));
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn matrix_to_string(matrix: &PoolMatrix) -> String {
    let mut buf = Vec::new();
    write_matrix(matrix, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii")
}

fn header_field(token: Option<&str>, key: &str) -> Result<u64> {
    let token = token.ok_or_else(|| Error::Format(format!("missing header field {key}")))?;
    let value = token
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| Error::Format(format!("expected {key}=<int>, found {token:?}")))?;
    value
        .parse()
        .map_err(|_| Error::Format(format!("bad value for {key}: {value:?}")))
}

/// Parses a matrix file, rejecting wrong dimensions, stray characters and
/// columns whose weight differs from the header `k`.
///
/// The file does not store `p` or the sparsity threshold. `p` is taken as
/// the default weight when that yields `k`, and as `k / N` otherwise; the
/// sparsity threshold is the default for `t`.
pub fn read_matrix<R: BufRead>(input: R) -> Result<PoolMatrix> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty file".into()))??;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some(MAGIC) || tokens.next() != Some(VERSION) {
        return Err(Error::Format(format!("bad header line {header:?}")));
    }
    let n = header_field(tokens.next(), "N")? as usize;
    let t = header_field(tokens.next(), "t")? as usize;
    let s = header_field(tokens.next(), "s")? as usize;
    let k = header_field(tokens.next(), "k")? as usize;
    let seed = header_field(tokens.next(), "seed")?;
    if let Some(extra) = tokens.next() {
        return Err(Error::Format(format!("unexpected header token {extra:?}")));
    }

    let mut columns = vec![FixedBitSet::with_capacity(n); t];
    let mut rows = 0;
    for line in lines {
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if rows == n {
            return Err(Error::Format(format!("more than N = {n} rows")));
        }
        if line.len() != t {
            return Err(Error::Format(format!(
                "row {} has {} entries, expected t = {t}",
                rows + 1,
                line.len()
            )));
        }
        for (j, c) in line.bytes().enumerate() {
            match c {
                b'1' => columns[j].insert(rows),
                b'0' => {}
                _ => return Err(Error::Format(format!("row {} has character {:?}", rows + 1, c as char))),
            }
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Format(format!("found {rows} rows, expected N = {n}")));
    }
    if let Some(j) = columns.iter().position(|c| c.count_ones(..) != k) {
        return Err(Error::Format(format!(
            "column {} has weight {}, header says k = {k}",
            j + 1,
            columns[j].count_ones(..)
        )));
    }

    let params = reconstruct_params(t, s, n, k, seed)?;
    PoolMatrix::from_columns(params, columns)
}

fn reconstruct_params(t: usize, s: usize, n: usize, k: usize, seed: u64) -> Result<DesignParams> {
    if !(2..=3).contains(&s) || k == 0 || k >= n {
        return Err(Error::Format(format!("inconsistent header: s={s}, k={k}, N={n}")));
    }
    let default_p = RelativeWeight::for_defectives(s);
    if default_p.column_weight(n) == k {
        if let Ok(formula) = compute_params(t, s, &Overrides::default()) {
            let overrides = Overrides {
                n: (formula.n() != n).then_some(n),
                ..Overrides::default()
            };
            let c3 = if s == 3 { Some(rates::default_c3()?) } else { None };
            return DesignParams::from_parts(t, s, default_p, n, formula.sparsity(), seed, c3, overrides);
        }
    }
    Ok(DesignParams::with_weight(t, s, n, k, sparsity_threshold(t))?.with_seed(seed))
}

pub fn matrix_from_str(text: &str) -> Result<PoolMatrix> {
    read_matrix(text.as_bytes())
}

#[derive(Serialize, Deserialize)]
struct StageJson {
    tests: Vec<Vec<usize>>,
    outcomes: Vec<u8>,
}

#[derive(Serialize, Deserialize)]
struct TranscriptJson {
    stages: Vec<StageJson>,
}

pub fn transcript_to_json(transcript: &Transcript) -> String {
    let doc = TranscriptJson {
        stages: transcript
            .stages()
            .iter()
            .map(|st| StageJson {
                tests: st
                    .tests
                    .iter()
                    .map(|t| t.iter().map(|v| v + 1).collect())
                    .collect(),
                outcomes: st.outcomes.iter().map(|&o| u8::from(o)).collect(),
            })
            .collect(),
    };
    serde_json::to_string(&doc).expect("plain data")
}

pub fn transcript_from_json(text: &str) -> Result<Transcript> {
    let doc: TranscriptJson = serde_json::from_str(text)?;
    let mut transcript = Transcript::new();
    for (i, st) in doc.stages.into_iter().enumerate() {
        if st.tests.len() != st.outcomes.len() {
            return Err(Error::Format(format!("stage {} has unequal tests and outcomes", i + 1)));
        }
        let tests = st
            .tests
            .into_iter()
            .map(|t| {
                t.into_iter()
                    .map(|v| {
                        v.checked_sub(1)
                            .ok_or_else(|| Error::Format("sample index 0 in 1-based transcript".into()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let outcomes = st
            .outcomes
            .into_iter()
            .map(|o| match o {
                0 => Ok(false),
                1 => Ok(true),
                _ => Err(Error::Format(format!("outcome {o} is not 0 or 1"))),
            })
            .collect::<Result<Vec<_>>>()?;
        transcript.push(tests, outcomes);
    }
    Ok(transcript)
}

pub const CAMPAIGN_HEADER: [&str; 14] = [
    "t",
    "s",
    "seed",
    "N",
    "runs",
    "failures",
    "max_tests",
    "mean_tests",
    "stage_max_1",
    "stage_max_2",
    "stage_max_3",
    "stage_max_4",
    "stage_max_5",
    "ratio",
];

pub fn write_campaign_csv<W: Write>(reports: &[CampaignReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CAMPAIGN_HEADER)?;
    for r in reports {
        let mut row = vec![
            r.t.to_string(),
            r.s.to_string(),
            r.seed.to_string(),
            r.n.to_string(),
            r.runs.to_string(),
            r.failures.to_string(),
            r.max_tests.to_string(),
            format!("{:.4}", r.mean_tests),
        ];
        row.extend(r.stage_max.iter().map(|v| v.to_string()));
        row.push(format!("{:.6}", r.ratio));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn rate_report_json(report: &RateReport) -> String {
    serde_json::to_string_pretty(report).expect("plain data")
}
