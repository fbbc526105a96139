use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use multistage_gt::campaign::{self, CampaignConfig, CampaignMode};
use multistage_gt::{io as gtio, rates, Error, NoiselessOracle, OutcomeScope, Overrides, RelativeWeight};

#[derive(Parser)]
#[command(name = "mgt", version, about = "Multistage group testing for two and three defectives")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a stage-1 matrix and write it as a matrix file.
    Design {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        s: usize,
        #[arg(long = "N")]
        n: Option<usize>,
        /// Relative column weight, as a decimal or `num/den`.
        #[arg(long)]
        p: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the 2-good or 3-good properties of a matrix file.
    Audit {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_enum, default_value_t = Scope::Reachable)]
        scope: Scope,
    },
    /// Decode one hidden set (1-based indices) and print the transcript.
    Decode {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_delimiter = ',')]
        hidden: Vec<usize>,
    },
    /// Run a verification campaign and print a CSV row.
    Verify {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        s: usize,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "N")]
        n: Option<usize>,
    },
    /// Print the optimized rate constants as JSON.
    Rates,
    /// Random campaigns over several sizes, with the adaptive baseline.
    Bench {
        #[arg(long, value_delimiter = ',', required = true)]
        t_list: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        s: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Scope {
    Reachable,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exhaustive,
    Random,
}

fn parse_weight(text: &str) -> multistage_gt::Result<RelativeWeight> {
    let bad = || Error::InvalidParams(format!("cannot parse p = {text:?}"));
    if let Some((a, b)) = text.split_once('/') {
        return RelativeWeight::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    }
    let value: f64 = text.parse().map_err(|_| bad())?;
    let denom = 1_000_000_000_000u64;
    RelativeWeight::new((value * denom as f64).round() as u64, denom)
}

fn run(cli: Cli) -> multistage_gt::Result<bool> {
    let stdout = io::stdout();
    match cli.command {
        Command::Design { t, s, n, p, seed, out } => {
            let overrides = Overrides {
                n,
                p: p.as_deref().map(parse_weight).transpose()?,
                sparsity: None,
            };
            let params = multistage_gt::compute_params(t, s, &overrides)?.with_seed(seed);
            let matrix = multistage_gt::generate_matrix(&params)?;
            match out {
                Some(path) => gtio::write_matrix(&matrix, io::BufWriter::new(File::create(path)?))?,
                None => gtio::write_matrix(&matrix, stdout.lock())?,
            }
            eprintln!("N={} k={} d/L1={}", params.n(), params.k(), params.sparsity());
        }
        Command::Audit { matrix, scope } => {
            let matrix = gtio::read_matrix(BufReader::new(File::open(matrix)?))?;
            let scope = match scope {
                Scope::Reachable => OutcomeScope::Reachable,
                Scope::All => {
                    if matrix.n() > OutcomeScope::MAX_EXHAUSTIVE_N {
                        return Err(Error::InvalidParams(format!(
                            "--scope all needs N <= {}",
                            OutcomeScope::MAX_EXHAUSTIVE_N
                        )));
                    }
                    OutcomeScope::All
                }
            };
            let report = if matrix.params().s() == 2 {
                multistage_gt::audit_2good(&matrix, &scope)
            } else {
                multistage_gt::audit_3good(&matrix, &scope)
            };
            let mut out = stdout.lock();
            writeln!(out, "checked_outcomes={}", report.checked_outcomes)?;
            for (property, count) in report.count_by_property() {
                writeln!(out, "violations {property:?}={count}")?;
            }
            writeln!(out, "{}", if report.passed() { "PASS" } else { "FAIL" })?;
            return Ok(report.passed());
        }
        Command::Decode { matrix, hidden } => {
            let matrix = gtio::read_matrix(BufReader::new(File::open(matrix)?))?;
            if hidden.contains(&0) {
                return Err(Error::InvalidParams("hidden indices are 1-based".into()));
            }
            let hidden: Vec<usize> = hidden.iter().map(|v| v - 1).collect();
            let mut oracle = NoiselessOracle::new(matrix.t(), &hidden)?;
            let (result, _) = campaign::decode(&matrix, &mut oracle)?;
            let mut out = stdout.lock();
            writeln!(out, "{}", gtio::transcript_to_json(&result.transcript))?;
            match result.defectives() {
                Some(set) => {
                    let one_based: Vec<String> = set.iter().map(|v| (v + 1).to_string()).collect();
                    writeln!(out, "recovered {}", one_based.join(","))?;
                }
                None => writeln!(out, "failure {}", result.failure_reason().unwrap())?,
            }
            writeln!(out, "stages={} tests={}", result.transcript.stage_count(), result.transcript.total_tests())?;
            return Ok(result.defectives().is_some());
        }
        Command::Verify { t, s, mode, trials, seed, n } => {
            let mode = match mode {
                Mode::Exhaustive => CampaignMode::Exhaustive,
                Mode::Random => CampaignMode::Random { trials },
            };
            let config = CampaignConfig {
                overrides: Overrides { n, ..Overrides::default() },
                ..CampaignConfig::default()
            };
            let report = campaign::run_campaign(mode, t, s, seed, &config)?;
            gtio::write_campaign_csv(std::slice::from_ref(&report), stdout.lock())?;
            eprintln!(
                "failures by reason: {:?}; rejected seeds: {:?}; {:.2}s",
                report.failures_by_reason, report.audit.rejected_seeds, report.wall_clock_secs
            );
            return Ok(report.failures == 0);
        }
        Command::Rates => {
            let report = rates::default_rate_report()?;
            writeln!(stdout.lock(), "{}", gtio::rate_report_json(&report))?;
        }
        Command::Bench { t_list, s, trials, seed } => {
            let mode = CampaignMode::Random { trials };
            let mut reports = Vec::new();
            for t in t_list {
                let report = campaign::run_campaign(mode, t, s, seed, &CampaignConfig::default())?;
                let baseline = campaign::run_baseline(mode, t, s, seed, u128::MAX)?;
                eprintln!(
                    "t={t}: max tests {} vs adaptive baseline {} ({:.2}s)",
                    report.max_tests, baseline.max_tests, report.wall_clock_secs
                );
                reports.push(report);
            }
            gtio::write_campaign_csv(&reports, stdout.lock())?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
