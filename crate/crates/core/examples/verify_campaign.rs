//! Exhaustive verification at t = 64 for both decoders, written as CSV.

use multistage_gt::{io, run_campaign, CampaignConfig, CampaignMode};

fn main() -> multistage_gt::Result<()> {
    env_logger::init();
    let config = CampaignConfig::default();
    let reports = [2, 3]
        .into_iter()
        .map(|s| run_campaign(CampaignMode::Exhaustive, 64, s, 0, &config))
        .collect::<multistage_gt::Result<Vec<_>>>()?;
    io::write_campaign_csv(&reports, std::io::stdout().lock())?;
    for r in &reports {
        eprintln!(
            "s={}: {} runs, {} failures, at most {} stages, {:.2}s",
            r.s, r.runs, r.failures, r.max_stages, r.wall_clock_secs
        );
    }
    Ok(())
}
