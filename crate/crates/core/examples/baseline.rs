//! Compares the multistage decoders with fully adaptive binary splitting.

use multistage_gt::campaign::run_baseline;
use multistage_gt::{run_campaign, CampaignConfig, CampaignMode};

fn main() -> multistage_gt::Result<()> {
    let mode = CampaignMode::Random { trials: 1000 };
    println!("{:>6} {:>2} {:>10} {:>9} {:>7}", "t", "s", "multistage", "adaptive", "stages");
    for s in [2, 3] {
        for bits in [8, 10, 12] {
            let t = 1 << bits;
            let ours = run_campaign(mode, t, s, 0, &CampaignConfig::default())?;
            let base = run_baseline(mode, t, s, 0, u128::MAX)?;
            println!(
                "{:>6} {:>2} {:>10} {:>9} {:>7}",
                t, s, ours.max_tests, base.max_tests, ours.max_stages
            );
        }
    }
    Ok(())
}
