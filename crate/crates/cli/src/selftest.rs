use clap::Args;

use dynamize::harness::trials::{array_trial, forest_trial, list_trial, TrialStats};

use crate::report;
use crate::Global;

#[derive(Args, Debug)]
pub struct SelftestArgs {
    /// Trials per structure kind.
    #[arg(long, default_value_t = 100)]
    trials: u64,
    /// Largest structure size.
    #[arg(long, default_value_t = 64)]
    max_n: u32,
}

pub fn run(g: &Global, args: &SelftestArgs) -> anyhow::Result<()> {
    let mut total = TrialStats::default();
    for i in 0..args.trials {
        let seed = g.seed.wrapping_mul(1_000_003).wrapping_add(i);
        for trial in [forest_trial, list_trial, array_trial] {
            total.merge(
                trial(seed, args.max_n).map_err(|e| anyhow::anyhow!("trial seed {seed}: {e}"))?,
            );
        }
    }
    report::fields(
        g.format,
        &[
            ("trials", (3 * args.trials).to_string()),
            ("consistency_checks", total.consistency_checks.to_string()),
            ("inconsistent", total.inconsistent.to_string()),
            ("query_checks", total.query_checks.to_string()),
            ("query_mismatches", total.query_mismatches.to_string()),
            ("restricted", total.restricted.to_string()),
        ],
    );
    if total.inconsistent > 0 || total.query_mismatches > 0 || !total.restricted {
        anyhow::bail!(
            "self-test failed: {}",
            total
                .first_failure
                .unwrap_or_else(|| "restricted audit".into())
        );
    }
    Ok(())
}
