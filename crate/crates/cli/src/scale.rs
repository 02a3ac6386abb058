use std::path::PathBuf;

use anyhow::Context;
use clap::Args;

use dynamize::harness::gen::Structure;
use dynamize::harness::scaling::{
    mean_ratios, run_scaling, summarize, write_csv, ExperimentConfig,
};

use crate::report::Format;
use crate::Global;

/// Ratios above this multiple of the median count as drift.
const DRIFT_FACTOR: f64 = 3.0;

#[derive(Args, Debug)]
pub struct ScaleArgs {
    /// path, random-tree, star or binary-tree.
    #[arg(long, default_value = "random-tree")]
    structure: Structure,
    #[arg(long, default_value_t = 1 << 12)]
    n: u32,
    /// Batch sizes, comma-separated.
    #[arg(long = "k", value_delimiter = ',', default_values_t = [1usize, 16, 256])]
    ks: Vec<usize>,
    /// Seeds, comma-separated; defaults to `--seed`.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Degree cap for random trees.
    #[arg(long)]
    max_degree: Option<u32>,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

pub fn run(g: &Global, args: &ScaleArgs) -> anyhow::Result<()> {
    let edges = args.n.saturating_sub(1) as usize;
    if let Some(&k) = args.ks.iter().find(|&&k| k == 0 || k > edges) {
        anyhow::bail!("batch size {k} outside 1..={edges}");
    }
    let cfg = ExperimentConfig {
        structure: args.structure,
        n: args.n,
        ks: args.ks.clone(),
        seeds: if args.seeds.is_empty() {
            vec![g.seed]
        } else {
            args.seeds.clone()
        },
        max_degree: args.max_degree,
        threads: g.threads(),
    };
    let rows = run_scaling(&cfg)?;
    let ratios = mean_ratios(&rows, &cfg.ks, |r| r.affected_total as f64);
    let summary = summarize(&ratios, DRIFT_FACTOR);
    match (&args.output, g.format) {
        (Some(p), _) => {
            let file = std::fs::File::create(p).with_context(|| p.display().to_string())?;
            write_csv(file, &rows)?;
        }
        (None, Format::Csv) => write_csv(std::io::stdout().lock(), &rows)?,
        (None, Format::Text) => {
            println!("{:>8} {:>14} {:>10}", "k", "mean affected", "ratio");
            for &(k, ratio) in &ratios {
                let sel: Vec<f64> = rows
                    .iter()
                    .filter(|r| r.k == k)
                    .map(|r| r.affected_total as f64)
                    .collect();
                println!(
                    "{k:>8} {:>14.1} {ratio:>10.3}",
                    sel.iter().sum::<f64>() / sel.len() as f64
                );
            }
        }
    }
    let line = format!(
        "c* {:.3} median {:.3} {}",
        summary.c_star,
        summary.median,
        if summary.bounded {
            "bounded"
        } else {
            "drifting"
        }
    );
    // keep standard output pure CSV in csv mode
    if g.format == Format::Csv && args.output.is_none() {
        eprintln!("{line}");
    } else {
        println!("{line}");
    }
    Ok(())
}
