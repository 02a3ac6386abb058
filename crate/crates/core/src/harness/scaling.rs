//! Scaling experiments: build a tree, then for each batch size `k` cut `k`
//! random edges and measure the change propagation, then link them back.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gen::{self, Structure};
use crate::rctree::{DynamicForest, ForestError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub structure: Structure,
    pub n: u32,
    pub ks: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Degree cap for random trees.
    pub max_degree: Option<u32>,
    pub threads: usize,
}

/// One measurement. Affected counts refer to the cut batch.
#[derive(Clone, Debug, PartialEq)]
pub struct StatsRow {
    pub n: u32,
    pub k: usize,
    pub seed: u64,
    pub rounds: u32,
    pub initial_work: u64,
    pub affected_total: u64,
    pub affected_round0: u64,
    /// Distinct RC nodes visited by a batch representative query on `k`
    /// random vertices after the cut.
    pub rc_nodes_touched: usize,
    pub wall_time_ms: f64,
}

pub const CSV_HEADER: [&str; 9] = [
    "n",
    "k",
    "seed",
    "rounds",
    "initial_work",
    "affected_total",
    "affected_round0",
    "rc_nodes_touched",
    "wall_time_ms",
];

/// `k * log2(1 + n/k)`, the normalizer for per-batch costs.
pub fn k_log(n: u32, k: usize) -> f64 {
    let k = k as f64;
    k * (1.0 + n as f64 / k).log2()
}

/// Mean of `metric / k_log(n, k)` per batch size, in the order of `ks`.
pub fn mean_ratios(
    rows: &[StatsRow],
    ks: &[usize],
    metric: impl Fn(&StatsRow) -> f64,
) -> Vec<(usize, f64)> {
    ks.iter()
        .map(|&k| {
            let rs: Vec<f64> = rows
                .iter()
                .filter(|r| r.k == k)
                .map(|r| metric(r) / k_log(r.n, k))
                .collect();
            (k, rs.iter().sum::<f64>() / rs.len().max(1) as f64)
        })
        .collect()
}

/// Bounded-ratio summary: `c_star` is the largest mean ratio, and the
/// ratios drift if any exceeds three times their median.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioSummary {
    pub c_star: f64,
    pub median: f64,
    pub bounded: bool,
}

/// `bounded` holds when no ratio exceeds `drift` times the median.
pub fn summarize(ratios: &[(usize, f64)], drift: f64) -> RatioSummary {
    let mut v: Vec<f64> = ratios.iter().map(|r| r.1).collect();
    v.sort_by(f64::total_cmp);
    let median = match v.len() {
        0 => 0.0,
        l if l % 2 == 1 => v[l / 2],
        l => (v[l / 2 - 1] + v[l / 2]) / 2.0,
    };
    let c_star = v.last().copied().unwrap_or(0.0);
    RatioSummary {
        c_star,
        median,
        bounded: c_star <= drift * median,
    }
}

pub fn run_scaling(cfg: &ExperimentConfig) -> Result<Vec<StatsRow>, ForestError> {
    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges = gen::weighted(
            &gen::tree(cfg.structure, cfg.n, cfg.max_degree, &mut rng),
            0,
            1000,
            &mut rng,
        );
        let mut f =
            DynamicForest::with_threads(cfg.n, &edges, vec![0; cfg.n as usize], seed, cfg.threads)?;
        let rounds = f.contraction().rounds();
        let initial_work = f.contraction().build_report().total_computations();
        let vertices: Vec<u32> = (0..cfg.n).collect();
        for &k in &cfg.ks {
            let cut = gen::sample(&edges, k, &mut rng);
            let pairs: Vec<(u32, u32)> = cut.iter().map(|e| (e.0, e.1)).collect();
            let start = Instant::now();
            let report = f.batch_cut(&pairs)?;
            let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
            let batch = gen::sample(&vertices, k, &mut rng);
            let touched = f.batch_find_repr(&batch)?.touched;
            f.batch_link(&cut)?;
            rows.push(StatsRow {
                n: cfg.n,
                k,
                seed,
                rounds,
                initial_work,
                affected_total: report.propagation.affected_total(),
                affected_round0: report.propagation.affected_at(0),
                rc_nodes_touched: touched,
                wall_time_ms,
            });
        }
        // keep seeds independent of how many ks were run
        let _ = rng.gen::<u64>();
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(out: W, rows: &[StatsRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.k.to_string(),
            r.seed.to_string(),
            r.rounds.to_string(),
            r.initial_work.to_string(),
            r.affected_total.to_string(),
            r.affected_round0.to_string(),
            r.rc_nodes_touched.to_string(),
            format!("{:.3}", r.wall_time_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_restores_and_reports() {
        let cfg = ExperimentConfig {
            structure: Structure::RandomTree,
            n: 512,
            ks: vec![1, 8, 64],
            seeds: vec![1, 2],
            max_degree: None,
            threads: 1,
        };
        let rows = run_scaling(&cfg).unwrap();
        assert_eq!(rows.len(), 6);
        for r in &rows {
            assert!(r.affected_total >= r.affected_round0);
            assert!(r.rc_nodes_touched >= r.k);
        }
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,k,seed,rounds,initial_work,affected_total,affected_round0,rc_nodes_touched,wall_time_ms\n"));
        assert_eq!(text.lines().count(), 7);
    }

    #[test]
    fn summary_flags_drift() {
        let s = summarize(&[(1, 1.0), (4, 1.2), (16, 1.1)], 3.0);
        assert_eq!(s.median, 1.1);
        assert!(s.bounded);
        assert!(!summarize(&[(1, 1.0), (4, 1.0), (16, 5.0)], 3.0).bounded);
    }
}
