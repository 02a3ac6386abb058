//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! The process exits 0 so the rest of `cargo test` still runs; set
//! `ACCEPTANCE_STRICT=1` to exit 1 when any criterion fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use dynamize::harness::gen::{self, Structure};
use dynamize::harness::scaling::{mean_ratios, run_scaling, summarize, ExperimentConfig, StatsRow};
use dynamize::harness::trials::{array_trial, forest_trial, list_trial, TrialStats};
use dynamize::listseq::Sequences;
use dynamize::mapreduce::MapReduce;
use dynamize::monoid::Sum;
use dynamize::rctree::DynamicForest;
use dynamize::treecontract::TreeContraction;

const TRIAL_SEEDS: u64 = 10;
const TRIALS_PER_SEED: u64 = 1000;
const TRIAL_MAX_N: u32 = 256;

const SHRINK_BOUND: f64 = 0.875 + 0.02;
const WORK_FACTOR: u64 = 10;
const DRIFT_FACTOR: f64 = 3.0;

struct Outcome {
    id: &'static str,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn report(outcomes: &mut Vec<Outcome>, o: Outcome, started: Instant) {
    println!(
        "[{}] criterion {} {}: {} ({:.1}s)",
        if o.pass { "PASS" } else { "FAIL" },
        o.id,
        o.name,
        o.detail,
        started.elapsed().as_secs_f64()
    );
    outcomes.push(o);
}

fn log2(n: u32) -> f64 {
    (n as f64).log2()
}

fn tree_edges(structure: Structure, n: u32, rng: &mut ChaCha8Rng) -> Vec<(u32, u32, i64)> {
    gen::weighted(&gen::tree(structure, n, None, rng), 0, 100, rng)
}

/// Ten thousand randomized trials split over forests, sequences and arrays.
fn trials() -> (TrialStats, u64, Option<String>) {
    let jobs: Vec<(u64, u64)> = (0..TRIAL_SEEDS)
        .flat_map(|s| (0..TRIALS_PER_SEED).map(move |i| (s, i)))
        .collect();
    let results: Vec<Result<TrialStats, String>> = jobs
        .par_iter()
        .map(|&(s, i)| {
            let seed = s * 1_000_003 + i;
            match i % 3 {
                0 => forest_trial(seed, TRIAL_MAX_N),
                1 => list_trial(seed, TRIAL_MAX_N),
                _ => array_trial(seed, TRIAL_MAX_N),
            }
        })
        .collect();
    let mut total = TrialStats::default();
    let mut errors = 0;
    let mut first_error = None;
    for r in results {
        match r {
            Ok(s) => total.merge(s),
            Err(e) => {
                errors += 1;
                first_error.get_or_insert(e);
            }
        }
    }
    (total, errors, first_error)
}

fn main() {
    let started = Instant::now();
    let mut outcomes = Vec::new();

    // 1, 2 and part of 10: randomized trials
    let (stats, errors, first_error) = trials();
    let trial_count = TRIAL_SEEDS * TRIALS_PER_SEED;
    report(
        &mut outcomes,
        Outcome {
            id: "1",
            name: "propagation equals from-scratch run",
            pass: errors == 0 && stats.inconsistent == 0 && trial_count >= 10_000,
            detail: format!(
                "{trial_count} trials, {} state checks, {} inconsistent, {errors} operation errors{}",
                stats.consistency_checks,
                stats.inconsistent,
                first_error.or(stats.first_failure.clone()).map(|e| format!("; first: {e}")).unwrap_or_default()
            ),
        },
        started,
    );
    report(
        &mut outcomes,
        Outcome {
            id: "2",
            name: "queries equal brute-force oracles",
            pass: stats.query_mismatches == 0 && stats.query_checks > 0,
            detail: format!(
                "{} query checks, {} mismatches",
                stats.query_checks, stats.query_mismatches
            ),
        },
        started,
    );

    // 3: shrinkage on random trees
    {
        let mut worst = 0.0f64;
        let mut parts = Vec::new();
        for n in [1u32 << 10, 1 << 12, 1 << 14] {
            let means: Vec<f64> = (0..50u64)
                .into_par_iter()
                .map(|seed| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let edges = tree_edges(Structure::RandomTree, n, &mut rng);
                    let tc = TreeContraction::build(n, &edges, seed).expect("build");
                    let f = tc.survivor_fractions();
                    f.iter().sum::<f64>() / f.len() as f64
                })
                .collect();
            let mean = means.iter().sum::<f64>() / means.len() as f64;
            worst = worst.max(mean);
            parts.push(format!("n=2^{}: {mean:.4}", n.trailing_zeros()));
        }
        report(
            &mut outcomes,
            Outcome {
                id: "3",
                name: "mean per-round survivor fraction",
                pass: worst <= SHRINK_BOUND,
                detail: format!("{} (bound {SHRINK_BOUND})", parts.join(", ")),
            },
            started,
        );
    }

    // 4, 5 and part of 10: rounds and build work
    {
        let sizes = [1u32 << 10, 1 << 12, 1 << 14, 1 << 16];
        let seeds = 0..10u64;
        struct Build {
            what: &'static str,
            n: u32,
            rounds: u32,
            work: u64,
            restricted: bool,
        }
        let mut jobs = Vec::new();
        for &n in &sizes {
            for seed in seeds.clone() {
                for what in ["list", "random tree", "path tree"] {
                    jobs.push((what, n, seed));
                }
            }
        }
        let builds: Vec<Build> = jobs
            .par_iter()
            .map(|&(what, n, seed)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let audit = n == 1 << 12;
                match what {
                    "list" => {
                        let ids: Vec<(u32, i64)> = (0..n).map(|u| (u, u as i64)).collect();
                        let s = Sequences::from_chains(&[ids], Sum, seed).expect("build");
                        Build {
                            what,
                            n,
                            rounds: s.rounds(),
                            work: s.build_report().total_computations(),
                            restricted: !audit || s.restricted().restricted,
                        }
                    }
                    _ => {
                        let structure = if what == "path tree" {
                            Structure::Path
                        } else {
                            Structure::RandomTree
                        };
                        let edges = tree_edges(structure, n, &mut rng);
                        let tc = TreeContraction::build(n, &edges, seed).expect("build");
                        Build {
                            what,
                            n,
                            rounds: tc.rounds(),
                            work: tc.build_report().total_computations(),
                            restricted: !audit || tc.restricted().restricted,
                        }
                    }
                }
            })
            .collect();
        let mut round_parts = Vec::new();
        let mut work_parts = Vec::new();
        let (mut rounds_ok, mut work_ok) = (true, true);
        for what in ["list", "random tree", "path tree"] {
            let mut worst_excess = f64::MIN;
            let mut worst_rounds = (0, 0);
            let mut worst_work = 0.0f64;
            for b in builds.iter().filter(|b| b.what == what) {
                let bound = 3.0 * log2(b.n) + 10.0;
                if b.rounds as f64 - bound > worst_excess {
                    worst_excess = b.rounds as f64 - bound;
                    worst_rounds = (b.rounds, b.n);
                }
                rounds_ok &= b.rounds as f64 <= bound;
                work_ok &= b.work <= WORK_FACTOR * b.n as u64;
                worst_work = worst_work.max(b.work as f64 / b.n as f64);
            }
            let (r, n) = worst_rounds;
            round_parts.push(format!(
                "{what}: worst {r} rounds at n=2^{} (bound {:.0})",
                n.trailing_zeros(),
                3.0 * log2(n) + 10.0
            ));
            work_parts.push(format!("{what}: max {worst_work:.2}n"));
        }
        report(
            &mut outcomes,
            Outcome {
                id: "4",
                name: "build rounds <= 3 log2 n + 10",
                pass: rounds_ok,
                detail: round_parts.join("; "),
            },
            started,
        );
        report(
            &mut outcomes,
            Outcome {
                id: "5",
                name: "build computations <= 10 n",
                pass: work_ok,
                detail: format!("{} over n up to 2^16, 10 seeds", work_parts.join("; ")),
            },
            started,
        );
        let restricted_builds = builds.iter().all(|b| b.restricted);
        let mut restricted = stats.restricted && restricted_builds;
        // 10 also covers the map-reduce build at a larger size
        let m = MapReduce::new((0..4096i64).collect(), Sum).expect("build");
        restricted &= m.restricted().restricted;
        report(
            &mut outcomes,
            Outcome {
                id: "10",
                name: "restricted-model audit",
                pass: restricted,
                detail: format!(
                    "trial traces: {}, n=2^12 list/tree builds: {restricted_builds}, n=2^12 map-reduce: {}",
                    stats.restricted,
                    m.restricted().restricted
                ),
            },
            started,
        );
    }

    // 6: round-0 affected computations per batch
    {
        let n = 1u32 << 12;
        let mut jobs = Vec::new();
        for structure in [Structure::Path, Structure::RandomTree] {
            for seed in 0..10u64 {
                jobs.push((structure, seed));
            }
        }
        let results: Vec<(u64, u64, u64, String)> = jobs
            .par_iter()
            .map(|&(structure, seed)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let edges = tree_edges(structure, n, &mut rng);
                let mut tc = TreeContraction::build(n, &edges, seed).expect("build");
                let (mut batches, mut violations, mut worst) = (0, 0, 0u64);
                let mut example = String::new();
                for k in [1usize, 4, 16, 64, 256] {
                    let cut = gen::sample(&edges, k, &mut rng);
                    let pairs: Vec<(u32, u32)> = cut.iter().map(|e| (e.0, e.1)).collect();
                    for (op, r0) in [
                        (
                            "cut",
                            tc.batch_cut(&pairs)
                                .expect("cut")
                                .propagation
                                .affected_at(0),
                        ),
                        (
                            "link",
                            tc.batch_link(&cut)
                                .expect("link")
                                .propagation
                                .affected_at(0),
                        ),
                    ] {
                        batches += 1;
                        if r0 > 3 * k as u64 {
                            violations += 1;
                            if example.is_empty() {
                                example =
                                    format!("{structure} seed {seed} {op} k={k}: {r0} > {}", 3 * k);
                            }
                        }
                        worst = worst.max(r0 * 1000 / k as u64);
                    }
                }
                (batches, violations, worst, example)
            })
            .collect();
        let batches: u64 = results.iter().map(|r| r.0).sum();
        let violations: u64 = results.iter().map(|r| r.1).sum();
        let worst = results.iter().map(|r| r.2).max().unwrap_or(0) as f64 / 1000.0;
        let example = results.iter().map(|r| r.3.clone()).find(|e| !e.is_empty());
        report(
            &mut outcomes,
            Outcome {
                id: "6",
                name: "round-0 affected <= 3k",
                pass: violations == 0,
                detail: format!(
                    "{batches} batches on paths and random trees (n=2^12), {violations} over the bound, worst {worst:.2}k{}",
                    example.map(|e| format!("; e.g. {e}")).unwrap_or_default()
                ),
            },
            started,
        );
    }

    // 7 and 8: scaling of affected computations and batch-query sharing
    {
        let n = 1u32 << 16;
        let ks: Vec<usize> = (0..8).map(|i| 1usize << (2 * i)).collect();
        let mut rows_by_structure = Vec::new();
        for structure in [Structure::Path, Structure::RandomTree] {
            let rows: Vec<StatsRow> = (0..20u64)
                .into_par_iter()
                .flat_map(|seed| {
                    let cfg = ExperimentConfig {
                        structure,
                        n,
                        ks: ks.clone(),
                        seeds: vec![seed],
                        max_degree: None,
                        threads: 1,
                    };
                    run_scaling(&cfg).expect("scaling run")
                })
                .collect();
            rows_by_structure.push((structure, rows));
        }
        let mut pass7 = true;
        let mut pass8 = true;
        let mut parts7 = Vec::new();
        let mut parts8 = Vec::new();
        for (structure, rows) in &rows_by_structure {
            let r7 = mean_ratios(rows, &ks, |r| r.affected_total as f64);
            let s7 = summarize(&r7, DRIFT_FACTOR);
            pass7 &= s7.bounded;
            parts7.push(format!(
                "{structure}: c*={:.2}, median {:.2}, ratios [{}]",
                s7.c_star,
                s7.median,
                r7.iter()
                    .map(|r| format!("{:.2}", r.1))
                    .collect::<Vec<_>>()
                    .join(" ")
            ));
            let r8 = mean_ratios(rows, &ks, |r| r.rc_nodes_touched as f64);
            let s8 = summarize(&r8, DRIFT_FACTOR);
            pass8 &= s8.bounded;
            parts8.push(format!(
                "{structure}: c*={:.2}, median {:.2}, ratios [{}]",
                s8.c_star,
                s8.median,
                r8.iter()
                    .map(|r| format!("{:.2}", r.1))
                    .collect::<Vec<_>>()
                    .join(" ")
            ));
        }
        report(
            &mut outcomes,
            Outcome {
                id: "7",
                name: "affected / (k log2(1+n/k)) bounded",
                pass: pass7,
                detail: format!("n=2^16, k=1..4^7, 20 seeds; {}", parts7.join("; ")),
            },
            started,
        );

        // batch answers against pointwise answers
        let mut mismatches = 0;
        let mut checked = 0;
        for seed in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 1u32 << 12;
            let mut edges = tree_edges(Structure::RandomTree, n, &mut rng);
            edges.retain(|_| rng.gen_bool(0.99));
            let f = DynamicForest::new(n, &edges, vec![0; n as usize], seed).expect("build");
            let vertices: Vec<u32> = (0..n).collect();
            for k in [1usize, 10, 100, 1000, 4096] {
                let batch = gen::sample(&vertices, k, &mut rng);
                let got = f.batch_find_repr(&batch).expect("batch").reprs;
                for (v, r) in batch.iter().zip(got) {
                    checked += 1;
                    if f.find_repr(*v).expect("repr") != r {
                        mismatches += 1;
                    }
                }
            }
        }
        report(
            &mut outcomes,
            Outcome {
                id: "8",
                name: "batch-query nodes touched bounded, answers exact",
                pass: pass8 && mismatches == 0,
                detail: format!(
                    "{}; {checked} batch answers, {mismatches} differ from pointwise",
                    parts8.join("; ")
                ),
            },
            started,
        );
    }

    // 9: map-reduce update locality
    {
        let mut bad = Vec::new();
        let mut checked = 0;
        for k in 0..=16u32 {
            let n = 1usize << k;
            let mut m = MapReduce::new(vec![1i64; n], Sum).expect("build");
            let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
            let positions: Vec<usize> = if n <= 64 {
                (0..n).collect()
            } else {
                (0..16).map(|_| rng.gen_range(0..n)).collect()
            };
            for p in positions {
                let r = m.update(&[(p, 2)]).expect("update");
                m.update(&[(p, 1)]).expect("restore");
                checked += 1;
                if r.affected_total() != k as u64 + 1 {
                    bad.push(format!("n=2^{k} index {p}: {}", r.affected_total()));
                }
            }
        }
        report(
            &mut outcomes,
            Outcome {
                id: "9",
                name: "single map-reduce update re-executes k+1",
                pass: bad.is_empty(),
                detail: format!(
                    "{checked} updates over n=2^0..2^16, {} wrong{}",
                    bad.len(),
                    bad.first()
                        .map(|b| format!("; e.g. {b}"))
                        .unwrap_or_default()
                ),
            },
            started,
        );
    }

    outcomes.sort_by_key(|o| o.id.parse::<u32>().unwrap_or(0));
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("acceptance: {passed}/{} criteria pass", outcomes.len());
    for o in outcomes.iter().filter(|o| !o.pass) {
        println!("  failing: criterion {} {}", o.id, o.name);
    }
    if passed < outcomes.len() && std::env::var_os("ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
        std::process::exit(1);
    }
}
