//! Randomized end-to-end trials: mutate a structure in batches and check
//! every propagated state against a fresh run and every query answer
//! against a brute-force oracle.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gen::{self, Structure};
use super::oracle::{fold, OracleForest};
use crate::listseq::Sequences;
use crate::mapreduce::MapReduce;
use crate::monoid::MatMul;
use crate::rctree::DynamicForest;

/// Counters from one or more trials. An `Err` from a trial means an
/// operation failed outright; wrong answers are counted here instead.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialStats {
    pub consistency_checks: u64,
    pub inconsistent: u64,
    pub query_checks: u64,
    pub query_mismatches: u64,
    /// Whether every trace passed the restricted-model audit.
    pub restricted: bool,
    pub first_failure: Option<String>,
}

impl Default for TrialStats {
    fn default() -> Self {
        TrialStats {
            consistency_checks: 0,
            inconsistent: 0,
            query_checks: 0,
            query_mismatches: 0,
            restricted: true,
            first_failure: None,
        }
    }
}

impl TrialStats {
    pub fn merge(&mut self, other: TrialStats) {
        self.consistency_checks += other.consistency_checks;
        self.inconsistent += other.inconsistent;
        self.query_checks += other.query_checks;
        self.query_mismatches += other.query_mismatches;
        self.restricted &= other.restricted;
        if self.first_failure.is_none() {
            self.first_failure = other.first_failure;
        }
    }

    fn consistency(&mut self, result: Result<(), String>) {
        self.consistency_checks += 1;
        if let Err(e) = result {
            self.inconsistent += 1;
            self.first_failure.get_or_insert(e);
        }
    }

    fn query(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.query_checks += 1;
        if !ok {
            self.query_mismatches += 1;
            self.first_failure.get_or_insert_with(describe);
        }
    }
}

const BATCHES: usize = 3;
const QUERIES: usize = 24;

fn matrix(rng: &mut impl Rng) -> [u64; 4] {
    [
        rng.gen_range(0..5),
        rng.gen_range(0..5),
        rng.gen_range(0..5),
        rng.gen_range(0..5),
    ]
}

/// A forest on at most `max_n` vertices under random cut and link batches.
pub fn forest_trial(seed: u64, max_n: u32) -> Result<TrialStats, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_n);
    let structure = *[
        Structure::Path,
        Structure::RandomTree,
        Structure::Star,
        Structure::BinaryTree,
    ]
    .choose(&mut rng)
    .expect("non-empty");
    let mut edges = gen::weighted(
        &gen::tree(structure, n, None, &mut rng),
        -100,
        100,
        &mut rng,
    );
    edges.retain(|_| rng.gen_bool(0.8));
    let weights: Vec<i64> = (0..n).map(|_| rng.gen_range(-100..100)).collect();
    let mut f =
        DynamicForest::new(n, &edges, weights.clone(), rng.gen()).map_err(|e| e.to_string())?;
    let mut stats = TrialStats::default();
    for step in 0..=BATCHES {
        if step > 0 {
            let k = rng.gen_range(0..=edges.len().min(8));
            let cut = gen::sample(&edges, k, &mut rng);
            edges.retain(|e| !cut.contains(e));
            let cut_pairs: Vec<(u32, u32)> = cut.iter().map(|e| (e.0, e.1)).collect();
            f.batch_cut(&cut_pairs).map_err(|e| e.to_string())?;
            let mut comp = OracleForest::new(n, &edges, &[]).components();
            let mut link = Vec::new();
            for _ in 0..rng.gen_range(0..=8) {
                let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
                let (cu, cv) = (comp[u as usize], comp[v as usize]);
                if cu != cv {
                    comp.iter_mut().filter(|c| **c == cv).for_each(|c| *c = cu);
                    link.push((u, v, rng.gen_range(-100..100)));
                }
            }
            f.batch_link(&link).map_err(|e| e.to_string())?;
            edges.extend(link);
        }
        let check = f
            .check_consistency()
            .and_then(|_| f.contraction().check_invariants());
        stats.consistency(check.map_err(|e| format!("forest seed {seed} step {step}: {e}")));
        stats.restricted &= f.restricted().restricted;
        let oracle = OracleForest::new(n, &edges, &weights);
        let pairs: Vec<(u32, u32)> = (0..QUERIES)
            .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n)))
            .collect();
        let batch = f.batch_connected(&pairs).map_err(|e| e.to_string())?;
        for (&(u, v), &together) in pairs.iter().zip(&batch) {
            let want = oracle.connected(u, v);
            let got = f.connected(u, v).map_err(|e| e.to_string())?;
            stats.query(got == want && together == want, || {
                format!("forest seed {seed}: connected({u},{v}) = {got}/{together}, oracle {want}")
            });
            let (got, want) = (f.path_max(u, v).ok(), oracle.path_max(u, v));
            stats.query(got == want, || {
                format!("forest seed {seed}: path_max({u},{v}) = {got:?}, oracle {want:?}")
            });
            let (got, want) = (f.subtree_sum(u, v).ok(), oracle.subtree_sum(u, v));
            stats.query(got == want, || {
                format!("forest seed {seed}: subtree_sum({u},{v}) = {got:?}, oracle {want:?}")
            });
        }
    }
    Ok(stats)
}

/// Sequences over at most `max_n` nodes under random split, join and value
/// batches. Values are 2x2 matrices, so folds are order-sensitive.
pub fn list_trial(seed: u64, max_n: u32) -> Result<TrialStats, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_n);
    let mut values: Vec<[u64; 4]> = (0..n).map(|_| matrix(&mut rng)).collect();
    let count = rng.gen_range(1..=n as usize);
    let mut lists = gen::chains(n, count, &mut rng);
    let init: Vec<Vec<(u32, [u64; 4])>> = lists
        .iter()
        .map(|c| c.iter().map(|&u| (u, values[u as usize])).collect())
        .collect();
    let mut s = Sequences::from_chains(&init, MatMul, rng.gen()).map_err(|e| e.to_string())?;
    let mut stats = TrialStats::default();
    for step in 0..=BATCHES {
        if step > 0 {
            // split after random non-tail nodes
            let mut split = Vec::new();
            let mut next = Vec::new();
            for l in lists.drain(..) {
                let mut cur = Vec::new();
                for (k, &u) in l.iter().enumerate() {
                    cur.push(u);
                    if k + 1 < l.len() && rng.gen_bool(0.15) {
                        split.push(u);
                        next.push(std::mem::take(&mut cur));
                    }
                }
                next.push(cur);
            }
            lists = next;
            s.batch_split(&split).map_err(|e| e.to_string())?;
            // join random pairs of distinct lists, tail to head
            lists.shuffle(&mut rng);
            let mut joins = Vec::new();
            let mut merged: Vec<Vec<u32>> = Vec::new();
            let mut it = std::mem::take(&mut lists).into_iter();
            while let Some(mut a) = it.next() {
                if rng.gen_bool(0.4) {
                    if let Some(b) = it.next() {
                        joins.push((*a.last().expect("non-empty"), b[0]));
                        a.extend(b);
                    }
                }
                merged.push(a);
            }
            lists = merged;
            s.batch_join(&joins).map_err(|e| e.to_string())?;
            let updates: Vec<(u32, [u64; 4])> = (0..rng.gen_range(0..=4))
                .map(|_| (rng.gen_range(0..n), matrix(&mut rng)))
                .collect();
            let mut dedup: Vec<(u32, [u64; 4])> = Vec::new();
            for (u, m) in updates {
                if dedup.iter().all(|d| d.0 != u) {
                    dedup.push((u, m));
                    values[u as usize] = m;
                }
            }
            s.batch_update_value(&dedup).map_err(|e| e.to_string())?;
        }
        let check = s.check_consistency().and_then(|_| s.check_shape());
        stats.consistency(check.map_err(|e| format!("list seed {seed} step {step}: {e}")));
        stats.restricted &= s.restricted().restricted;
        let mut pairs = Vec::new();
        for _ in 0..QUERIES {
            let l = lists.choose(&mut rng).expect("some list");
            let a = rng.gen_range(0..l.len());
            let b = rng.gen_range(a..l.len());
            pairs.push((
                l[a],
                l[b],
                fold(
                    &MatMul,
                    &l[a..=b]
                        .iter()
                        .map(|&x| values[x as usize])
                        .collect::<Vec<_>>(),
                ),
            ));
        }
        let q: Vec<(u32, u32)> = pairs.iter().map(|p| (p.0, p.1)).collect();
        let got = s.batch_query_value(&q).map_err(|e| e.to_string())?;
        for ((u, v, want), got) in pairs.iter().zip(got) {
            stats.query(&got == want, || {
                format!("list seed {seed}: query({u},{v}) = {got:?}, fold {want:?}")
            });
        }
    }
    Ok(stats)
}

/// An array of at most `max_n` matrices under random update batches.
pub fn array_trial(seed: u64, max_n: u32) -> Result<TrialStats, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_n as usize);
    let mut values: Vec<[u64; 4]> = (0..n).map(|_| matrix(&mut rng)).collect();
    let mut m = MapReduce::new(values.clone(), MatMul).map_err(|e| e.to_string())?;
    let mut stats = TrialStats::default();
    for step in 0..=BATCHES {
        if step > 0 {
            let idx = gen::sample(
                &(0..n).collect::<Vec<_>>(),
                rng.gen_range(0..=n.min(16)),
                &mut rng,
            );
            let batch: Vec<(usize, [u64; 4])> =
                idx.into_iter().map(|i| (i, matrix(&mut rng))).collect();
            for &(i, v) in &batch {
                values[i] = v;
            }
            m.update(&batch).map_err(|e| e.to_string())?;
        }
        stats.consistency(
            m.check_consistency()
                .map_err(|e| format!("array seed {seed} step {step}: {e}")),
        );
        stats.restricted &= m.restricted().restricted;
        for _ in 0..QUERIES {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(i..n);
            let got = m.range(i, j).map_err(|e| e.to_string())?;
            let want = fold(&MatMul, &values[i..=j]);
            stats.query(got == want, || {
                format!("array seed {seed}: range({i},{j}) = {got:?}, fold {want:?}")
            });
        }
    }
    Ok(stats)
}
