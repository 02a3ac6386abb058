use std::collections::VecDeque;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn unweighted(edges: &[(u32, u32)]) -> Vec<(u32, u32, i64)> {
    edges.iter().map(|&(u, v)| (u, v, 0)).collect()
}

fn deaths(tc: &TreeContraction) -> Vec<Round> {
    (0..tc.vertex_count()).map(|v| tc.death(v)).collect()
}

/// Component label per vertex by BFS over an edge list.
fn bfs_components(n: u32, edges: &[(u32, u32)]) -> Vec<u32> {
    let mut adj = vec![Vec::new(); n as usize];
    for &(u, v) in edges {
        adj[u as usize].push(v);
        adj[v as usize].push(u);
    }
    let mut comp = vec![u32::MAX; n as usize];
    for s in 0..n {
        if comp[s as usize] != u32::MAX {
            continue;
        }
        comp[s as usize] = s;
        let mut q = VecDeque::from([s]);
        while let Some(x) = q.pop_front() {
            for &y in &adj[x as usize] {
                if comp[y as usize] == u32::MAX {
                    comp[y as usize] = s;
                    q.push_back(y);
                }
            }
        }
    }
    comp
}

fn assert_components(tc: &TreeContraction, edges: &[(u32, u32)]) {
    let comp = bfs_components(tc.vertex_count(), edges);
    for u in 0..tc.vertex_count() {
        for v in 0..tc.vertex_count() {
            let same = tc.root_of(u).unwrap() == tc.root_of(v).unwrap();
            assert_eq!(same, comp[u as usize] == comp[v as usize], "{u} vs {v}");
        }
    }
}

fn random_forest(rng: &mut ChaCha8Rng, n: u32, keep: f64) -> Vec<(u32, u32)> {
    (1..n)
        .filter_map(|v| rng.gen_bool(keep).then(|| (rng.gen_range(0..v), v)))
        .collect()
}

#[test]
fn isolated_vertex_finalizes_at_once() {
    let tc = TreeContraction::build(1, &[], 7).unwrap();
    assert_eq!(deaths(&tc), [0]);
    assert_eq!(tc.action(0, 0), Some(Action::Finalize));
}

#[test]
fn single_edge_lower_id_rakes() {
    let tc = TreeContraction::build(2, &unweighted(&[(0, 1)]), 7).unwrap();
    assert_eq!(deaths(&tc), [0, 1]);
    assert_eq!(
        tc.slots_at(1, 1).unwrap()[0],
        Slot::Empty { raked: Some(0) }
    );
}

#[test]
fn path_of_three() {
    let tc = TreeContraction::build(3, &unweighted(&[(0, 1), (1, 2)]), 7).unwrap();
    assert_eq!(deaths(&tc), [0, 1, 0]);
}

#[test]
fn star_of_three_leaves() {
    let tc = TreeContraction::build(4, &unweighted(&[(0, 1), (0, 2), (0, 3)]), 3).unwrap();
    assert_eq!(deaths(&tc), [1, 0, 0, 0]);
    assert_eq!(tc.build_report().computations_per_round, [4, 1]);
}

#[test]
fn degree_two_next_to_leaf_never_compresses() {
    // 1 sits between leaf 0 and non-leaf 2
    for seed in 0..64 {
        let tc = TreeContraction::build(4, &unweighted(&[(0, 1), (1, 2), (2, 3)]), seed).unwrap();
        assert_ne!(tc.action(0, 1), Some(Action::Compress));
        assert_ne!(tc.action(0, 2), Some(Action::Compress));
    }
}

#[test]
fn compress_writes_bypass_entries() {
    let path = unweighted(&[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6)]);
    let seed = (0..1000)
        .find(|&s| {
            let c = CoinOracle::new(s);
            c.heads(0, 3) && !c.heads(0, 2) && !c.heads(0, 4)
        })
        .expect("some seed compresses 3");
    let tc = TreeContraction::build(7, &path, seed).unwrap();
    assert_eq!(tc.action(0, 3), Some(Action::Compress));
    let s2 = tc.slots_at(1, 2).unwrap();
    let s4 = tc.slots_at(1, 4).unwrap();
    let (j2, e2) = s2
        .iter()
        .enumerate()
        .find_map(|(j, s)| s.edge().filter(|e| e.neighbor == 4).map(|e| (j, *e)))
        .unwrap();
    assert_eq!(e2.rep, Some(3));
    assert_eq!(
        s4[e2.back as usize],
        Slot::Edge(AdjEntry {
            neighbor: 2,
            back: j2 as u8,
            rep: Some(3)
        })
    );
    tc.check_invariants().unwrap();
}

#[test]
fn link_two_singletons_matches_build() {
    let mut tc = TreeContraction::build(2, &[], 11).unwrap();
    tc.batch_link(&[(0, 1, 5)]).unwrap();
    let fresh = TreeContraction::build(2, &[(0, 1, 5)], 11).unwrap();
    assert_eq!(deaths(&tc), deaths(&fresh));
    assert_eq!(tc.engine().trace(), fresh.engine().trace());
    tc.check_consistency().unwrap();
}

#[test]
fn cut_only_edge() {
    let mut tc = TreeContraction::build(2, &unweighted(&[(0, 1)]), 1).unwrap();
    tc.batch_cut(&[(1, 0)]).unwrap();
    assert_eq!(deaths(&tc), [0, 0]);
    tc.check_consistency().unwrap();
}

#[test]
fn cut_then_relink_restores_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let edges = unweighted(&random_forest(&mut rng, 200, 1.0));
    let mut tc = TreeContraction::build(200, &edges, 9).unwrap();
    let before = tc.engine().trace().clone();
    for &(u, v, w) in edges.iter().step_by(17) {
        tc.batch_cut(&[(u, v)]).unwrap();
        tc.batch_link(&[(u, v, w)]).unwrap();
        assert_eq!(tc.engine().trace(), &before);
    }
    tc.check_consistency().unwrap();
}

#[test]
fn empty_batches_do_nothing() {
    let mut tc = TreeContraction::build(5, &unweighted(&[(0, 1), (1, 2)]), 1).unwrap();
    assert_eq!(tc.batch_link(&[]).unwrap().propagation.affected_total(), 0);
    assert_eq!(tc.batch_cut(&[]).unwrap().propagation.affected_total(), 0);
}

#[test]
fn rejects_bad_input() {
    assert_eq!(
        TreeContraction::build(2, &[(0, 2, 0)], 0).err(),
        Some(TreeError::UnknownVertex(2))
    );
    assert_eq!(
        TreeContraction::build(2, &[(1, 1, 0)], 0).err(),
        Some(TreeError::SelfLoop(1))
    );
    assert_eq!(
        TreeContraction::build(2, &[(0, 1, 0), (1, 0, 0)], 0).err(),
        Some(TreeError::DuplicateEdge(1, 0))
    );
    let tri = unweighted(&[(0, 1), (1, 2), (2, 0)]);
    assert_eq!(
        TreeContraction::build(3, &tri, 0).err(),
        Some(TreeError::Cycle(2, 0))
    );

    let mut tc = TreeContraction::build(4, &unweighted(&[(0, 1), (2, 3)]), 0).unwrap();
    assert_eq!(
        tc.batch_link(&[(1, 0, 0)]).err(),
        Some(TreeError::EdgeExists(1, 0))
    );
    assert_eq!(
        tc.batch_link(&[(0, 2, 0), (1, 3, 0)]).err(),
        Some(TreeError::Cycle(1, 3))
    );
    assert_eq!(
        tc.batch_cut(&[(0, 2)]).err(),
        Some(TreeError::MissingEdge(0, 2))
    );
    // rejected batches leave no trace
    tc.check_consistency().unwrap();
    assert_components(&tc, &[(0, 1), (2, 3)]);
}

#[test]
fn high_degree_links_grow_chains() {
    let mut tc = TreeContraction::build(12, &[], 2).unwrap();
    let star: Vec<_> = (1..12).map(|v| (0, v, v as i64)).collect();
    let report = tc.batch_link(&star).unwrap();
    assert!(!report.created.is_empty());
    assert!(tc.forest().max_degree() <= SLOTS);
    tc.check_consistency().unwrap();
    tc.check_invariants().unwrap();
    assert_components(&tc, &star.iter().map(|e| (e.0, e.1)).collect::<Vec<_>>());
    tc.batch_cut(&[(0, 4), (0, 9)]).unwrap();
    tc.check_consistency().unwrap();
}

#[test]
fn reduction_preserves_components() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let edges = random_forest(&mut rng, 60, 0.8);
        let tc = TreeContraction::build(60, &unweighted(&edges), 1).unwrap();
        assert!(tc.forest().max_degree() <= SLOTS);
        assert!(tc.internal_count() <= 60 + 2 * edges.len() as u32);
        assert_components(&tc, &edges);
    }
}

/// Every labelled tree on up to six vertices, via Pruefer sequences: build,
/// cut each edge and relink it, checking against a fresh run every time.
#[test]
fn exhaustive_small_trees() {
    for n in 2..=6u32 {
        let len = (n - 2) as usize;
        for code in 0..n.pow(len as u32) {
            let seq: Vec<u32> = (0..len).map(|k| code / n.pow(k as u32) % n).collect();
            let edges = unweighted(&pruefer(n, &seq));
            for seed in 0..2 {
                let mut tc = TreeContraction::build(n, &edges, seed).unwrap();
                tc.check_invariants().unwrap();
                for &(u, v, w) in &edges {
                    tc.batch_cut(&[(u, v)]).unwrap();
                    tc.check_consistency().unwrap();
                    tc.batch_link(&[(v, u, w)]).unwrap();
                    tc.check_consistency().unwrap();
                }
            }
        }
    }
}

fn pruefer(n: u32, seq: &[u32]) -> Vec<(u32, u32)> {
    let mut degree = vec![1u32; n as usize];
    for &x in seq {
        degree[x as usize] += 1;
    }
    let mut edges = Vec::new();
    for &x in seq {
        let leaf = (0..n).find(|&v| degree[v as usize] == 1).unwrap();
        edges.push((leaf, x));
        degree[leaf as usize] -= 1;
        degree[x as usize] -= 1;
    }
    let rest: Vec<u32> = (0..n).filter(|&v| degree[v as usize] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

#[test]
fn build_invariants_on_random_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for seed in 0..10 {
        let edges = unweighted(&random_forest(&mut rng, 500, 1.0));
        let tc = TreeContraction::build(500, &edges, seed).unwrap();
        tc.check_invariants().unwrap();
        assert!(tc.restricted().restricted);
        assert!(tc.build_report().total_computations() <= 10 * tc.internal_count() as u64);
    }
}

#[test]
fn parallel_build_matches_sequential() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let edges = unweighted(&random_forest(&mut rng, 3000, 1.0));
    let a = TreeContraction::build(3000, &edges, 6).unwrap();
    let b = TreeContraction::build_with_threads(3000, &edges, 6, 4).unwrap();
    assert_eq!(a.engine().trace(), b.engine().trace());
    assert_eq!(deaths(&a), deaths(&b));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_batches_agree_with_fresh_runs(seed in any::<u64>(), n in 2u32..48, steps in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = random_forest(&mut rng, n, 0.7);
        let mut tc = TreeContraction::build(n, &unweighted(&edges), seed).unwrap();
        for _ in 0..steps {
            // cut a random subset, then link random pairs across components
            let cut: Vec<(u32, u32)> = edges.iter().copied().filter(|_| rng.gen_bool(0.3)).collect();
            edges.retain(|e| !cut.contains(e));
            tc.batch_cut(&cut).unwrap();
            let mut comp = bfs_components(n, &edges);
            let mut link = Vec::new();
            for _ in 0..rng.gen_range(0..n) {
                let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
                let (cu, cv) = (comp[u as usize], comp[v as usize]);
                if cu != cv {
                    comp.iter_mut().filter(|c| **c == cv).for_each(|c| *c = cu);
                    link.push((u, v, rng.gen_range(-9..9)));
                    edges.push((u, v));
                }
            }
            tc.batch_link(&link).unwrap();
            prop_assert_eq!(tc.check_consistency(), Ok(()));
            prop_assert_eq!(tc.check_invariants(), Ok(()));
            assert_components(&tc, &edges);
        }
    }
}
