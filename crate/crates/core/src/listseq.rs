//! Batch-dynamic sequences on top of randomized list contraction.
//!
//! Every round, a node with a right neighbor splices itself out when its
//! coin lands heads and its right neighbor's lands tails; an isolated node
//! finalizes. Tails never splice, so each list contracts into its tail.
//!
//! Each live node `x` also carries `acc[i][x]`, the fold of the original
//! values from `x` up to (excluding) its current right neighbor. Whoever
//! writes `R[i+1][x]` also writes `acc[i+1][x]`, which keeps both arrays
//! single-writer.

use petgraph::unionfind::UnionFind;
use thiserror::Error;

use crate::coin::CoinOracle;
use crate::engine::{
    check_restricted, ArrayId, CompId, Engine, EngineError, LocationKey, Mem, Program,
    PropagationDelta, PropagationReport, RestrictedLimits, RestrictedReport, Round, RunReport,
};
use crate::monoid::Monoid;

const LEFT: ArrayId = ArrayId(0);
const RIGHT: ArrayId = ArrayId(1);
const ACC: ArrayId = ArrayId(2);
const DEATH: ArrayId = ArrayId(3);

fn left_key(i: Round, u: u32) -> LocationKey {
    LocationKey::new(LEFT, i, u, 0)
}
fn right_key(i: Round, u: u32) -> LocationKey {
    LocationKey::new(RIGHT, i, u, 0)
}
fn acc_key(i: Round, u: u32) -> LocationKey {
    LocationKey::new(ACC, i, u, 0)
}
fn death_key(u: u32) -> LocationKey {
    LocationKey::unrounded(DEATH, u, 0)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ListValue<T> {
    Link(Option<u32>),
    Acc(T),
    Death(Round),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ListError {
    #[error("unknown node {0}")]
    UnknownNode(u32),
    #[error("links disagree: {0}.next = {1} but {1}.prev differs")]
    Inconsistent(u32, u32),
    #[error("links through node {0} form a cycle")]
    Cycle(u32),
    #[error("node {0} has no successor to split from")]
    AlreadyTail(u32),
    #[error("node {0} is not the last element of its sequence")]
    NotTail(u32),
    #[error("node {0} is not the first element of its sequence")]
    NotHead(u32),
    #[error("node {0} appears in more than one pair")]
    DuplicateEndpoint(u32),
    #[error("node {0} is given two different values")]
    ConflictingValue(u32),
    #[error("nodes {0} and {1} are in different sequences")]
    DifferentLists(u32, u32),
    #[error("node {1} comes before node {0}")]
    Reversed(u32, u32),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// One input element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeqNode<T> {
    pub prev: Option<u32>,
    pub next: Option<u32>,
    pub value: T,
}

#[derive(Clone)]
pub struct ListProgram<M> {
    monoid: M,
    coin: CoinOracle,
}

type LMem<'a, T> = Mem<'a, ListValue<T>>;

fn read_link<T: Clone + PartialEq + std::fmt::Debug>(
    mem: &mut LMem<'_, T>,
    key: LocationKey,
) -> Result<Option<u32>, EngineError> {
    match mem.read(key)? {
        ListValue::Link(l) => Ok(*l),
        other => Err(mem.fail(format!("{key} holds {other:?}, expected a link"))),
    }
}

fn read_acc<'a, T: Clone + PartialEq + std::fmt::Debug>(
    mem: &mut LMem<'a, T>,
    key: LocationKey,
) -> Result<&'a T, EngineError> {
    match mem.read(key)? {
        ListValue::Acc(a) => Ok(a),
        other => Err(mem.fail(format!("{key} holds {other:?}, expected an accumulator"))),
    }
}

impl<M: Monoid> ListProgram<M> {
    fn stay_alive(
        &self,
        mem: &mut LMem<'_, M::T>,
        left: Option<u32>,
        right: Option<u32>,
    ) -> Result<(), EngineError> {
        let (i, u) = (mem.round(), mem.pid());
        match right {
            Some(r) => mem.write(left_key(i + 1, r), ListValue::Link(Some(u)))?,
            None => {
                mem.write(right_key(i + 1, u), ListValue::Link(None))?;
                let acc = read_acc(mem, acc_key(i, u))?.clone();
                mem.write(acc_key(i + 1, u), ListValue::Acc(acc))?;
            }
        }
        match left {
            Some(l) => {
                mem.write(right_key(i + 1, l), ListValue::Link(Some(u)))?;
                let acc = read_acc(mem, acc_key(i, l))?.clone();
                mem.write(acc_key(i + 1, l), ListValue::Acc(acc))?;
            }
            None => mem.write(left_key(i + 1, u), ListValue::Link(None))?,
        }
        Ok(())
    }
}

impl<M: Monoid> Program for ListProgram<M> {
    type Value = ListValue<M::T>;

    fn name(&self) -> &str {
        "list-contraction"
    }

    fn compute_round(&self, mem: &mut LMem<'_, M::T>) -> Result<(), EngineError> {
        let (i, u) = (mem.round(), mem.pid());
        let left = read_link(mem, left_key(i, u))?;
        let right = read_link(mem, right_key(i, u))?;
        match right {
            Some(r) if self.coin.heads(i, u) && !self.coin.heads(i, r) => {
                mem.write(left_key(i + 1, r), ListValue::Link(left))?;
                if let Some(l) = left {
                    mem.write(right_key(i + 1, l), ListValue::Link(Some(r)))?;
                    let mine = read_acc(mem, acc_key(i, u))?;
                    let theirs = read_acc(mem, acc_key(i, l))?;
                    mem.write(
                        acc_key(i + 1, l),
                        ListValue::Acc(self.monoid.combine(theirs, mine)),
                    )?;
                }
                mem.write(death_key(u), ListValue::Death(i))?;
                mem.retire();
            }
            Some(_) => self.stay_alive(mem, left, right)?,
            None if left.is_none() => {
                mem.write(death_key(u), ListValue::Death(i))?;
                mem.retire();
            }
            None => self.stay_alive(mem, left, right)?,
        }
        Ok(())
    }
}

/// A set of disjoint sequences over nodes `0..n`, with values folded by `M`.
pub struct Sequences<M: Monoid> {
    engine: Engine<ListProgram<M>>,
    n: u32,
    build: RunReport,
}

impl<M: Monoid> Sequences<M> {
    /// Builds from explicit prev/next links. `nodes[u]` describes node `u`.
    pub fn build(nodes: Vec<SeqNode<M::T>>, monoid: M, seed: u64) -> Result<Self, ListError> {
        Self::build_with_threads(nodes, monoid, seed, 1)
    }

    pub fn build_with_threads(
        nodes: Vec<SeqNode<M::T>>,
        monoid: M,
        seed: u64,
        threads: usize,
    ) -> Result<Self, ListError> {
        validate_links(&nodes)?;
        let n = nodes.len() as u32;
        let mut engine = Engine::new(ListProgram {
            monoid,
            coin: CoinOracle::new(seed),
        });
        engine.set_threads(threads)?;
        for (u, node) in nodes.into_iter().enumerate() {
            let u = u as u32;
            let store = engine.store_mut();
            store.set_input(left_key(0, u), ListValue::Link(node.prev))?;
            store.set_input(right_key(0, u), ListValue::Link(node.next))?;
            store.set_input(acc_key(0, u), ListValue::Acc(node.value))?;
        }
        let build = engine.run(0..n)?;
        Ok(Sequences { engine, n, build })
    }

    /// Builds one sequence per chain, each chain listing node ids in order.
    /// Every id in `0..n` must appear exactly once across all chains.
    pub fn from_chains(
        chains: &[Vec<(u32, M::T)>],
        monoid: M,
        seed: u64,
    ) -> Result<Self, ListError> {
        Self::from_chains_with_threads(chains, monoid, seed, 1)
    }

    pub fn from_chains_with_threads(
        chains: &[Vec<(u32, M::T)>],
        monoid: M,
        seed: u64,
        threads: usize,
    ) -> Result<Self, ListError> {
        let n: usize = chains.iter().map(Vec::len).sum();
        let mut nodes: Vec<Option<SeqNode<M::T>>> = vec![None; n];
        for chain in chains {
            for (k, (id, value)) in chain.iter().enumerate() {
                let slot = nodes
                    .get_mut(*id as usize)
                    .ok_or(ListError::UnknownNode(*id))?;
                if slot.is_some() {
                    return Err(ListError::DuplicateEndpoint(*id));
                }
                *slot = Some(SeqNode {
                    prev: (k > 0).then(|| chain[k - 1].0),
                    next: chain.get(k + 1).map(|x| x.0),
                    value: value.clone(),
                });
            }
        }
        let nodes = nodes
            .into_iter()
            .map(|x| x.expect("all ids covered"))
            .collect();
        Self::build_with_threads(nodes, monoid, seed, threads)
    }

    pub fn len(&self) -> usize {
        self.n as usize
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn build_report(&self) -> &RunReport {
        &self.build
    }

    pub fn engine(&self) -> &Engine<ListProgram<M>> {
        &self.engine
    }

    pub fn rounds(&self) -> Round {
        self.engine.trace().rounds_executed()
    }

    fn check(&self, u: u32) -> Result<(), ListError> {
        if u >= self.n {
            return Err(ListError::UnknownNode(u));
        }
        Ok(())
    }

    fn link(&self, key: LocationKey) -> Option<u32> {
        match self.engine.store().get(&key) {
            Some(ListValue::Link(l)) => *l,
            other => panic!("{key}: expected a link, found {other:?}"),
        }
    }

    fn acc(&self, i: Round, u: u32) -> &M::T {
        match self.engine.store().get(&acc_key(i, u)) {
            Some(ListValue::Acc(a)) => a,
            other => panic!("acc[{i}][{u}]: expected an accumulator, found {other:?}"),
        }
    }

    /// Left neighbor of `u` at round `i` (as seen by `u`).
    pub fn left_at(&self, i: Round, u: u32) -> Option<u32> {
        self.link(left_key(i, u))
    }

    /// Right neighbor of `u` at round `i` (as seen by `u`).
    pub fn right_at(&self, i: Round, u: u32) -> Option<u32> {
        self.link(right_key(i, u))
    }

    /// Round in which `u` spliced out or finalized.
    pub fn death(&self, u: u32) -> Round {
        match self.engine.store().get(&death_key(u)) {
            Some(ListValue::Death(d)) => *d,
            other => panic!("death[{u}]: found {other:?}"),
        }
    }

    pub fn next(&self, u: u32) -> Result<Option<u32>, ListError> {
        self.check(u)?;
        Ok(self.right_at(0, u))
    }

    pub fn prev(&self, u: u32) -> Result<Option<u32>, ListError> {
        self.check(u)?;
        Ok(self.left_at(0, u))
    }

    pub fn value(&self, u: u32) -> Result<&M::T, ListError> {
        self.check(u)?;
        Ok(self.acc(0, u))
    }

    /// The node `u`'s sequence contracts into (its last element).
    pub fn representative(&self, u: u32) -> Result<u32, ListError> {
        self.check(u)?;
        let mut x = u;
        loop {
            let d = self.death(x);
            match self.right_at(d, x) {
                Some(r) => x = r,
                None => return Ok(x),
            }
        }
    }

    pub fn same_list(&self, u: u32, v: u32) -> Result<bool, ListError> {
        Ok(self.representative(u)? == self.representative(v)?)
    }

    /// Breaks each sequence right after each given node.
    pub fn batch_split(&mut self, nodes: &[u32]) -> Result<PropagationReport, ListError> {
        let mut nodes = nodes.to_vec();
        nodes.sort_unstable();
        nodes.dedup();
        let mut cuts = Vec::with_capacity(nodes.len());
        for &u in &nodes {
            self.check(u)?;
            let r = self.right_at(0, u).ok_or(ListError::AlreadyTail(u))?;
            cuts.push((u, r));
        }
        let mut delta = PropagationDelta::default();
        for (u, r) in cuts {
            self.set_input(&mut delta, right_key(0, u), ListValue::Link(None))?;
            self.set_input(&mut delta, left_key(0, r), ListValue::Link(None))?;
        }
        Ok(self.engine.propagate(&delta)?)
    }

    /// Appends, for each `(u, v)`, the sequence starting at `v` after the
    /// sequence ending at `u`.
    pub fn batch_join(&mut self, pairs: &[(u32, u32)]) -> Result<PropagationReport, ListError> {
        let mut tails: Vec<u32> = pairs.iter().map(|p| p.0).collect();
        let mut heads: Vec<u32> = pairs.iter().map(|p| p.1).collect();
        for v in [&mut tails, &mut heads] {
            v.sort_unstable();
            if let Some(w) = v.windows(2).find(|w| w[0] == w[1]) {
                return Err(ListError::DuplicateEndpoint(w[0]));
            }
        }
        let mut sets = UnionFind::<usize>::new(self.n as usize);
        for &(u, v) in pairs {
            self.check(u)?;
            self.check(v)?;
            if self.right_at(0, u).is_some() {
                return Err(ListError::NotTail(u));
            }
            if self.left_at(0, v).is_some() {
                return Err(ListError::NotHead(v));
            }
            // u is a tail, so it is its own representative
            let rv = self.representative(v)?;
            if !sets.union(u as usize, rv as usize) {
                return Err(ListError::Cycle(u));
            }
        }
        let mut delta = PropagationDelta::default();
        for &(u, v) in pairs {
            self.set_input(&mut delta, right_key(0, u), ListValue::Link(Some(v)))?;
            self.set_input(&mut delta, left_key(0, v), ListValue::Link(Some(u)))?;
        }
        Ok(self.engine.propagate(&delta)?)
    }

    pub fn batch_update_value(
        &mut self,
        pairs: &[(u32, M::T)],
    ) -> Result<PropagationReport, ListError> {
        let mut sorted: Vec<&(u32, M::T)> = pairs.iter().collect();
        sorted.sort_by_key(|p| p.0);
        for w in sorted.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 != w[1].1 {
                return Err(ListError::ConflictingValue(w[0].0));
            }
        }
        for (u, _) in pairs {
            self.check(*u)?;
        }
        let mut delta = PropagationDelta::default();
        for (u, value) in sorted {
            self.set_input(&mut delta, acc_key(0, *u), ListValue::Acc(value.clone()))?;
        }
        Ok(self.engine.propagate(&delta)?)
    }

    fn set_input(
        &mut self,
        delta: &mut PropagationDelta,
        key: LocationKey,
        value: ListValue<M::T>,
    ) -> Result<(), ListError> {
        if self.engine.store_mut().set_input(key, value)? {
            delta.changed.push(key);
        }
        Ok(())
    }

    /// Fold over the inclusive subsequence from `u` to `v`.
    pub fn query(&self, u: u32, v: u32) -> Result<M::T, ListError> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Ok(self.acc(0, u).clone());
        }
        if !self.same_list(u, v)? {
            return Err(ListError::DifferentLists(u, v));
        }
        let m = &self.engine.program().monoid;
        // front: suffix = fold of [u, front); back: prefix = fold of [back, v]
        let mut front = self.right_at(0, u).ok_or(ListError::Reversed(u, v))?;
        let mut suffix = self.acc(0, u).clone();
        let mut back = v;
        let mut prefix = self.acc(0, v).clone();
        let mut i: Round = 0;
        while front != back {
            let front_right = self.right_at(i, front);
            let Some(fr) = front_right else {
                return Err(ListError::Reversed(u, v));
            };
            // both may splice in one round, but never into each other
            let back_dies = self.death(back) == i;
            if self.death(front) == i {
                suffix = m.combine(&suffix, self.acc(i, front));
                front = fr;
            }
            if back_dies {
                let Some(bl) = self.left_at(i, back) else {
                    return Err(ListError::Reversed(u, v));
                };
                prefix = m.combine(self.acc(i, bl), &prefix);
                back = bl;
            }
            i += 1;
        }
        Ok(m.combine(&suffix, &prefix))
    }

    pub fn batch_query_value(&self, pairs: &[(u32, u32)]) -> Result<Vec<M::T>, ListError> {
        pairs.iter().map(|&(u, v)| self.query(u, v)).collect()
    }

    pub fn restricted(&self) -> RestrictedReport {
        check_restricted(
            self.engine.trace(),
            self.engine.store(),
            RestrictedLimits::default(),
        )
    }

    pub fn check_consistency(&self) -> Result<(), String> {
        self.engine.check_against_replay()
    }

    /// Per-round audit of the contraction record: links of live nodes are
    /// mutual, and no two adjacent nodes splice out in the same round.
    pub fn check_shape(&self) -> Result<(), String> {
        let trace = self.engine.trace();
        for i in 0..trace.rounds_executed() {
            for u in trace.processes_at(i) {
                if let Some(r) = self.right_at(i, u) {
                    if trace.record(CompId::new(i, r)).is_none() || self.left_at(i, r) != Some(u) {
                        return Err(format!("round {i}: {u}.right = {r} is not mutual"));
                    }
                    if self.death(u) == i && self.death(r) == i && self.right_at(i, r).is_some() {
                        return Err(format!("round {i}: adjacent {u} and {r} both splice"));
                    }
                }
                if let Some(l) = self.left_at(i, u) {
                    if trace.record(CompId::new(i, l)).is_none() || self.right_at(i, l) != Some(u) {
                        return Err(format!("round {i}: {u}.left = {l} is not mutual"));
                    }
                }
                if self.death(u) == i
                    && self.right_at(i, u).is_none()
                    && self.left_at(i, u).is_some()
                {
                    return Err(format!("round {i}: tail {u} died"));
                }
            }
        }
        Ok(())
    }
}

fn validate_links<T>(nodes: &[SeqNode<T>]) -> Result<(), ListError> {
    let n = nodes.len() as u32;
    for (u, node) in nodes.iter().enumerate() {
        let u = u as u32;
        for x in [node.prev, node.next].into_iter().flatten() {
            if x >= n {
                return Err(ListError::UnknownNode(x));
            }
            if x == u {
                return Err(ListError::Cycle(u));
            }
        }
        if let Some(v) = node.next {
            if nodes[v as usize].prev != Some(u) {
                return Err(ListError::Inconsistent(u, v));
            }
        }
        if let Some(p) = node.prev {
            if nodes[p as usize].next != Some(u) {
                return Err(ListError::Inconsistent(p, u));
            }
        }
    }
    // with mutual links, a walk from every head covers every acyclic node
    let mut seen = vec![false; nodes.len()];
    for (h, node) in nodes.iter().enumerate() {
        if node.prev.is_some() {
            continue;
        }
        let mut x = Some(h as u32);
        while let Some(u) = x {
            seen[u as usize] = true;
            x = nodes[u as usize].next;
        }
    }
    match seen.iter().position(|s| !s) {
        Some(u) => Err(ListError::Cycle(u as u32)),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monoid::{MatMul, Sum};
    use proptest::prelude::*;

    fn chain(ids: &[u32]) -> Vec<(u32, i64)> {
        ids.iter().map(|&u| (u, u as i64 + 1)).collect()
    }

    #[test]
    fn singleton_finalizes_immediately() {
        let s = Sequences::from_chains(&[chain(&[0])], Sum, 1).unwrap();
        assert_eq!(s.death(0), 0);
        assert_eq!(s.rounds(), 1);
    }

    #[test]
    fn two_chain_splices_head_then_tail_finalizes() {
        for seed in 0..20 {
            let s = Sequences::from_chains(&[chain(&[0, 1])], Sum, seed).unwrap();
            let coin = CoinOracle::new(seed);
            let first = (0..)
                .find(|&r| coin.heads(r, 0) && !coin.heads(r, 1))
                .unwrap();
            assert_eq!(s.death(0), first);
            assert_eq!(s.death(1), first + 1);
        }
    }

    #[test]
    fn empty_input() {
        let s = Sequences::<Sum>::build(vec![], Sum, 0).unwrap();
        assert_eq!(s.rounds(), 0);
    }

    #[test]
    fn bad_links_rejected() {
        let nodes = vec![
            SeqNode {
                prev: None,
                next: Some(1),
                value: 0,
            },
            SeqNode {
                prev: None,
                next: None,
                value: 0,
            },
        ];
        assert_eq!(
            Sequences::build(nodes, Sum, 0).err(),
            Some(ListError::Inconsistent(0, 1))
        );
        let cyc = vec![
            SeqNode {
                prev: Some(1),
                next: Some(1),
                value: 0,
            },
            SeqNode {
                prev: Some(0),
                next: Some(0),
                value: 0,
            },
        ];
        assert!(matches!(
            Sequences::build(cyc, Sum, 0).err(),
            Some(ListError::Cycle(_))
        ));
    }

    #[test]
    fn split_join_and_query() {
        let mut s = Sequences::from_chains(&[chain(&[0, 1, 2])], Sum, 3).unwrap();
        assert_eq!(s.query(0, 2).unwrap(), 6);
        s.batch_split(&[1]).unwrap();
        assert!(!s.same_list(0, 2).unwrap());
        assert!(s.same_list(0, 1).unwrap());
        assert_eq!(s.batch_split(&[1]).unwrap_err(), ListError::AlreadyTail(1));
        assert!(s.batch_join(&[(2, 0)]).unwrap().affected_total() > 0);
        assert_eq!(s.query(2, 1).unwrap(), 6);
        assert_eq!(s.query(0, 1).unwrap(), 3);
        assert_eq!(s.query(0, 2).unwrap_err(), ListError::Reversed(0, 2));
        assert_eq!(s.batch_join(&[(1, 2)]).unwrap_err(), ListError::Cycle(1));
        s.check_consistency().unwrap();
        s.check_shape().unwrap();
    }

    #[test]
    fn split_everything_isolates() {
        let ids: Vec<u32> = (0..8).collect();
        let mut s = Sequences::from_chains(&[chain(&ids)], Sum, 5).unwrap();
        s.batch_split(&ids[..7]).unwrap();
        for u in 0..8 {
            assert_eq!(s.death(u), 0);
        }
        s.check_consistency().unwrap();
    }

    #[test]
    fn batch_join_cycle_through_batch() {
        let mut s = Sequences::from_chains(&[chain(&[0, 1]), chain(&[2, 3])], Sum, 5).unwrap();
        assert_eq!(
            s.batch_join(&[(1, 2), (3, 0)]).unwrap_err(),
            ListError::Cycle(3)
        );
        assert!(s.batch_join(&[(1, 2)]).is_ok());
    }

    #[test]
    fn equal_value_update_is_free() {
        let mut s = Sequences::from_chains(&[chain(&[0, 1, 2, 3])], Sum, 9).unwrap();
        assert_eq!(s.batch_update_value(&[(2, 3)]).unwrap().affected_total(), 0);
        assert!(s.batch_update_value(&[(2, 30)]).unwrap().affected_total() > 0);
        assert_eq!(s.query(0, 3).unwrap(), 1 + 2 + 30 + 4);
    }

    #[test]
    fn restricted() {
        let ids: Vec<u32> = (0..200).collect();
        let s = Sequences::from_chains(&[chain(&ids)], Sum, 2).unwrap();
        let rep = s.restricted();
        assert!(rep.restricted, "{rep:?}");
        assert!(rep.max_reads <= 4);
    }

    /// Sequences as plain vectors of node ids.
    fn model_fold(lists: &[Vec<u32>], vals: &[[u64; 4]], u: u32, v: u32) -> Option<[u64; 4]> {
        for l in lists {
            let a = l.iter().position(|&x| x == u);
            let b = l.iter().position(|&x| x == v);
            if let (Some(a), Some(b)) = (a, b) {
                if a > b {
                    return None;
                }
                return Some(MatMul.fold(l[a..=b].iter().map(|&x| &vals[x as usize])));
            }
        }
        None
    }

    proptest! {
        #[test]
        fn queries_match_model(
            n in 1usize..30,
            seed in any::<u64>(),
            cuts in prop::collection::vec(any::<prop::sample::Index>(), 0..6),
            vals in prop::collection::vec(any::<[u64; 4]>(), 30),
        ) {
            // one chain 0..n split at random places
            let mut split_after: Vec<u32> = cuts.iter().map(|c| c.index(n) as u32).filter(|&c| c + 1 < n as u32).collect();
            split_after.sort_unstable();
            split_after.dedup();
            let ids: Vec<(u32, [u64; 4])> = (0..n as u32).map(|u| (u, vals[u as usize])).collect();
            let mut s = Sequences::from_chains(&[ids], MatMul, seed).unwrap();
            s.batch_split(&split_after).unwrap();
            s.check_consistency().unwrap();
            s.check_shape().unwrap();
            let mut lists = vec![];
            let mut cur = vec![];
            for u in 0..n as u32 {
                cur.push(u);
                if split_after.contains(&u) || u + 1 == n as u32 {
                    lists.push(std::mem::take(&mut cur));
                }
            }
            for u in 0..n as u32 {
                for v in 0..n as u32 {
                    match model_fold(&lists, &vals, u, v) {
                        Some(x) => prop_assert_eq!(s.query(u, v).unwrap(), x),
                        None => prop_assert!(s.query(u, v).is_err()),
                    }
                }
            }
        }
    }
}
