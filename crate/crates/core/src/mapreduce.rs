//! Dynamic map-reduce over a sequence: a bottom-up reduction tree kept
//! up to date under element updates, with range queries over the stored
//! partial results.

use thiserror::Error;

use crate::engine::{
    check_restricted, ArrayId, Engine, EngineError, LocationKey, Mem, Program, PropagationDelta,
    PropagationReport, RestrictedLimits, RestrictedReport, RunReport,
};
use crate::monoid::Monoid;

const INPUT: ArrayId = ArrayId(0);
const PARTIAL: ArrayId = ArrayId(1);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MapReduceError {
    #[error("index {index} out of range for length {len}")]
    OutOfRange { index: usize, len: usize },
    #[error("range [{i}, {j}] is empty or reversed")]
    BadRange { i: usize, j: usize },
    #[error("index {0} updated twice with different values in one batch")]
    ConflictingUpdate(usize),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Reduction-tree node layout. Node `p` of level `r` covers elements
/// `[p * 2^r, (p + 1) * 2^r)`; its children are nodes `2p` and `2p + 1` of
/// level `r - 1`. Process `p` computes node `p` of every level until it
/// retires, which happens once it is the right child of its parent (or at
/// the root).
#[derive(Clone, Copy, Debug)]
struct Layout {
    n: u32,
    levels: u32,
}

impl Layout {
    fn children(&self, r: u32, p: u32) -> [(u32, u32); 2] {
        debug_assert!(r > 0);
        [(r - 1, 2 * p), (r - 1, 2 * p + 1)]
    }

    fn retires(&self, r: u32, p: u32) -> bool {
        r == self.levels || p >= self.n >> (r + 1)
    }

    /// Where node `p` of level `r` lives: readable from round `r + 1`.
    fn node_key(&self, r: u32, p: u32) -> LocationKey {
        LocationKey::new(PARTIAL, r + 1, p, 0)
    }
}

#[derive(Clone)]
pub struct ReduceProgram<M: Monoid, F> {
    monoid: M,
    map: F,
    layout: Layout,
    len: u32,
}

impl<M, F> Program for ReduceProgram<M, F>
where
    M: Monoid,
    F: Fn(&M::T) -> M::T + Send + Sync,
{
    type Value = M::T;

    fn name(&self) -> &str {
        "map-reduce"
    }

    fn compute_round(&self, mem: &mut Mem<'_, M::T>) -> Result<(), EngineError> {
        let (r, p) = (mem.round(), mem.pid());
        let value = if r == 0 {
            if p < self.len {
                (self.map)(mem.read(LocationKey::new(INPUT, 0, p, 0))?)
            } else {
                self.monoid.identity()
            }
        } else {
            let [a, b] = self.layout.children(r, p);
            let a = mem.read(self.layout.node_key(a.0, a.1))?;
            let b = mem.read(self.layout.node_key(b.0, b.1))?;
            self.monoid.combine(a, b)
        };
        mem.write(self.layout.node_key(r, p), value)?;
        if self.layout.retires(r, p) {
            mem.retire();
        }
        Ok(())
    }
}

/// A sequence with a maintained reduction `f(a_0) ⊕ f(a_1) ⊕ ...`.
pub struct MapReduce<M: Monoid, F = fn(&<M as Monoid>::T) -> <M as Monoid>::T>
where
    F: Fn(&M::T) -> M::T + Send + Sync,
{
    engine: Engine<ReduceProgram<M, F>>,
    build: RunReport,
}

fn identity_map<T: Clone>(x: &T) -> T {
    x.clone()
}

impl<M: Monoid> MapReduce<M> {
    /// Builds with `f` the identity.
    pub fn new(values: Vec<M::T>, monoid: M) -> Result<Self, MapReduceError> {
        Self::with_map(values, monoid, identity_map::<M::T>)
    }
}

impl<M, F> MapReduce<M, F>
where
    M: Monoid,
    F: Fn(&M::T) -> M::T + Send + Sync + Clone,
{
    /// Pads to a power of two with the identity and runs the initial
    /// reduction.
    pub fn with_map(values: Vec<M::T>, monoid: M, map: F) -> Result<Self, MapReduceError> {
        Self::build(values, monoid, map, 1)
    }

    pub fn build(
        values: Vec<M::T>,
        monoid: M,
        map: F,
        threads: usize,
    ) -> Result<Self, MapReduceError> {
        let len = values.len() as u32;
        let n = if len == 0 { 0 } else { len.next_power_of_two() };
        let levels = n.max(1).trailing_zeros();
        let program = ReduceProgram {
            monoid,
            map,
            layout: Layout { n, levels },
            len,
        };
        let mut engine = Engine::new(program);
        engine.set_threads(threads)?;
        for (i, v) in values.into_iter().enumerate() {
            engine
                .store_mut()
                .set_input(LocationKey::new(INPUT, 0, i as u32, 0), v)?;
        }
        let build = engine.run(0..n)?;
        Ok(MapReduce { engine, build })
    }

    pub fn len(&self) -> usize {
        self.engine.program().len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Padded length.
    pub fn padded_len(&self) -> usize {
        self.engine.program().layout.n as usize
    }

    pub fn build_report(&self) -> &RunReport {
        &self.build
    }

    pub fn engine(&self) -> &Engine<ReduceProgram<M, F>> {
        &self.engine
    }

    pub fn get(&self, index: usize) -> Result<&M::T, MapReduceError> {
        self.check_index(index)?;
        Ok(self
            .engine
            .store()
            .get(&LocationKey::new(INPUT, 0, index as u32, 0))
            .expect("input present"))
    }

    fn check_index(&self, index: usize) -> Result<(), MapReduceError> {
        if index >= self.len() {
            return Err(MapReduceError::OutOfRange {
                index,
                len: self.len(),
            });
        }
        Ok(())
    }

    fn node(&self, r: u32, p: u32) -> &M::T {
        let key = self.engine.program().layout.node_key(r, p);
        self.engine
            .store()
            .get(&key)
            .expect("reduction node present")
    }

    /// Rewrites a batch of elements and propagates. Repeated indices must
    /// carry equal values.
    pub fn update(&mut self, batch: &[(usize, M::T)]) -> Result<PropagationReport, MapReduceError> {
        let mut sorted: Vec<&(usize, M::T)> = batch.iter().collect();
        sorted.sort_by_key(|(i, _)| *i);
        for w in sorted.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 != w[1].1 {
                return Err(MapReduceError::ConflictingUpdate(w[0].0));
            }
        }
        for (i, _) in batch {
            self.check_index(*i)?;
        }
        let mut delta = PropagationDelta::default();
        for (i, v) in sorted {
            let key = LocationKey::new(INPUT, 0, *i as u32, 0);
            if self.engine.store_mut().set_input(key, v.clone())? {
                delta.changed.push(key);
            }
        }
        Ok(self.engine.propagate(&delta)?)
    }

    /// `f(a_0) ⊕ ... ⊕ f(a_{len-1})`.
    pub fn total(&self) -> M::T {
        let layout = self.engine.program().layout;
        if layout.n == 0 {
            return self.engine.program().monoid.identity();
        }
        self.node(layout.levels, 0).clone()
    }

    /// `f(a_i) ⊕ ... ⊕ f(a_j)`, inclusive, from the canonical node cover.
    pub fn range(&self, i: usize, j: usize) -> Result<M::T, MapReduceError> {
        if i > j {
            return Err(MapReduceError::BadRange { i, j });
        }
        self.check_index(j)?;
        let m = &self.engine.program().monoid;
        let (mut lo, mut hi) = (i as u32, j as u32 + 1);
        let (mut left, mut right) = (m.identity(), m.identity());
        let mut r = 0;
        while lo < hi {
            if lo & 1 == 1 {
                left = m.combine(&left, self.node(r, lo));
                lo += 1;
            }
            if hi & 1 == 1 {
                hi -= 1;
                right = m.combine(self.node(r, hi), &right);
            }
            lo >>= 1;
            hi >>= 1;
            r += 1;
        }
        Ok(m.combine(&left, &right))
    }

    pub fn restricted(&self) -> RestrictedReport {
        check_restricted(
            self.engine.trace(),
            self.engine.store(),
            RestrictedLimits::default(),
        )
    }

    /// Compares the maintained state against a from-scratch run.
    pub fn check_consistency(&self) -> Result<(), String> {
        self.engine.check_against_replay()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monoid::{MatMul, Max, Min, Sum};
    use proptest::prelude::*;

    #[test]
    fn four_elements() {
        let mr = MapReduce::new(vec![1, 2, 3, 4], Sum).unwrap();
        assert_eq!(mr.total(), 10);
        assert_eq!(mr.build_report().rounds, 3);
        assert_eq!(mr.build_report().total_computations(), 7);
        // level 2, node 0 holds the total
        assert_eq!(mr.node(2, 0), &10);
        assert_eq!(mr.node(1, 0), &3);
        assert_eq!(mr.node(1, 1), &7);
    }

    #[test]
    fn singleton_and_padding() {
        assert_eq!(MapReduce::new(vec![5], Sum).unwrap().total(), 5);
        let mr = MapReduce::new(vec![1, 2, 3], Sum).unwrap();
        assert_eq!(mr.padded_len(), 4);
        assert_eq!(mr.total(), 6);
        let empty = MapReduce::new(vec![], Sum).unwrap();
        assert_eq!(empty.total(), 0);
        assert_eq!(empty.build_report().rounds, 0);
    }

    #[test]
    fn update_and_ranges() {
        let mut mr = MapReduce::new(vec![1, 2, 3, 4], Sum).unwrap();
        mr.update(&[(2, 7)]).unwrap();
        assert_eq!(mr.total(), 14);
        assert_eq!(mr.range(2, 2).unwrap(), 7);
        assert_eq!(mr.range(0, 3).unwrap(), 14);
        assert_eq!(mr.range(1, 2).unwrap(), 9);
        assert_eq!(MapReduce::new(vec![3, 1, 4, 1], Max).unwrap().total(), 4);
    }

    #[test]
    fn single_update_touches_one_path() {
        let mut mr = MapReduce::new(vec![1; 8], Sum).unwrap();
        let rep = mr.update(&[(5, 3)]).unwrap();
        assert_eq!(mr.total(), 10);
        assert_eq!(rep.affected_total(), 4);
        assert_eq!(rep.executed_per_round, vec![1, 1, 1, 1]);
        assert!(mr.update(&[]).unwrap().affected_total() == 0);
        // same value again: suppressed
        assert_eq!(mr.update(&[(5, 3)]).unwrap().affected_total(), 0);
    }

    #[test]
    fn full_update_bounded_by_build() {
        let mut mr = MapReduce::new(vec![0; 16], Sum).unwrap();
        let batch: Vec<_> = (0..16).map(|i| (i, i as i64)).collect();
        let rep = mr.update(&batch).unwrap();
        assert!(rep.affected_total() <= 32);
        assert_eq!(mr.total(), 120);
    }

    #[test]
    fn errors() {
        let mut mr = MapReduce::new(vec![1, 2, 3], Sum).unwrap();
        assert_eq!(
            mr.update(&[(3, 1)]).unwrap_err(),
            MapReduceError::OutOfRange { index: 3, len: 3 }
        );
        assert_eq!(
            mr.update(&[(1, 1), (1, 2)]).unwrap_err(),
            MapReduceError::ConflictingUpdate(1)
        );
        assert!(mr.update(&[(1, 5), (1, 5)]).is_ok());
        assert_eq!(
            mr.range(2, 1).unwrap_err(),
            MapReduceError::BadRange { i: 2, j: 1 }
        );
        assert!(mr.range(0, 3).is_err());
    }

    #[test]
    fn map_function_applies() {
        let mr = MapReduce::with_map(vec![1, 2, 3], Sum, |x: &i64| x * x).unwrap();
        assert_eq!(mr.total(), 14);
        assert_eq!(mr.range(1, 2).unwrap(), 13);
    }

    #[test]
    fn restricted_reads() {
        let mr = MapReduce::new((0..64).collect(), Min).unwrap();
        let rep = mr.restricted();
        assert!(rep.restricted);
        assert!(rep.max_reads <= 2);
    }

    fn direct_fold<M: Monoid>(m: &M, xs: &[M::T]) -> M::T {
        m.fold(xs.iter())
    }

    proptest! {
        #[test]
        fn matches_direct_fold(
            values in prop::collection::vec(any::<[u64; 4]>(), 1..40),
            updates in prop::collection::vec((any::<prop::sample::Index>(), any::<[u64; 4]>()), 0..10),
        ) {
            let mut mr = MapReduce::new(values.clone(), MatMul).unwrap();
            let mut oracle = values;
            let batch: Vec<_> = updates.iter().map(|(i, v)| (i.index(oracle.len()), *v)).collect();
            let mut seen = std::collections::HashMap::new();
            let batch: Vec<_> = batch.into_iter().filter(|(i, _)| seen.insert(*i, ()).is_none()).collect();
            for (i, v) in &batch {
                oracle[*i] = *v;
            }
            mr.update(&batch).unwrap();
            prop_assert_eq!(mr.total(), direct_fold(&MatMul, &oracle));
            for i in 0..oracle.len() {
                for j in i..oracle.len() {
                    prop_assert_eq!(mr.range(i, j).unwrap(), direct_fold(&MatMul, &oracle[i..=j]));
                }
            }
            mr.check_consistency().unwrap();
        }

        #[test]
        fn update_cost_between_one_and_k_paths(
            log_n in 1u32..9,
            picks in prop::collection::vec(any::<prop::sample::Index>(), 1..8),
        ) {
            let n = 1usize << log_n;
            let mut mr = MapReduce::new(vec![0i64; n], Sum).unwrap();
            let mut idx: Vec<usize> = picks.iter().map(|i| i.index(n)).collect();
            idx.sort_unstable();
            idx.dedup();
            let batch: Vec<_> = idx.iter().map(|&i| (i, 1 + i as i64)).collect();
            let cost = mr.update(&batch).unwrap().affected_total();
            let path = log_n as u64 + 1;
            prop_assert!(cost >= path && cost <= batch.len() as u64 * path);
        }
    }
}
