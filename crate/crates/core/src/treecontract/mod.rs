//! Batch-dynamic undirected tree contraction.
//!
//! Vertices of degree above three are split into chains first, so every
//! internal vertex has at most three adjacency slots. Each round a live
//! vertex finalizes (no neighbors), rakes (leaf), compresses (degree two,
//! both neighbors non-leaves, coins heads/tails/tails) or stays alive.
//! Links and cuts rewrite round-0 slots and leaf flags and propagate.

mod forest;
mod program;

use petgraph::unionfind::UnionFind;
use rustc_hash::{FxHashMap, FxHashSet};
use thiserror::Error;

use crate::coin::CoinOracle;
use crate::engine::{
    check_restricted, Engine, EngineError, LocationKey, PropagationDelta, PropagationReport,
    RestrictedLimits, RestrictedReport, Round, RunReport,
};

use forest::ordered;
pub use forest::{RealEdge, ReducedForest, SlotArray};
use program::{adj_key, death_key, leaf_key};
pub use program::{AdjEntry, ContractProgram, Slot, TcValue, SLOTS};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("unknown vertex {0}")]
    UnknownVertex(u32),
    #[error("self-loop at vertex {0}")]
    SelfLoop(u32),
    #[error("edge {0}-{1} listed twice")]
    DuplicateEdge(u32, u32),
    #[error("edge {0}-{1} already exists")]
    EdgeExists(u32, u32),
    #[error("edge {0}-{1} does not exist")]
    MissingEdge(u32, u32),
    #[error("edge {0}-{1} closes a cycle")]
    Cycle(u32, u32),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Outcome of a batch link or cut.
#[derive(Clone, Debug, Default)]
pub struct UpdateReport {
    pub propagation: PropagationReport,
    /// Internal vertices created by chain growth.
    pub created: Vec<u32>,
}

/// What a live vertex did in a given round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Action {
    Finalize,
    Rake,
    Compress,
    Alive,
}

/// A forest over vertices `0..n` under batches of links and cuts.
pub struct TreeContraction {
    engine: Engine<ContractProgram>,
    forest: ReducedForest,
    build: RunReport,
}

fn check_vertex(n: u32, v: u32) -> Result<(), TreeError> {
    if v < n {
        Ok(())
    } else {
        Err(TreeError::UnknownVertex(v))
    }
}

impl TreeContraction {
    /// Builds from an edge list of weighted edges. Weights are carried on
    /// the reduced forest for query layers; contraction ignores them.
    pub fn build(n: u32, edges: &[(u32, u32, i64)], seed: u64) -> Result<Self, TreeError> {
        Self::build_with_threads(n, edges, seed, 1)
    }

    pub fn build_with_threads(
        n: u32,
        edges: &[(u32, u32, i64)],
        seed: u64,
        threads: usize,
    ) -> Result<Self, TreeError> {
        let mut uf = UnionFind::<u32>::new(n as usize);
        let mut seen = FxHashSet::default();
        for &(u, v, _) in edges {
            check_vertex(n, u)?;
            check_vertex(n, v)?;
            if u == v {
                return Err(TreeError::SelfLoop(u));
            }
            if !seen.insert(ordered(u, v)) {
                return Err(TreeError::DuplicateEdge(u, v));
            }
            if !uf.union(u, v) {
                return Err(TreeError::Cycle(u, v));
            }
        }
        let forest = ReducedForest::reduce(n, edges);
        let mut engine = Engine::new(ContractProgram {
            coin: CoinOracle::new(seed),
        });
        engine.set_threads(threads)?;
        for x in 0..forest.internal_count() {
            let store = engine.store_mut();
            for (j, s) in forest.slots(x).iter().enumerate() {
                store.set_input(adj_key(0, x, j), TcValue::Slot(round0_slot(*s)))?;
            }
            store.set_input(leaf_key(0, x), TcValue::Leaf(forest.degree(x) == 1))?;
        }
        let build = engine.run(0..forest.internal_count())?;
        Ok(TreeContraction {
            engine,
            forest,
            build,
        })
    }

    pub fn vertex_count(&self) -> u32 {
        self.forest.original_count()
    }

    pub fn internal_count(&self) -> u32 {
        self.forest.internal_count()
    }

    pub fn forest(&self) -> &ReducedForest {
        &self.forest
    }

    pub fn engine(&self) -> &Engine<ContractProgram> {
        &self.engine
    }

    pub fn build_report(&self) -> &RunReport {
        &self.build
    }

    pub fn rounds(&self) -> Round {
        self.engine.trace().rounds_executed()
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.forest.real_edge(u, v).is_some()
    }

    pub fn edges(&self) -> impl Iterator<Item = &RealEdge> {
        self.forest.real_edges()
    }

    /// Slots of internal vertex `x` at round `i`; `None` if `x` is not live.
    pub fn slots_at(&self, i: Round, x: u32) -> Option<[Slot; SLOTS]> {
        let store = self.engine.store();
        let mut out = [Slot::NULL; SLOTS];
        for (j, s) in out.iter_mut().enumerate() {
            match store.get(&adj_key(i, x, j))? {
                TcValue::Slot(v) => *s = *v,
                _ => return None,
            }
        }
        Some(out)
    }

    pub fn leaf_at(&self, i: Round, x: u32) -> Option<bool> {
        match self.engine.store().get(&leaf_key(i, x))? {
            TcValue::Leaf(l) => Some(*l),
            _ => None,
        }
    }

    /// Round in which internal vertex `x` was deleted.
    pub fn death(&self, x: u32) -> Round {
        match self.engine.store().get(&death_key(x)) {
            Some(TcValue::Death(d)) => *d,
            other => panic!("vertex {x} has no death round: {other:?}"),
        }
    }

    /// What `x` did in round `i`, if it was live then.
    pub fn action(&self, i: Round, x: u32) -> Option<Action> {
        let slots = self.slots_at(i, x)?;
        if self.death(x) != i {
            return Some(Action::Alive);
        }
        Some(match slots.iter().filter(|s| s.edge().is_some()).count() {
            0 => Action::Finalize,
            1 => Action::Rake,
            _ => Action::Compress,
        })
    }

    /// Internal vertex that finalized last in `x`'s component. Equal for
    /// exactly the internal vertices of one component.
    pub fn component_root(&self, mut x: u32) -> u32 {
        loop {
            let d = self.death(x);
            let slots = self.slots_at(d, x).expect("live at its death round");
            match slots.iter().find_map(Slot::edge) {
                Some(e) => x = e.neighbor,
                None => return x,
            }
        }
    }

    /// Component identifier of an original vertex.
    pub fn root_of(&self, v: u32) -> Result<u32, TreeError> {
        check_vertex(self.vertex_count(), v)?;
        Ok(self.component_root(v))
    }

    pub fn batch_link(&mut self, edges: &[(u32, u32, i64)]) -> Result<UpdateReport, TreeError> {
        let n = self.vertex_count();
        let mut seen = FxHashSet::default();
        let mut dense: FxHashMap<u32, u32> = FxHashMap::default();
        let mut ends = Vec::with_capacity(edges.len());
        for &(u, v, _) in edges {
            check_vertex(n, u)?;
            check_vertex(n, v)?;
            if u == v {
                return Err(TreeError::SelfLoop(u));
            }
            if !seen.insert(ordered(u, v)) {
                return Err(TreeError::DuplicateEdge(u, v));
            }
            if self.has_edge(u, v) {
                return Err(TreeError::EdgeExists(u, v));
            }
            let mut id = |r: u32| {
                let k = dense.len() as u32;
                *dense.entry(r).or_insert(k)
            };
            ends.push((id(self.component_root(u)), id(self.component_root(v))));
        }
        let mut uf = UnionFind::<u32>::new(dense.len());
        for (&(u, v, _), &(a, b)) in edges.iter().zip(&ends) {
            if !uf.union(a, b) {
                return Err(TreeError::Cycle(u, v));
            }
        }
        let (mut touched, mut created) = (Vec::new(), Vec::new());
        for &(u, v, w) in edges {
            self.forest.link(u, v, w, &mut touched, &mut created);
        }
        let propagation = self.sync(touched, &created)?;
        Ok(UpdateReport {
            propagation,
            created,
        })
    }

    pub fn batch_cut(&mut self, edges: &[(u32, u32)]) -> Result<UpdateReport, TreeError> {
        let n = self.vertex_count();
        let mut seen = FxHashSet::default();
        for &(u, v) in edges {
            check_vertex(n, u)?;
            check_vertex(n, v)?;
            if !seen.insert(ordered(u, v)) {
                return Err(TreeError::DuplicateEdge(u, v));
            }
            if !self.has_edge(u, v) {
                return Err(TreeError::MissingEdge(u, v));
            }
        }
        let mut touched = Vec::new();
        for &(u, v) in edges {
            self.forest.cut(u, v, &mut touched);
        }
        let propagation = self.sync(touched, &[])?;
        Ok(UpdateReport {
            propagation,
            created: Vec::new(),
        })
    }

    /// Rewrites the round-0 inputs of `touched` vertices, keeping only the
    /// locations whose value actually changed, and propagates.
    fn sync(
        &mut self,
        mut touched: Vec<u32>,
        created: &[u32],
    ) -> Result<PropagationReport, TreeError> {
        touched.sort_unstable();
        touched.dedup();
        let mut delta = PropagationDelta {
            added: created.to_vec(),
            ..Default::default()
        };
        for x in touched {
            let slots = *self.forest.slots(x);
            for (j, s) in slots.iter().enumerate() {
                self.set_input(&mut delta, adj_key(0, x, j), TcValue::Slot(round0_slot(*s)))?;
            }
            let leaf = self.forest.degree(x) == 1;
            self.set_input(&mut delta, leaf_key(0, x), TcValue::Leaf(leaf))?;
        }
        Ok(self.engine.propagate(&delta)?)
    }

    fn set_input(
        &mut self,
        delta: &mut PropagationDelta,
        key: LocationKey,
        value: TcValue,
    ) -> Result<(), TreeError> {
        if self.engine.store_mut().set_input(key, value)? {
            delta.changed.push(key);
        }
        Ok(())
    }

    pub fn restricted(&self) -> RestrictedReport {
        check_restricted(
            self.engine.trace(),
            self.engine.store(),
            RestrictedLimits::default(),
        )
    }

    /// Compares every cell and the trace against a from-scratch run on the
    /// current round-0 inputs.
    pub fn check_consistency(&self) -> Result<(), String> {
        self.engine.check_against_replay()
    }

    /// Live vertex counts per round.
    pub fn live_per_round(&self) -> &[u64] {
        self.engine.trace().computations_per_round()
    }

    /// Fraction of live vertices that survive each round, for every round
    /// that has a successor.
    pub fn survivor_fractions(&self) -> Vec<f64> {
        self.live_per_round()
            .windows(2)
            .map(|w| w[1] as f64 / w[0] as f64)
            .collect()
    }

    /// Audits the contraction record round by round: slot reciprocity
    /// (including the recorded representative), leaf flags, compress
    /// independence, and rake exclusivity among adjacent leaves.
    pub fn check_invariants(&self) -> Result<(), String> {
        self.forest.check()?;
        let trace = self.engine.trace();
        for x in 0..self.internal_count() {
            let s = self
                .slots_at(0, x)
                .ok_or(format!("vertex {x} has no round-0 slots"))?;
            if s.map(|s| s.edge().map(|e| (e.neighbor, e.back))) != *self.forest.slots(x) {
                return Err(format!(
                    "round-0 slots of {x} disagree with the reduced forest"
                ));
            }
        }
        for i in 0..trace.rounds_executed() {
            for x in trace.processes_at(i) {
                let slots = self
                    .slots_at(i, x)
                    .ok_or(format!("round {i}: {x} live without slots"))?;
                let edges: Vec<&AdjEntry> = slots.iter().filter_map(Slot::edge).collect();
                for (j, s) in slots.iter().enumerate() {
                    let Some(e) = s.edge() else { continue };
                    let theirs = self
                        .slots_at(i, e.neighbor)
                        .ok_or(format!("round {i}: {x} -> dead {}", e.neighbor))?;
                    let want = AdjEntry {
                        neighbor: x,
                        back: j as u8,
                        rep: e.rep,
                    };
                    if theirs[e.back as usize] != Slot::Edge(want) {
                        return Err(format!("round {i}: slot {x}[{j}] not reciprocated"));
                    }
                }
                if self.leaf_at(i, x) != Some(edges.len() == 1) {
                    return Err(format!("round {i}: leaf flag of {x} is wrong"));
                }
                match self.action(i, x) {
                    Some(Action::Compress) => {
                        if edges.len() != 2 {
                            return Err(format!(
                                "round {i}: {x} compressed with degree {}",
                                edges.len()
                            ));
                        }
                        for e in &edges {
                            if self.leaf_at(i, e.neighbor) == Some(true) {
                                return Err(format!("round {i}: {x} compressed next to a leaf"));
                            }
                            if self.action(i, e.neighbor) == Some(Action::Compress) {
                                return Err(format!(
                                    "round {i}: adjacent {x} and {} both compressed",
                                    e.neighbor
                                ));
                            }
                        }
                    }
                    Some(Action::Rake) => {
                        let y = edges[0].neighbor;
                        let both_leaves = self.leaf_at(i, y) == Some(true);
                        let y_rakes = self.action(i, y) == Some(Action::Rake);
                        if both_leaves && (x > y || y_rakes) {
                            return Err(format!(
                                "round {i}: adjacent leaves {x} and {y} raked wrongly"
                            ));
                        }
                    }
                    Some(Action::Alive) if edges.len() == 1 => {
                        let y = edges[0].neighbor;
                        if self.leaf_at(i, y) != Some(true) || x < y {
                            return Err(format!("round {i}: leaf {x} failed to rake"));
                        }
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

fn round0_slot(s: Option<(u32, u8)>) -> Slot {
    match s {
        Some((neighbor, back)) => Slot::Edge(AdjEntry {
            neighbor,
            back,
            rep: None,
        }),
        None => Slot::NULL,
    }
}

#[cfg(test)]
mod tests;
