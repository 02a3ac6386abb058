//! Round-synchronous execution with dependency tracking and change
//! propagation.
//!
//! A [`Program`] supplies one computation per (round, process). The engine
//! runs every live process round by round, records what each computation read
//! and wrote, and after an input change re-executes only the computations
//! whose reads changed, or that now start or stop existing.

mod error;
mod key;
mod restricted;
mod store;
mod trace;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

pub use error::EngineError;
pub use key::{ArrayId, CompId, LocationKey, Pid, Round};
pub use restricted::{check_restricted, RestrictedLimits, RestrictedReport};
pub use store::{Cell, CellStore};
pub use trace::{CompRecord, Trace};

/// A round-synchronous algorithm.
///
/// `compute_round` must be a deterministic function of the round, the
/// process id, and the values it reads.
pub trait Program: Sync {
    type Value: Clone + PartialEq + Debug + Send + Sync;

    fn name(&self) -> &str;

    fn compute_round(&self, mem: &mut Mem<'_, Self::Value>) -> Result<(), EngineError>;
}

/// Tracked view of shared memory handed to one computation.
pub struct Mem<'a, V> {
    store: &'a CellStore<V>,
    comp: CompId,
    reads: SmallVec<[LocationKey; 8]>,
    writes: SmallVec<[(LocationKey, V); 4]>,
    retired: bool,
}

impl<'a, V: Clone + PartialEq> Mem<'a, V> {
    fn new(store: &'a CellStore<V>, comp: CompId) -> Self {
        Mem {
            store,
            comp,
            reads: SmallVec::new(),
            writes: SmallVec::new(),
            retired: false,
        }
    }

    pub fn round(&self) -> Round {
        self.comp.round
    }

    pub fn pid(&self) -> Pid {
        self.comp.pid
    }

    pub fn comp(&self) -> CompId {
        self.comp
    }

    /// Reads a location written in an earlier round, or an input.
    pub fn read(&mut self, key: LocationKey) -> Result<&'a V, EngineError> {
        let store: &'a CellStore<V> = self.store;
        let cell = store.cell(&key).ok_or(EngineError::AbsentRead {
            comp: self.comp,
            key,
        })?;
        if let Some(w) = cell.writer {
            if w.round >= self.comp.round {
                return Err(EngineError::InvisibleRead {
                    comp: self.comp,
                    key,
                    written: w.round,
                });
            }
        }
        if !self.reads.contains(&key) {
            self.reads.push(key);
        }
        Ok(&cell.value)
    }

    /// Buffers a write; it becomes visible from the next round.
    pub fn write(&mut self, key: LocationKey, value: V) -> Result<(), EngineError> {
        if self.writes.iter().any(|(k, _)| *k == key) {
            return Err(EngineError::WriteConflict {
                key,
                existing: self.comp.to_string(),
                writer: self.comp,
            });
        }
        self.writes.push((key, value));
        Ok(())
    }

    /// Ends this process after the current round.
    pub fn retire(&mut self) {
        self.retired = true;
    }

    /// Builds a program-level error tagged with this computation.
    pub fn fail(&self, message: impl Into<String>) -> EngineError {
        EngineError::Program {
            comp: self.comp,
            message: message.into(),
        }
    }
}

struct Outcome<V> {
    comp: CompId,
    reads: SmallVec<[LocationKey; 8]>,
    writes: SmallVec<[(LocationKey, V); 4]>,
    retired: bool,
}

/// Input change handed to [`Engine::propagate`].
#[derive(Clone, Debug, Default)]
pub struct PropagationDelta {
    /// Input locations whose values were rewritten (or removed) in the store.
    pub changed: Vec<LocationKey>,
    /// Processes to create, starting at round 0.
    pub added: Vec<Pid>,
    /// Processes to remove.
    pub removed: Vec<Pid>,
}

impl PropagationDelta {
    pub fn is_empty(&self) -> bool {
        self.changed.is_empty() && self.added.is_empty() && self.removed.is_empty()
    }
}

/// Instrumentation for one initial run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunReport {
    pub rounds: Round,
    pub computations_per_round: Vec<u64>,
}

impl RunReport {
    pub fn total_computations(&self) -> u64 {
        self.computations_per_round.iter().sum()
    }
}

/// Instrumentation for one change propagation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PropagationReport {
    /// Computations executed per round (re-executed or newly live).
    pub executed_per_round: Vec<u64>,
    /// Old computations discarded per round without re-execution.
    pub killed_per_round: Vec<u64>,
    /// Processes with any executed or discarded computation, ascending.
    pub touched: Vec<Pid>,
}

impl PropagationReport {
    /// Affected computations in `round`.
    pub fn affected_at(&self, round: Round) -> u64 {
        let r = round as usize;
        self.executed_per_round.get(r).copied().unwrap_or(0)
            + self.killed_per_round.get(r).copied().unwrap_or(0)
    }

    /// Total affected computations; the computation distance in units of
    /// constant-work computations.
    pub fn affected_total(&self) -> u64 {
        self.executed_per_round.iter().sum::<u64>() + self.killed_per_round.iter().sum::<u64>()
    }

    fn bump(v: &mut Vec<u64>, r: Round, by: u64) {
        let r = r as usize;
        if v.len() <= r {
            v.resize(r + 1, 0);
        }
        v[r] += by;
    }
}

/// Cumulative counters across the engine's lifetime.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub runs: u64,
    pub propagations: u64,
    pub computations_executed: u64,
    pub computations_killed: u64,
}

const PARALLEL_THRESHOLD: usize = 512;
const DEFAULT_ROUND_LIMIT: Round = 1 << 16;

/// Owns a program, its shared memory, and the trace of its last execution.
pub struct Engine<P: Program> {
    program: P,
    store: CellStore<P::Value>,
    trace: Trace,
    stats: Stats,
    pool: Option<rayon::ThreadPool>,
    round_limit: Round,
    poisoned: bool,
}

impl<P: Program> Engine<P> {
    pub fn new(program: P) -> Self {
        Engine {
            program,
            store: CellStore::new(),
            trace: Trace::new(),
            stats: Stats::default(),
            pool: None,
            round_limit: DEFAULT_ROUND_LIMIT,
            poisoned: false,
        }
    }

    /// Executes large rounds on a dedicated pool of `threads` workers.
    /// One thread (the default) keeps execution sequential.
    pub fn set_threads(&mut self, threads: usize) -> Result<(), EngineError> {
        self.pool = if threads > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| EngineError::Internal(e.to_string()))?;
            Some(pool)
        } else {
            None
        };
        Ok(())
    }

    pub fn set_round_limit(&mut self, limit: Round) {
        self.round_limit = limit;
    }

    pub fn program(&self) -> &P {
        &self.program
    }

    pub fn store(&self) -> &CellStore<P::Value> {
        &self.store
    }

    /// Mutable store access for installing inputs before [`Engine::run`] or
    /// [`Engine::propagate`].
    pub fn store_mut(&mut self) -> &mut CellStore<P::Value> {
        &mut self.store
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    pub fn is_poisoned(&self) -> bool {
        self.poisoned
    }

    /// Runs `initial` from round 0 until every process retires.
    pub fn run(
        &mut self,
        initial: impl IntoIterator<Item = Pid>,
    ) -> Result<RunReport, EngineError> {
        if self.poisoned {
            return Err(EngineError::Poisoned);
        }
        let initial: BTreeSet<Pid> = initial.into_iter().collect();
        self.store.clear_computed();
        self.trace.clear();
        *self.trace.initial_mut() = initial;
        let res = self.run_inner();
        if res.is_err() {
            self.poisoned = true;
        }
        res
    }

    fn run_inner(&mut self) -> Result<RunReport, EngineError> {
        self.stats.runs += 1;
        let mut live: Vec<Pid> = self.trace.initial().iter().copied().collect();
        let mut report = RunReport::default();
        let mut r: Round = 0;
        while !live.is_empty() {
            if r >= self.round_limit {
                return Err(EngineError::RoundLimit(self.round_limit));
            }
            let outcomes = self.execute(r, &live)?;
            report.computations_per_round.push(outcomes.len() as u64);
            self.stats.computations_executed += outcomes.len() as u64;
            let mut next = Vec::with_capacity(live.len());
            for out in outcomes {
                if !out.retired {
                    next.push(out.comp.pid);
                }
                let mut writes = SmallVec::<[LocationKey; 4]>::new();
                for (k, v) in out.writes {
                    self.store.commit_write(k, v, out.comp)?;
                    writes.push(k);
                }
                self.record(out.comp, out.reads, writes, out.retired);
            }
            live = next;
            r += 1;
        }
        report.rounds = r;
        Ok(report)
    }

    fn record(
        &mut self,
        comp: CompId,
        mut reads: SmallVec<[LocationKey; 8]>,
        mut writes: SmallVec<[LocationKey; 4]>,
        retired: bool,
    ) {
        for k in &reads {
            self.store.subscribe(*k, comp);
        }
        reads.sort_unstable();
        writes.sort_unstable();
        self.trace
            .insert(comp, CompRecord::new(&reads, &writes, retired));
    }

    fn execute(&self, round: Round, pids: &[Pid]) -> Result<Vec<Outcome<P::Value>>, EngineError> {
        let program = &self.program;
        let store = &self.store;
        let one = |pid: Pid| -> Result<Outcome<P::Value>, EngineError> {
            let comp = CompId::new(round, pid);
            let mut mem = Mem::new(store, comp);
            program.compute_round(&mut mem)?;
            Ok(Outcome {
                comp,
                reads: mem.reads,
                writes: mem.writes,
                retired: mem.retired,
            })
        };
        match &self.pool {
            Some(pool) if pids.len() >= PARALLEL_THRESHOLD => {
                pool.install(|| pids.par_iter().map(|&p| one(p)).collect())
            }
            _ => pids.iter().map(|&p| one(p)).collect(),
        }
    }

    /// Removes a computation's record, its subscriptions, and its writes.
    /// Purged values are collected into `old` for change detection.
    fn discard(
        &mut self,
        comp: CompId,
        old: &mut FxHashMap<LocationKey, P::Value>,
    ) -> Option<CompRecord> {
        let rec = self.trace.remove(comp)?;
        for k in rec.reads().iter() {
            self.store.unsubscribe(k, comp);
        }
        for k in rec.writes().iter() {
            if let Some(v) = self.store.purge_write(k, comp) {
                old.insert(*k, v);
            }
        }
        Some(rec)
    }

    /// Re-executes the computations affected by `delta`.
    ///
    /// Changed input values must already be installed in the store. Locations
    /// rewritten with an equal value do not count as changed.
    pub fn propagate(
        &mut self,
        delta: &PropagationDelta,
    ) -> Result<PropagationReport, EngineError> {
        if self.poisoned {
            return Err(EngineError::Poisoned);
        }
        let added: BTreeSet<Pid> = delta.added.iter().copied().collect();
        let removed: BTreeSet<Pid> = delta.removed.iter().copied().collect();
        if let Some(p) = added.intersection(&removed).next() {
            return Err(EngineError::ConflictingDelta(*p));
        }
        for p in &added {
            if self.trace.initial().contains(p) {
                return Err(EngineError::DuplicateProcess(*p));
            }
        }
        for p in &removed {
            if !self.trace.initial().contains(p) {
                return Err(EngineError::UnknownProcess(*p));
            }
        }
        let mut changed: Vec<LocationKey> = delta.changed.clone();
        changed.sort_unstable();
        changed.dedup();
        for k in &changed {
            match self.store.cell(k) {
                Some(Cell {
                    writer: Some(w), ..
                }) => {
                    return Err(EngineError::NotAnInput {
                        key: *k,
                        writer: *w,
                    })
                }
                Some(_) => {}
                None if self.store.has_entry(k) => {}
                None => return Err(EngineError::UnknownLocation(*k)),
            }
        }
        let res = self.propagate_inner(changed, added, removed);
        if res.is_err() {
            self.poisoned = true;
        }
        res
    }

    fn propagate_inner(
        &mut self,
        mut changed: Vec<LocationKey>,
        mut lived: BTreeSet<Pid>,
        mut dead: BTreeSet<Pid>,
    ) -> Result<PropagationReport, EngineError> {
        self.stats.propagations += 1;
        {
            let initial = self.trace.initial_mut();
            for p in &dead {
                initial.remove(p);
            }
            initial.extend(lived.iter().copied());
        }
        let mut report = PropagationReport::default();
        let mut touched: BTreeSet<Pid> = BTreeSet::new();
        let mut buckets: BTreeMap<Round, BTreeSet<Pid>> = BTreeMap::new();
        let mut r: Round = 0;
        loop {
            for k in changed.drain(..) {
                for c in self.store.readers(&k) {
                    if c.round < r {
                        return Err(EngineError::Internal(format!(
                            "{c} reads {k}, changed after its round"
                        )));
                    }
                    buckets.entry(c.round).or_default().insert(c.pid);
                }
            }
            if dead.is_empty() && lived.is_empty() {
                match buckets.keys().next() {
                    Some(&next) => r = next,
                    None => break,
                }
            }
            if r >= self.round_limit {
                return Err(EngineError::RoundLimit(self.round_limit));
            }
            let affected = buckets.remove(&r).unwrap_or_default();
            let rerun: Vec<Pid> = affected
                .into_iter()
                .filter(|p| !dead.contains(p) && !lived.contains(p))
                .collect();

            let mut old: FxHashMap<LocationKey, P::Value> = FxHashMap::default();
            let mut prev_retired: FxHashMap<Pid, bool> = FxHashMap::default();
            for &p in &rerun {
                let rec = self.discard(CompId::new(r, p), &mut old).ok_or_else(|| {
                    EngineError::Internal(format!("affected {} has no record", CompId::new(r, p)))
                })?;
                prev_retired.insert(p, rec.retired);
            }
            let mut dead_done = Vec::new();
            let mut killed = 0u64;
            for &p in &dead {
                match self.discard(CompId::new(r, p), &mut old) {
                    Some(rec) => {
                        killed += 1;
                        touched.insert(p);
                        if rec.retired {
                            dead_done.push(p);
                        }
                    }
                    None => dead_done.push(p),
                }
            }

            let mut run_set: Vec<Pid> =
                rerun.iter().copied().chain(lived.iter().copied()).collect();
            run_set.sort_unstable();
            let outcomes = self.execute(r, &run_set)?;
            PropagationReport::bump(&mut report.executed_per_round, r, outcomes.len() as u64);
            PropagationReport::bump(&mut report.killed_per_round, r, killed);
            self.stats.computations_executed += outcomes.len() as u64;
            self.stats.computations_killed += killed;

            let mut new_lived = Vec::new();
            let mut new_dead = Vec::new();
            let mut now_retired = Vec::new();
            for out in outcomes {
                let comp = out.comp;
                touched.insert(comp.pid);
                let mut writes = SmallVec::<[LocationKey; 4]>::new();
                for (k, v) in out.writes {
                    let before = match self.store.cell(&k) {
                        // A write left behind by a later-round computation of
                        // the old execution; that computation is gone in the
                        // new one, so the value is displaced.
                        Some(Cell {
                            writer: Some(w), ..
                        }) if w.round > r => {
                            let w = *w;
                            self.store.purge_write(&k, w)
                        }
                        _ => old.remove(&k),
                    };
                    if before.as_ref() != Some(&v) {
                        changed.push(k);
                    }
                    self.store.commit_write(k, v, comp)?;
                    writes.push(k);
                }
                if out.retired {
                    now_retired.push(comp.pid);
                }
                if let Some(&prev) = prev_retired.get(&comp.pid) {
                    if prev && !out.retired {
                        new_lived.push(comp.pid);
                    } else if !prev && out.retired {
                        new_dead.push(comp.pid);
                    }
                }
                self.record(comp, out.reads, writes, out.retired);
            }
            changed.extend(old.into_keys());

            for p in now_retired {
                lived.remove(&p);
            }
            lived.extend(new_lived);
            for p in dead_done {
                dead.remove(&p);
            }
            dead.extend(new_dead);
            r += 1;
        }
        report.touched = touched.into_iter().collect();
        Ok(report)
    }

    /// Re-executes the current inputs and process set from scratch into a
    /// fresh store and trace, leaving this engine untouched.
    pub fn replay(&self) -> Result<(CellStore<P::Value>, Trace), EngineError>
    where
        P: Clone,
    {
        let mut fresh = Engine::new(self.program.clone());
        for (k, c) in self.store.cells() {
            if c.writer.is_none() {
                fresh.store.set_input(k, c.value.clone())?;
            }
        }
        fresh.round_limit = self.round_limit;
        fresh.run(self.trace.initial().iter().copied())?;
        Ok((fresh.store, fresh.trace))
    }

    /// Compares the current state with a from-scratch execution: every
    /// stored cell (value and writer), every subscription, and the trace
    /// must be identical.
    pub fn check_against_replay(&self) -> Result<(), String>
    where
        P: Clone,
    {
        let (store, trace) = self.replay().map_err(|e| format!("replay failed: {e}"))?;
        if self.store.len() != store.len() {
            return Err(format!(
                "store holds {} cells, replay holds {}",
                self.store.len(),
                store.len()
            ));
        }
        for (k, c) in self.store.cells() {
            match store.cell(&k) {
                Some(o) if o == c => {}
                Some(o) => {
                    return Err(format!(
                        "{k}: {:?} by {:?}, replay has {:?} by {:?}",
                        c.value, c.writer, o.value, o.writer
                    ))
                }
                None => return Err(format!("{k}: present, absent in replay")),
            }
        }
        if self.trace != trace {
            return Err("trace differs from replay".to_string());
        }
        self.audit()
    }

    /// Checks subscriber soundness, read visibility, write ownership, and
    /// trace shape.
    pub fn audit(&self) -> Result<(), String> {
        self.trace.check_shape()?;
        let mut subs = 0usize;
        for (comp, rec) in self.trace.records() {
            for k in rec.reads().iter() {
                if !self.store.readers(k).contains(&comp) {
                    return Err(format!("{comp} read {k} but is not subscribed"));
                }
                match self.store.cell(k) {
                    None => return Err(format!("{comp} read {k}, which is absent")),
                    Some(Cell {
                        writer: Some(w), ..
                    }) if w.round >= comp.round => {
                        return Err(format!("{comp} read {k}, written by {w}"))
                    }
                    _ => {}
                }
                subs += 1;
            }
            for k in rec.writes().iter() {
                match self.store.cell(k) {
                    Some(Cell {
                        writer: Some(w), ..
                    }) if *w == comp => {}
                    _ => return Err(format!("{comp} wrote {k} but does not own it")),
                }
            }
        }
        let stored: usize = self.store.subscriptions().map(|(_, r)| r.len()).sum();
        if stored != subs {
            return Err(format!("{stored} subscriptions for {subs} recorded reads"));
        }
        for (k, c) in self.store.cells() {
            if let Some(w) = c.writer {
                let owns = self
                    .trace
                    .record(w)
                    .is_some_and(|rec| rec.writes().binary_search(&k).is_ok());
                if !owns {
                    return Err(format!("{k} written by {w}, which has no such write"));
                }
            }
        }
        Ok(())
    }
}
