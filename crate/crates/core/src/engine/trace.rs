use std::collections::BTreeSet;

use super::key::{CompId, LocationKey, Pid, Round};

/// Read set, write set, and retire flag of one computation.
/// Reads and writes are kept sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompRecord {
    /// Reads followed by writes.
    keys: Box<[LocationKey]>,
    split: u32,
    pub retired: bool,
}

impl CompRecord {
    pub fn new(reads: &[LocationKey], writes: &[LocationKey], retired: bool) -> Self {
        let mut keys = Vec::with_capacity(reads.len() + writes.len());
        keys.extend_from_slice(reads);
        keys.extend_from_slice(writes);
        CompRecord {
            keys: keys.into_boxed_slice(),
            split: reads.len() as u32,
            retired,
        }
    }

    pub fn reads(&self) -> &[LocationKey] {
        &self.keys[..self.split as usize]
    }

    pub fn writes(&self) -> &[LocationKey] {
        &self.keys[self.split as usize..]
    }
}

/// Replayable record of one execution.
#[derive(Clone, Debug, Default)]
pub struct Trace {
    /// Records per process, indexed by round.
    records: Vec<Vec<Option<CompRecord>>>,
    initial: BTreeSet<Pid>,
    per_round: Vec<u64>,
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, comp: CompId) -> Option<&CompRecord> {
        self.records
            .get(comp.pid as usize)?
            .get(comp.round as usize)?
            .as_ref()
    }

    pub fn records(&self) -> impl Iterator<Item = (CompId, &CompRecord)> {
        self.records.iter().enumerate().flat_map(|(p, rs)| {
            rs.iter().enumerate().filter_map(move |(r, rec)| {
                rec.as_ref()
                    .map(|rec| (CompId::new(r as Round, p as Pid), rec))
            })
        })
    }

    /// Number of recorded computations.
    pub fn len(&self) -> usize {
        self.per_round.iter().sum::<u64>() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.per_round.is_empty()
    }

    /// The process set the execution starts from.
    pub fn initial(&self) -> &BTreeSet<Pid> {
        &self.initial
    }

    /// Number of rounds with at least one computation.
    pub fn rounds_executed(&self) -> Round {
        self.per_round.len() as Round
    }

    /// Live computations per round.
    pub fn computations_per_round(&self) -> &[u64] {
        &self.per_round
    }

    /// Processes that execute `round`, in ascending order.
    pub fn processes_at(&self, round: Round) -> Vec<Pid> {
        (0..self.records.len() as Pid)
            .filter(|&p| self.record(CompId::new(round, p)).is_some())
            .collect()
    }

    /// Round in which `pid` retired, if it ran at all.
    pub fn retire_round(&self, pid: Pid) -> Option<Round> {
        let mut r = 0;
        loop {
            let rec = self.record(CompId::new(r, pid))?;
            if rec.retired {
                return Some(r);
            }
            r += 1;
        }
    }

    pub(crate) fn initial_mut(&mut self) -> &mut BTreeSet<Pid> {
        &mut self.initial
    }

    pub(crate) fn insert(&mut self, comp: CompId, rec: CompRecord) {
        let r = comp.round as usize;
        if self.per_round.len() <= r {
            self.per_round.resize(r + 1, 0);
        }
        let p = comp.pid as usize;
        if self.records.len() <= p {
            self.records.resize_with(p + 1, Vec::new);
        }
        let rs = &mut self.records[p];
        if rs.len() <= r {
            rs.resize_with(r + 1, || None);
        }
        if rs[r].replace(rec).is_none() {
            self.per_round[r] += 1;
        }
    }

    pub(crate) fn remove(&mut self, comp: CompId) -> Option<CompRecord> {
        let rs = self.records.get_mut(comp.pid as usize)?;
        let rec = rs.get_mut(comp.round as usize)?.take()?;
        while rs.last().is_some_and(|r| r.is_none()) {
            rs.pop();
        }
        self.per_round[comp.round as usize] -= 1;
        while self.per_round.last() == Some(&0) {
            self.per_round.pop();
        }
        Some(rec)
    }

    pub(crate) fn clear(&mut self) {
        self.records.clear();
        self.per_round.clear();
    }

    /// Checks the structural trace invariants: round 0 runs exactly the
    /// initial processes, and a process runs round r+1 iff it ran round r
    /// without retiring.
    pub fn check_shape(&self) -> Result<(), String> {
        let at0: BTreeSet<Pid> = self.processes_at(0).into_iter().collect();
        if at0 != self.initial {
            return Err(format!(
                "round 0 runs {} processes but the initial set has {}",
                at0.len(),
                self.initial.len()
            ));
        }
        for (comp, rec) in self.records() {
            let has_next = self.record(CompId::new(comp.round + 1, comp.pid)).is_some();
            if rec.retired == has_next {
                return Err(format!(
                    "{comp}: retired = {} but successor present = {has_next}",
                    rec.retired
                ));
            }
            if comp.round > 0 && self.record(CompId::new(comp.round - 1, comp.pid)).is_none() {
                return Err(format!("{comp}: no predecessor computation"));
            }
        }
        Ok(())
    }
}

impl PartialEq for Trace {
    fn eq(&self, other: &Self) -> bool {
        self.initial == other.initial
            && self.per_round == other.per_round
            && self.records().eq(other.records())
    }
}

impl Eq for Trace {}
