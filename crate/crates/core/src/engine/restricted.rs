use super::key::LocationKey;
use super::store::{Cell, CellStore};
use super::trace::Trace;

/// Per-computation and per-location caps for the restricted model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RestrictedLimits {
    pub reads: usize,
    pub writes: usize,
    pub readers: usize,
}

impl Default for RestrictedLimits {
    fn default() -> Self {
        RestrictedLimits {
            reads: 8,
            writes: 8,
            readers: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestrictedReport {
    pub max_reads: usize,
    pub max_writes: usize,
    pub max_readers: usize,
    /// Every read targets a location written exactly one round earlier, or
    /// an input read in round 0.
    pub reads_previous_round_only: bool,
    /// First read that broke the previous-round rule, if any.
    pub first_violation: Option<String>,
    pub restricted: bool,
}

/// Audits a completed execution against the restricted round-synchronous
/// model.
pub fn check_restricted<V: Clone + PartialEq>(
    trace: &Trace,
    store: &CellStore<V>,
    limits: RestrictedLimits,
) -> RestrictedReport {
    let mut max_reads = 0;
    let mut max_writes = 0;
    let mut first_violation = None;
    let mut comps: Vec<_> = trace.records().collect();
    comps.sort_unstable_by_key(|(c, _)| *c);
    for (comp, rec) in comps {
        max_reads = max_reads.max(rec.reads().len());
        max_writes = max_writes.max(rec.writes().len());
        if first_violation.is_some() {
            continue;
        }
        for k in rec.reads().iter() {
            let ok = match store.cell(k) {
                Some(Cell {
                    writer: Some(w), ..
                }) => w.round + 1 == comp.round,
                Some(Cell { writer: None, .. }) => comp.round == 0,
                None => false,
            };
            if !ok {
                first_violation = Some(format!("{comp} reads {k}"));
                break;
            }
        }
    }
    let max_readers = readers_max(store);
    let prev_only = first_violation.is_none();
    RestrictedReport {
        max_reads,
        max_writes,
        max_readers,
        reads_previous_round_only: prev_only,
        first_violation,
        restricted: prev_only
            && max_reads <= limits.reads
            && max_writes <= limits.writes
            && max_readers <= limits.readers,
    }
}

fn readers_max<V: Clone + PartialEq>(store: &CellStore<V>) -> usize {
    store
        .subscriptions()
        .map(|(_, r): (LocationKey, _)| r.len())
        .max()
        .unwrap_or(0)
}
