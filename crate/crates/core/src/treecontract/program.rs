use smallvec::SmallVec;

use crate::coin::CoinOracle;
use crate::engine::{ArrayId, EngineError, LocationKey, Mem, Program, Round};

/// Adjacency slots per vertex after degree reduction.
pub const SLOTS: usize = 3;

const ADJ: ArrayId = ArrayId(0);
const LEAF: ArrayId = ArrayId(1);
const DEATH: ArrayId = ArrayId(2);

pub(crate) fn adj_key(i: Round, u: u32, j: usize) -> LocationKey {
    LocationKey::new(ADJ, i, u, j as u32)
}
pub(crate) fn leaf_key(i: Round, u: u32) -> LocationKey {
    LocationKey::new(LEAF, i, u, 0)
}
pub(crate) fn death_key(u: u32) -> LocationKey {
    LocationKey::unrounded(DEATH, u, 0)
}

/// An occupied adjacency slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AdjEntry {
    pub neighbor: u32,
    /// Slot index of this vertex in the neighbor's array.
    pub back: u8,
    /// Vertex whose compression produced this edge; `None` for an edge of
    /// the (degree-reduced) input forest.
    pub rep: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    /// No neighbor. `raked` names the vertex that raked into this slot
    /// during the previous round, if that is how it emptied.
    Empty {
        raked: Option<u32>,
    },
    Edge(AdjEntry),
}

impl Slot {
    pub const NULL: Slot = Slot::Empty { raked: None };

    pub fn edge(&self) -> Option<&AdjEntry> {
        match self {
            Slot::Edge(e) => Some(e),
            Slot::Empty { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TcValue {
    Slot(Slot),
    Leaf(bool),
    Death(Round),
}

/// Undirected rake/compress contraction over a forest of degree at most
/// three.
#[derive(Clone)]
pub struct ContractProgram {
    pub(crate) coin: CoinOracle,
}

type TMem<'a> = Mem<'a, TcValue>;

fn read_slot(mem: &mut TMem<'_>, key: LocationKey) -> Result<Slot, EngineError> {
    match mem.read(key)? {
        TcValue::Slot(s) => Ok(*s),
        other => Err(mem.fail(format!("{key} holds {other:?}, expected a slot"))),
    }
}

fn read_leaf(mem: &mut TMem<'_>, key: LocationKey) -> Result<bool, EngineError> {
    match mem.read(key)? {
        TcValue::Leaf(l) => Ok(*l),
        other => Err(mem.fail(format!("{key} holds {other:?}, expected a leaf flag"))),
    }
}

impl ContractProgram {
    fn finish(mem: &mut TMem<'_>) -> Result<(), EngineError> {
        let (i, u) = (mem.round(), mem.pid());
        mem.write(death_key(u), TcValue::Death(i))?;
        mem.retire();
        Ok(())
    }

    fn rake(mem: &mut TMem<'_>, e: AdjEntry) -> Result<(), EngineError> {
        let (i, u) = (mem.round(), mem.pid());
        mem.write(
            adj_key(i + 1, e.neighbor, e.back as usize),
            TcValue::Slot(Slot::Empty { raked: Some(u) }),
        )?;
        Self::finish(mem)
    }

    fn compress(mem: &mut TMem<'_>, a: AdjEntry, b: AdjEntry) -> Result<(), EngineError> {
        let (i, u) = (mem.round(), mem.pid());
        let to_b = AdjEntry {
            neighbor: b.neighbor,
            back: b.back,
            rep: Some(u),
        };
        let to_a = AdjEntry {
            neighbor: a.neighbor,
            back: a.back,
            rep: Some(u),
        };
        mem.write(
            adj_key(i + 1, a.neighbor, a.back as usize),
            TcValue::Slot(Slot::Edge(to_b)),
        )?;
        mem.write(
            adj_key(i + 1, b.neighbor, b.back as usize),
            TcValue::Slot(Slot::Edge(to_a)),
        )?;
        Self::finish(mem)
    }

    /// Rewrites every next-round slot this vertex owns and its next-round
    /// leaf flag. A vertex is a leaf next round iff exactly one neighbor is
    /// a non-leaf now: leaf neighbors of a non-leaf rake, compressions keep
    /// degrees, and a leaf that stays alive here loses its leaf neighbor.
    fn alive(mem: &mut TMem<'_>, slots: &[Slot; SLOTS]) -> Result<(), EngineError> {
        let (i, u) = (mem.round(), mem.pid());
        let mut nonleaves = 0;
        for (j, slot) in slots.iter().enumerate() {
            match slot {
                Slot::Edge(e) => {
                    let mine = AdjEntry {
                        neighbor: u,
                        back: j as u8,
                        rep: e.rep,
                    };
                    mem.write(
                        adj_key(i + 1, e.neighbor, e.back as usize),
                        TcValue::Slot(Slot::Edge(mine)),
                    )?;
                    if !read_leaf(mem, leaf_key(i, e.neighbor))? {
                        nonleaves += 1;
                    }
                }
                Slot::Empty { .. } => mem.write(adj_key(i + 1, u, j), TcValue::Slot(Slot::NULL))?,
            }
        }
        mem.write(leaf_key(i + 1, u), TcValue::Leaf(nonleaves == 1))
    }
}

impl Program for ContractProgram {
    type Value = TcValue;

    fn name(&self) -> &str {
        "tree-contraction"
    }

    fn compute_round(&self, mem: &mut TMem<'_>) -> Result<(), EngineError> {
        let (i, u) = (mem.round(), mem.pid());
        let mut slots = [Slot::NULL; SLOTS];
        for (j, s) in slots.iter_mut().enumerate() {
            *s = read_slot(mem, adj_key(i, u, j))?;
        }
        let leaf = read_leaf(mem, leaf_key(i, u))?;
        let edges: SmallVec<[AdjEntry; SLOTS]> =
            slots.iter().filter_map(|s| s.edge().copied()).collect();
        match edges[..] {
            [] => Self::finish(mem),
            [e] if leaf => {
                let other_leaf = read_leaf(mem, leaf_key(i, e.neighbor))?;
                if !other_leaf || u < e.neighbor {
                    Self::rake(mem, e)
                } else {
                    Self::alive(mem, &slots)
                }
            }
            [a, b] => {
                let la = read_leaf(mem, leaf_key(i, a.neighbor))?;
                let lb = read_leaf(mem, leaf_key(i, b.neighbor))?;
                let coins = self.coin.heads(i, u)
                    && !self.coin.heads(i, a.neighbor)
                    && !self.coin.heads(i, b.neighbor);
                if !la && !lb && coins {
                    Self::compress(mem, a, b)
                } else {
                    Self::alive(mem, &slots)
                }
            }
            _ => Self::alive(mem, &slots),
        }
    }
}
