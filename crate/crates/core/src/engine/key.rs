use std::fmt;

/// Process identifier.
pub type Pid = u32;
/// Round number, starting at zero.
pub type Round = u32;

/// Names one shared-memory array of a client program.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ArrayId(pub u8);

/// Address of one shared-memory cell.
///
/// `round` is the round in which the value becomes readable: zero for inputs,
/// writer round plus one for per-round arrays. Arrays without a round
/// dimension (death rounds, say) use zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct LocationKey {
    pub array: ArrayId,
    pub round: Round,
    pub index: [u32; 2],
}

impl LocationKey {
    pub const fn new(array: ArrayId, round: Round, i: u32, j: u32) -> Self {
        LocationKey {
            array,
            round,
            index: [i, j],
        }
    }

    pub const fn unrounded(array: ArrayId, i: u32, j: u32) -> Self {
        LocationKey {
            array,
            round: 0,
            index: [i, j],
        }
    }
}

impl fmt::Display for LocationKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "a{}[{}][{},{}]",
            self.array.0, self.round, self.index[0], self.index[1]
        )
    }
}

/// One round computation: process `pid` executing round `round`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct CompId {
    pub round: Round,
    pub pid: Pid,
}

impl CompId {
    pub const fn new(round: Round, pid: Pid) -> Self {
        CompId { round, pid }
    }
}

impl fmt::Display for CompId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(round {}, process {})", self.round, self.pid)
    }
}
