//! Repeatable pseudorandom coin flips keyed by (seed, round, id).

/// Deterministic coin oracle. The same (seed, round, id) always lands the
/// same way, which change propagation relies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoinOracle {
    seed: u64,
}

impl CoinOracle {
    pub const fn new(seed: u64) -> Self {
        CoinOracle { seed }
    }

    pub const fn seed(&self) -> u64 {
        self.seed
    }

    pub fn heads(&self, round: u32, id: u32) -> bool {
        let x = mix(self.seed ^ mix(((round as u64) << 32) | id as u64));
        x >> 63 == 1
    }
}

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
