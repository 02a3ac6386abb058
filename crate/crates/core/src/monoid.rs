//! Associative operators with identities.

use std::fmt::Debug;

/// An associative operator with an identity element. `combine` must be
/// associative on the representation; it need not be commutative.
pub trait Monoid: Clone + Send + Sync {
    type T: Clone + PartialEq + Debug + Send + Sync;

    fn identity(&self) -> Self::T;
    fn combine(&self, a: &Self::T, b: &Self::T) -> Self::T;

    fn fold<'a, I>(&self, items: I) -> Self::T
    where
        I: IntoIterator<Item = &'a Self::T>,
        Self::T: 'a,
    {
        items
            .into_iter()
            .fold(self.identity(), |acc, x| self.combine(&acc, x))
    }
}

/// Wrapping integer addition.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Sum;

impl Monoid for Sum {
    type T = i64;
    fn identity(&self) -> i64 {
        0
    }
    fn combine(&self, a: &i64, b: &i64) -> i64 {
        a.wrapping_add(*b)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Max;

impl Monoid for Max {
    type T = i64;
    fn identity(&self) -> i64 {
        i64::MIN
    }
    fn combine(&self, a: &i64, b: &i64) -> i64 {
        *a.max(b)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Min;

impl Monoid for Min {
    type T = i64;
    fn identity(&self) -> i64 {
        i64::MAX
    }
    fn combine(&self, a: &i64, b: &i64) -> i64 {
        *a.min(b)
    }
}

/// Runtime-selected integer operator, for command-line use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntOp {
    Sum,
    Max,
    Min,
}

impl Monoid for IntOp {
    type T = i64;
    fn identity(&self) -> i64 {
        match self {
            IntOp::Sum => Sum.identity(),
            IntOp::Max => Max.identity(),
            IntOp::Min => Min.identity(),
        }
    }
    fn combine(&self, a: &i64, b: &i64) -> i64 {
        match self {
            IntOp::Sum => Sum.combine(a, b),
            IntOp::Max => Max.combine(a, b),
            IntOp::Min => Min.combine(a, b),
        }
    }
}

/// 2x2 integer matrix product mod 2^64. Associative but not commutative,
/// which makes it useful for catching operand-order mistakes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MatMul;

impl Monoid for MatMul {
    type T = [u64; 4];
    fn identity(&self) -> [u64; 4] {
        [1, 0, 0, 1]
    }
    fn combine(&self, a: &[u64; 4], b: &[u64; 4]) -> [u64; 4] {
        let m = |x: u64, y: u64| x.wrapping_mul(y);
        [
            m(a[0], b[0]).wrapping_add(m(a[1], b[2])),
            m(a[0], b[1]).wrapping_add(m(a[1], b[3])),
            m(a[2], b[0]).wrapping_add(m(a[3], b[2])),
            m(a[2], b[1]).wrapping_add(m(a[3], b[3])),
        ]
    }
}
