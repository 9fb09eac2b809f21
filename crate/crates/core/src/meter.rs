use serde::{Deserialize, Serialize};
use std::iter::Sum;
use std::ops::{Add, AddAssign};

/// Tally of homomorphic operations. Merging is plain component-wise addition.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpCounter {
    pub adds: u64,
    pub muls: u64,
    pub mixed_adds: u64,
    pub mixed_muls: u64,
}

impl OpCounter {
    pub fn merge(self, other: Self) -> Self {
        self + other
    }

    pub fn total(&self) -> u64 {
        self.adds + self.muls + self.mixed_adds + self.mixed_muls
    }

    /// Additions of either kind.
    pub fn all_adds(&self) -> u64 {
        self.adds + self.mixed_adds
    }

    /// Multiplications of either kind.
    pub fn all_muls(&self) -> u64 {
        self.muls + self.mixed_muls
    }
}

impl Add for OpCounter {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            adds: self.adds + o.adds,
            muls: self.muls + o.muls,
            mixed_adds: self.mixed_adds + o.mixed_adds,
            mixed_muls: self.mixed_muls + o.mixed_muls,
        }
    }
}

impl AddAssign for OpCounter {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sum for OpCounter {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

/// Gate kinds as they appear in an evaluation trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    Add,
    Mul,
    MixedAdd,
    MixedMul,
    Star,
}
