use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest ground set representable as a machine-word mask.
pub const MAX_GROUND_SET: usize = 63;

/// A subset of the ground set `{0, .., n-1}` stored as a bit mask.
///
/// Element `i` is present iff bit `i` is set. Elements are zero-based.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Subset(u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub const fn from_mask(mask: u64) -> Self {
        Subset(mask)
    }

    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_GROUND_SET);
        Subset((1u64 << n) - 1)
    }

    pub fn from_elements<I: IntoIterator<Item = usize>>(elements: I) -> Self {
        let mut mask = 0u64;
        for i in elements {
            debug_assert!(i < MAX_GROUND_SET);
            mask |= 1 << i;
        }
        Subset(mask)
    }

    pub const fn mask(self) -> u64 {
        self.0
    }

    pub const fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    #[must_use]
    pub const fn with(self, i: usize) -> Self {
        Subset(self.0 | 1 << i)
    }

    #[must_use]
    pub const fn without(self, i: usize) -> Self {
        Subset(self.0 & !(1 << i))
    }

    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Checks that no element at index `n` or above is present.
    pub fn check_within(self, n: usize) -> Result<Self> {
        if n < 64 && self.0 >> n != 0 {
            return Err(Error::SubsetOutOfRange { mask: self.0, n });
        }
        Ok(self)
    }

    pub fn elements(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(i)
        })
    }

    /// All `2^n` subsets in increasing mask order.
    pub fn all(n: usize) -> impl Iterator<Item = Subset> {
        (0..1u64 << n).map(Subset)
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.elements().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}
