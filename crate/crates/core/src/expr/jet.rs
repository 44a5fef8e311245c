use std::cmp::Ordering;

use smallvec::SmallVec;

use super::context::{Owner, Parity};

/// Derivative multi-index over the independent variables.
///
/// Ordered graded-lexicographically: total order first, then componentwise.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(SmallVec<[u16; 3]>);

impl MultiIndex {
    pub fn zero(dim: usize) -> MultiIndex {
        MultiIndex(SmallVec::from_elem(0, dim))
    }

    pub fn from_slice(orders: &[u16]) -> MultiIndex {
        MultiIndex(SmallVec::from_slice(orders))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&k| k as u32).sum()
    }

    pub fn get(&self, direction: usize) -> u16 {
        self.0[direction]
    }

    pub fn as_slice(&self) -> &[u16] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    pub fn raised(&self, direction: usize) -> MultiIndex {
        let mut next = self.clone();
        next.0[direction] += 1;
        next
    }

    /// `None` when the component in `direction` is already zero.
    pub fn lowered(&self, direction: usize) -> Option<MultiIndex> {
        if self.0[direction] == 0 {
            return None;
        }
        let mut next = self.clone();
        next.0[direction] -= 1;
        Some(next)
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total()
            .cmp(&other.total())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One jet coordinate: a derivative of a field or antifield.
///
/// The parity bit is cached from the context at construction so that the
/// algebra never needs to consult the context.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JetVar {
    owner: Owner,
    order: MultiIndex,
    odd: bool,
}

impl JetVar {
    pub(crate) fn new(owner: Owner, order: MultiIndex, parity: Parity) -> JetVar {
        JetVar {
            owner,
            order,
            odd: parity.is_odd(),
        }
    }

    pub fn owner(&self) -> Owner {
        self.owner
    }

    pub fn order(&self) -> &MultiIndex {
        &self.order
    }

    pub fn parity(&self) -> Parity {
        if self.odd {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub fn is_odd(&self) -> bool {
        self.odd
    }

    pub fn raised(&self, direction: usize) -> JetVar {
        JetVar {
            owner: self.owner,
            order: self.order.raised(direction),
            odd: self.odd,
        }
    }

    pub fn lowered(&self, direction: usize) -> Option<JetVar> {
        Some(JetVar {
            owner: self.owner,
            order: self.order.lowered(direction)?,
            odd: self.odd,
        })
    }
}

impl Ord for JetVar {
    fn cmp(&self, other: &Self) -> Ordering {
        self.owner
            .cmp(&other.owner)
            .then_with(|| self.order.cmp(&other.order))
    }
}

impl PartialOrd for JetVar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
