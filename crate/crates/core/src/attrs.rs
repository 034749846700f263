//! Attribute ordinals and compact attribute sets.
//!
//! Every schema handled by the crate (including the concatenated schema of a
//! two-table join) is limited to [`MAX_ATTRS`] attributes, which lets an
//! attribute set live in a single `u128`.

use std::cmp::Ordering;
use std::fmt;

/// Largest schema width supported by [`AttrSet`].
pub const MAX_ATTRS: usize = 128;

/// Ordinal of an attribute inside one schema.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct AttrId(u8);

impl AttrId {
    pub fn new(index: usize) -> Self {
        assert!(index < MAX_ATTRS, "attribute ordinal {index} out of range");
        AttrId(index as u8)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn shifted(self, offset: usize) -> Self {
        AttrId::new(self.index() + offset)
    }
}

impl From<usize> for AttrId {
    fn from(index: usize) -> Self {
        AttrId::new(index)
    }
}

impl fmt::Display for AttrId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A set of attribute ordinals.
///
/// The [`Ord`] implementation is the canonical order used throughout the
/// crate: smaller sets first, then lexicographic on ascending ordinals.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct AttrSet(u128);

impl AttrSet {
    pub const EMPTY: AttrSet = AttrSet(0);

    pub fn singleton(a: AttrId) -> Self {
        AttrSet(1u128 << a.index())
    }

    /// The first `n` ordinals.
    pub fn prefix(n: usize) -> Self {
        assert!(n <= MAX_ATTRS);
        if n == MAX_ATTRS {
            AttrSet(u128::MAX)
        } else {
            AttrSet((1u128 << n) - 1)
        }
    }

    /// Ordinals `start..end`.
    pub fn range(start: usize, end: usize) -> Self {
        AttrSet::prefix(end).difference(AttrSet::prefix(start))
    }

    pub fn contains(self, a: AttrId) -> bool {
        self.0 & (1u128 << a.index()) != 0
    }

    pub fn with(self, a: AttrId) -> Self {
        AttrSet(self.0 | (1u128 << a.index()))
    }

    pub fn without(self, a: AttrId) -> Self {
        AttrSet(self.0 & !(1u128 << a.index()))
    }

    pub fn insert(&mut self, a: AttrId) {
        *self = self.with(a);
    }

    pub fn remove(&mut self, a: AttrId) {
        *self = self.without(a);
    }

    pub fn union(self, other: AttrSet) -> Self {
        AttrSet(self.0 | other.0)
    }

    pub fn intersection(self, other: AttrSet) -> Self {
        AttrSet(self.0 & other.0)
    }

    pub fn difference(self, other: AttrSet) -> Self {
        AttrSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: AttrSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_proper_subset(self, other: AttrSet) -> bool {
        self != other && self.is_subset(other)
    }

    pub fn is_disjoint(self, other: AttrSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn intersects(self, other: AttrSet) -> bool {
        !self.is_disjoint(other)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn first(self) -> Option<AttrId> {
        (self.0 != 0).then(|| AttrId::new(self.0.trailing_zeros() as usize))
    }

    pub fn last(self) -> Option<AttrId> {
        (self.0 != 0).then(|| AttrId::new(127 - self.0.leading_zeros() as usize))
    }

    /// Ordinals in ascending order.
    pub fn iter(self) -> AttrIter {
        AttrIter(self.0)
    }

    /// Every ordinal moved up by `offset`.
    pub fn shifted(self, offset: usize) -> Self {
        self.iter().map(|a| a.shifted(offset)).collect()
    }

    /// Every ordinal moved down by `offset`; ordinals below `offset` are dropped.
    pub fn unshifted(self, offset: usize) -> Self {
        self.iter()
            .filter(|a| a.index() >= offset)
            .map(|a| AttrId::new(a.index() - offset))
            .collect()
    }

    /// All subsets of `self` with exactly `k` members, in canonical order.
    pub fn subsets_of_size(self, k: usize) -> Vec<AttrSet> {
        let members: Vec<AttrId> = self.iter().collect();
        let mut out = Vec::new();
        let mut pick = Vec::with_capacity(k);
        fn rec(
            members: &[AttrId],
            start: usize,
            k: usize,
            pick: &mut Vec<AttrId>,
            out: &mut Vec<AttrSet>,
        ) {
            if pick.len() == k {
                out.push(pick.iter().copied().collect());
                return;
            }
            for i in start..members.len() {
                if members.len() - i < k - pick.len() {
                    break;
                }
                pick.push(members[i]);
                rec(members, i + 1, k, pick, out);
                pick.pop();
            }
        }
        if k <= members.len() {
            rec(&members, 0, k, &mut pick, &mut out);
        }
        out
    }
}

impl Ord for AttrSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.iter().cmp(other.iter()))
    }
}

impl PartialOrd for AttrSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromIterator<AttrId> for AttrSet {
    fn from_iter<I: IntoIterator<Item = AttrId>>(iter: I) -> Self {
        iter.into_iter().fold(AttrSet::EMPTY, AttrSet::with)
    }
}

impl<'a> FromIterator<&'a AttrId> for AttrSet {
    fn from_iter<I: IntoIterator<Item = &'a AttrId>>(iter: I) -> Self {
        iter.into_iter().copied().collect()
    }
}

impl IntoIterator for AttrSet {
    type Item = AttrId;
    type IntoIter = AttrIter;

    fn into_iter(self) -> AttrIter {
        self.iter()
    }
}

pub struct AttrIter(u128);

impl Iterator for AttrIter {
    type Item = AttrId;

    fn next(&mut self) -> Option<AttrId> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(AttrId::new(i))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for AttrIter {}

impl fmt::Debug for AttrSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|a| a.index())).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: &[usize]) -> AttrSet {
        ids.iter().map(|&i| AttrId::new(i)).collect()
    }

    #[test]
    fn canonical_order_is_size_then_lexicographic() {
        let mut sets = vec![set(&[2]), set(&[0, 3]), set(&[]), set(&[0, 1]), set(&[1])];
        sets.sort();
        assert_eq!(
            sets,
            vec![set(&[]), set(&[1]), set(&[2]), set(&[0, 1]), set(&[0, 3])]
        );
    }

    #[test]
    fn shift_round_trips() {
        let s = set(&[0, 4, 9]);
        assert_eq!(s.shifted(5).unshifted(5), s);
        assert_eq!(set(&[1, 7]).unshifted(3), set(&[4]));
    }

    #[test]
    fn subsets_of_size_enumerates_binomial() {
        let s = set(&[1, 3, 5, 7]);
        assert_eq!(s.subsets_of_size(2).len(), 6);
        assert_eq!(s.subsets_of_size(0), vec![AttrSet::EMPTY]);
        assert_eq!(s.subsets_of_size(5), Vec::<AttrSet>::new());
    }

    #[test]
    fn high_ordinals_work() {
        let s = set(&[0, 127]);
        assert_eq!(s.len(), 2);
        assert_eq!(s.last(), Some(AttrId::new(127)));
        assert_eq!(AttrSet::prefix(128).len(), 128);
    }
}
