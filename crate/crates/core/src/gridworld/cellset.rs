use smallvec::SmallVec;

use super::{CellIndex, GridError};

const WORD_BITS: usize = 64;

/// Fixed-capacity bit set over the cells of one map.
///
/// Maps up to 512 cells stay inline; larger maps spill to the heap.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CellSet {
    capacity: u16,
    words: SmallVec<[u64; 8]>,
}

impl CellSet {
    pub fn empty(capacity: usize) -> Self {
        assert!(capacity <= u16::MAX as usize, "cell set capacity {capacity} too large");
        let n = capacity.div_ceil(WORD_BITS);
        CellSet { capacity: capacity as u16, words: SmallVec::from_elem(0, n) }
    }

    pub fn full(capacity: usize) -> Self {
        let mut set = Self::empty(capacity);
        for w in set.words.iter_mut() {
            *w = u64::MAX;
        }
        set.clear_tail();
        set
    }

    fn clear_tail(&mut self) {
        let rem = self.capacity as usize % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity as usize
    }

    #[inline]
    pub fn contains(&self, cell: CellIndex) -> bool {
        let i = cell.index();
        i < self.capacity() && self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    /// Inserts `cell`, returning whether it was newly added.
    #[inline]
    pub fn insert(&mut self, cell: CellIndex) -> bool {
        let i = cell.index();
        assert!(i < self.capacity(), "cell {i} outside set capacity {}", self.capacity);
        let mask = 1u64 << (i % WORD_BITS);
        let word = &mut self.words[i / WORD_BITS];
        let fresh = *word & mask == 0;
        *word |= mask;
        fresh
    }

    pub fn remove(&mut self, cell: CellIndex) {
        let i = cell.index();
        if i < self.capacity() {
            self.words[i / WORD_BITS] &= !(1u64 << (i % WORD_BITS));
        }
    }

    fn check(&self, other: &CellSet) -> Result<(), GridError> {
        if self.capacity != other.capacity {
            return Err(GridError::CapacityMismatch {
                left: self.capacity(),
                right: other.capacity(),
            });
        }
        Ok(())
    }

    pub fn union_with(&mut self, other: &CellSet) -> Result<(), GridError> {
        self.check(other)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
        Ok(())
    }

    pub fn intersect_with(&mut self, other: &CellSet) -> Result<(), GridError> {
        self.check(other)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
        Ok(())
    }

    /// `self \ other`.
    pub fn difference(&self, other: &CellSet) -> Result<CellSet, GridError> {
        self.check(other)?;
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
        Ok(out)
    }

    pub fn is_subset(&self, other: &CellSet) -> Result<bool, GridError> {
        self.check(other)?;
        Ok(self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0))
    }

    pub fn is_superset(&self, other: &CellSet) -> Result<bool, GridError> {
        other.is_subset(self)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Number of cells in `self \ other`. Capacities must match.
    #[inline]
    pub(crate) fn count_new(&self, already: &CellSet) -> usize {
        debug_assert_eq!(self.capacity, already.capacity);
        self.words
            .iter()
            .zip(&already.words)
            .map(|(a, b)| (a & !b).count_ones() as usize)
            .sum()
    }

    /// Iterates `self \ other` in ascending cell order.
    pub(crate) fn iter_new<'a>(&'a self, already: &'a CellSet) -> impl Iterator<Item = CellIndex> + 'a {
        debug_assert_eq!(self.capacity, already.capacity);
        self.words
            .iter()
            .zip(&already.words)
            .enumerate()
            .flat_map(|(wi, (a, b))| BitIter(a & !b).map(move |bit| CellIndex::new(wi * WORD_BITS + bit)))
    }

    /// Unchecked union for the search hot path.
    #[inline]
    pub(crate) fn union_in_place(&mut self, other: &CellSet) {
        debug_assert_eq!(self.capacity, other.capacity);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = CellIndex> + '_ {
        self.words
            .iter()
            .enumerate()
            .flat_map(|(wi, &w)| BitIter(w).map(move |bit| CellIndex::new(wi * WORD_BITS + bit)))
    }

    pub fn from_cells(capacity: usize, cells: impl IntoIterator<Item = CellIndex>) -> Self {
        let mut set = Self::empty(capacity);
        for c in cells {
            set.insert(c);
        }
        set
    }
}

impl std::fmt::Debug for CellSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter().map(|c| c.index())).finish()
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let bit = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(bit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn c(i: usize) -> CellIndex {
        CellIndex::new(i)
    }

    #[test]
    fn full_respects_capacity() {
        let s = CellSet::full(70);
        assert_eq!(s.len(), 70);
        assert!(s.contains(c(69)));
        assert!(!s.contains(c(70)));
    }

    #[test]
    fn mismatched_capacity_is_an_error() {
        let mut a = CellSet::empty(9);
        let b = CellSet::empty(16);
        assert!(a.union_with(&b).is_err());
        assert!(a.is_subset(&b).is_err());
        assert!(a.difference(&b).is_err());
    }

    proptest! {
        #[test]
        fn matches_btreeset(xs in proptest::collection::vec(0usize..130, 0..40),
                            ys in proptest::collection::vec(0usize..130, 0..40)) {
            let a = CellSet::from_cells(130, xs.iter().map(|&i| c(i)));
            let b = CellSet::from_cells(130, ys.iter().map(|&i| c(i)));
            let sa: BTreeSet<usize> = xs.iter().copied().collect();
            let sb: BTreeSet<usize> = ys.iter().copied().collect();

            let mut u = a.clone();
            u.union_with(&b).unwrap();
            prop_assert_eq!(u.iter().map(|x| x.index()).collect::<BTreeSet<_>>(), &sa | &sb);

            let mut i = a.clone();
            i.intersect_with(&b).unwrap();
            prop_assert_eq!(i.iter().map(|x| x.index()).collect::<BTreeSet<_>>(), &sa & &sb);

            let d = a.difference(&b).unwrap();
            prop_assert_eq!(d.len(), (&sa - &sb).len());
            prop_assert_eq!(a.count_new(&b), (&sa - &sb).len());
            prop_assert_eq!(a.iter_new(&b).map(|x| x.index()).collect::<BTreeSet<_>>(), &sa - &sb);
            prop_assert_eq!(a.is_subset(&b).unwrap(), sa.is_subset(&sb));
        }
    }
}
