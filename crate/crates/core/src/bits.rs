//! Fixed-capacity bit sets over element indices.

use std::fmt;

const WORD: usize = 64;

/// A set of element indices `0..capacity`, stored one bit per element.
///
/// Ordering is lexicographic on the word vector, which gives a canonical
/// order for families of sets.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointSet {
    capacity: usize,
    words: Vec<u64>,
}

impl PointSet {
    pub fn empty(capacity: usize) -> Self {
        PointSet {
            capacity,
            words: vec![0; capacity.div_ceil(WORD)],
        }
    }

    pub fn full(capacity: usize) -> Self {
        let mut set = Self::empty(capacity);
        for i in 0..capacity {
            set.insert(i);
        }
        set
    }

    pub fn singleton(capacity: usize, i: usize) -> Self {
        let mut set = Self::empty(capacity);
        set.insert(i);
        set
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(capacity: usize, items: I) -> Self {
        let mut set = Self::empty(capacity);
        for i in items {
            set.insert(i);
        }
        set
    }

    /// `{0, …, n-1}` inside a universe of `capacity` elements.
    pub fn prefix(capacity: usize, n: usize) -> Self {
        Self::from_indices(capacity, 0..n.min(capacity))
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn insert(&mut self, i: usize) -> bool {
        assert!(i < self.capacity, "index {i} out of range {}", self.capacity);
        let (w, b) = (i / WORD, i % WORD);
        let was = self.words[w] >> b & 1 == 1;
        self.words[w] |= 1 << b;
        !was
    }

    pub fn remove(&mut self, i: usize) {
        if i < self.capacity {
            self.words[i / WORD] &= !(1 << (i % WORD));
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.capacity && self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn union_with(&mut self, other: &PointSet) {
        debug_assert_eq!(self.capacity, other.capacity);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &PointSet) {
        debug_assert_eq!(self.capacity, other.capacity);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        let mut out = self.clone();
        out.union_with(other);
        out
    }

    pub fn intersection(&self, other: &PointSet) -> PointSet {
        let mut out = self.clone();
        out.intersect_with(other);
        out
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(w * WORD + b)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Re-embeds into a universe of a different size, dropping indices that
    /// do not fit.
    pub fn resized(&self, capacity: usize) -> PointSet {
        PointSet::from_indices(capacity, self.iter().filter(|&i| i < capacity))
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let mut a = PointSet::from_indices(130, [0, 64, 129]);
        assert_eq!(a.len(), 3);
        assert!(a.contains(64) && !a.contains(63));
        assert_eq!(a.to_vec(), vec![0, 64, 129]);
        let b = PointSet::prefix(130, 65);
        assert_eq!(a.intersection(&b).to_vec(), vec![0, 64]);
        assert!(!a.is_subset(&b));
        a.remove(129);
        assert!(a.is_subset(&b));
        assert!(!a.insert(0));
        assert_eq!(PointSet::full(3).to_vec(), vec![0, 1, 2]);
        assert!(PointSet::empty(0).is_empty());
    }
}
