use serde::{Deserialize, Serialize};

use super::comm::CommMatrix;

/// Fixed-universe index set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BitSet {
    len: usize,
    words: Vec<u64>,
}

impl BitSet {
    pub fn empty(len: usize) -> Self {
        Self { len, words: vec![0; len.div_ceil(64).max(1)] }
    }

    pub fn full(len: usize) -> Self {
        let mut s = Self::empty(len);
        for i in 0..len {
            s.insert(i);
        }
        s
    }

    pub fn from_indices(len: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(len);
        for i in idx {
            s.insert(i);
        }
        s
    }

    /// Low `len` bits of `mask`. Requires `len <= 64`.
    pub fn from_mask(len: usize, mask: u64) -> Self {
        assert!(len <= 64);
        let keep = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        Self { len, words: vec![mask & keep] }
    }

    /// Low word, for universes of at most 64 elements.
    pub fn mask(&self) -> u64 {
        self.words[0]
    }

    pub fn universe(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len, "index {i} outside universe {}", self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.contains(i))
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }
}

/// Combinatorial rectangle `rowset × colset`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rectangle {
    pub rows: BitSet,
    pub cols: BitSet,
}

impl Rectangle {
    pub fn new(rows: BitSet, cols: BitSet) -> Self {
        Self { rows, cols }
    }

    pub fn empty(nrows: usize, ncols: usize) -> Self {
        Self::new(BitSet::empty(nrows), BitSet::empty(ncols))
    }

    pub fn full(nrows: usize, ncols: usize) -> Self {
        Self::new(BitSet::full(nrows), BitSet::full(ncols))
    }

    pub fn cell(nrows: usize, ncols: usize, i: usize, j: usize) -> Self {
        Self::new(BitSet::from_indices(nrows, [i]), BitSet::from_indices(ncols, [j]))
    }

    pub fn from_masks(nrows: usize, ncols: usize, rows: u64, cols: u64) -> Self {
        Self::new(BitSet::from_mask(nrows, rows), BitSet::from_mask(ncols, cols))
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.rows.contains(i) && self.cols.contains(j)
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty() || self.cols.is_empty()
    }

    pub fn area(&self) -> usize {
        self.rows.len() * self.cols.len()
    }

    /// Cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows.iter().flat_map(move |i| self.cols.iter().map(move |j| (i, j)))
    }

    /// The single Boolean value of a non-empty monochromatic rectangle, if any.
    pub fn monochromatic_value(&self, m: &CommMatrix) -> Option<bool> {
        let mut it = self.cells();
        let (i0, j0) = it.next()?;
        let v = m.bit(i0, j0);
        if it.all(|(i, j)| m.bit(i, j) == v) {
            Some(v)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::generators::gen_equality;

    #[test]
    fn membership_is_product() {
        let r = Rectangle::new(BitSet::from_indices(4, [0, 2]), BitSet::from_indices(3, [1]));
        assert!(r.contains(2, 1));
        assert!(!r.contains(1, 1));
        assert!(!r.contains(0, 0));
        assert_eq!(r.area(), 2);
        assert_eq!(r.cells().collect::<Vec<_>>(), vec![(0, 1), (2, 1)]);
    }

    #[test]
    fn monochromatic_detection() {
        let eq = gen_equality(1).unwrap();
        assert_eq!(Rectangle::cell(2, 2, 0, 1).monochromatic_value(&eq), Some(false));
        assert_eq!(Rectangle::full(2, 2).monochromatic_value(&eq), None);
        assert_eq!(Rectangle::empty(2, 2).monochromatic_value(&eq), None);
        assert!(Rectangle::empty(2, 2).is_empty());
    }

    #[test]
    fn masks_truncate_to_universe() {
        let s = BitSet::from_mask(3, 0b1111);
        assert_eq!(s.len(), 3);
        assert!(BitSet::from_mask(3, 0b001).is_subset(&s));
    }
}
