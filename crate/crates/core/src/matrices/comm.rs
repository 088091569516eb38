use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// How cell values are read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Convention {
    /// Entries in `{0, 1}`.
    Boolean01,
    /// Entries in `{-1, +1}`.
    SignPM1,
}

/// A communication matrix with bit-packed rows.
///
/// Every cell stores one bit; under [`Convention::Boolean01`] the bit is the
/// entry itself and under [`Convention::SignPM1`] a set bit means `+1`. The
/// conversion between conventions is therefore the fixed map `0 ↔ -1`,
/// `1 ↔ +1`, and it is lossless in both directions.
///
/// Equality and hashing compare shape, convention and entries; the label is
/// descriptive only.
#[derive(Clone)]
pub struct CommMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    bits: Vec<u64>,
    convention: Convention,
    label: Option<String>,
}

impl PartialEq for CommMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.convention == other.convention && self.bits == other.bits
    }
}

impl Eq for CommMatrix {}

impl std::hash::Hash for CommMatrix {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        (self.rows, self.cols, self.convention, &self.bits).hash(state);
    }
}

impl CommMatrix {
    fn blank(rows: usize, cols: usize, convention: Convention) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("matrix must be non-empty, got {rows}x{cols}")));
        }
        let words = cols.div_ceil(64);
        let cells = rows.checked_mul(words).ok_or_else(|| Error::SizeLimit("matrix too large".into()))?;
        Ok(Self { rows, cols, words, bits: vec![0; cells], convention, label: None })
    }

    /// Builds a Boolean matrix from a predicate.
    pub fn from_bool_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        Self::from_bit_fn(rows, cols, Convention::Boolean01, f)
    }

    /// Builds a sign matrix from a predicate (`true` means `+1`).
    pub fn from_sign_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        Self::from_bit_fn(rows, cols, Convention::SignPM1, f)
    }

    fn from_bit_fn(
        rows: usize,
        cols: usize,
        convention: Convention,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut m = Self::blank(rows, cols, convention)?;
        for i in 0..rows {
            for j in 0..cols {
                if f(i, j) {
                    m.set_bit(i, j, true);
                }
            }
        }
        Ok(m)
    }

    /// Builds from integer entries, validating them against `convention`.
    pub fn from_entries(rows: usize, cols: usize, entries: &[i8], convention: Convention) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for {rows}x{cols}, got {}",
                rows * cols,
                entries.len()
            )));
        }
        let mut m = Self::blank(rows, cols, convention)?;
        for (k, &e) in entries.iter().enumerate() {
            let bit = match (convention, e) {
                (Convention::Boolean01, 0) | (Convention::SignPM1, -1) => false,
                (Convention::Boolean01, 1) | (Convention::SignPM1, 1) => true,
                _ => {
                    return Err(Error::Convention(format!("entry {e} not allowed under {convention:?}")));
                }
            };
            m.set_bit(k / cols, k % cols, bit);
        }
        Ok(m)
    }

    /// Constant matrix (all `1`, or all `+1`).
    pub fn all_ones(rows: usize, cols: usize, convention: Convention) -> Result<Self> {
        Self::from_bit_fn(rows, cols, convention, |_, _| true)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Label or a `rows x cols` description.
    pub fn name(&self) -> String {
        self.label.clone().unwrap_or_else(|| format!("{}x{}", self.rows, self.cols))
    }

    fn set_bit(&mut self, i: usize, j: usize, v: bool) {
        let w = &mut self.bits[i * self.words + j / 64];
        if v {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    /// Boolean view of a cell: the entry for Boolean matrices, `entry == +1` for sign matrices.
    #[inline]
    pub fn bit(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    /// Stored entry under the matrix's own convention.
    pub fn get(&self, i: usize, j: usize) -> i8 {
        match (self.convention, self.bit(i, j)) {
            (Convention::Boolean01, b) => b as i8,
            (Convention::SignPM1, true) => 1,
            (Convention::SignPM1, false) => -1,
        }
    }

    /// Sign view of a cell (`0 ↦ -1`).
    pub fn sign(&self, i: usize, j: usize) -> i8 {
        if self.bit(i, j) {
            1
        } else {
            -1
        }
    }

    /// Packed Boolean view of row `i`.
    pub fn row_words(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    /// Boolean view of row `i` as a `u64` mask. Requires `cols <= 64`.
    pub fn row_mask(&self, i: usize) -> u64 {
        debug_assert!(self.cols <= 64);
        self.bits[i * self.words]
    }

    /// Boolean view of column `j` as a `u64` mask. Requires `rows <= 64`.
    pub fn col_mask(&self, j: usize) -> u64 {
        debug_assert!(self.rows <= 64);
        (0..self.rows).fold(0u64, |m, i| m | ((self.bit(i, j) as u64) << i))
    }

    pub fn to_sign(&self) -> Self {
        let mut m = self.clone();
        m.convention = Convention::SignPM1;
        m
    }

    pub fn to_bool(&self) -> Self {
        let mut m = self.clone();
        m.convention = Convention::Boolean01;
        m
    }

    pub fn require(&self, convention: Convention, op: &str) -> Result<()> {
        if self.convention == convention {
            Ok(())
        } else {
            Err(Error::Convention(format!("{op} requires {convention:?}, got {:?}", self.convention)))
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::from_bit_fn(self.cols, self.rows, self.convention, |i, j| self.bit(j, i))
            .expect("non-empty");
        t.label = self.label.as_ref().map(|l| format!("{l}^T"));
        t
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        if rows.iter().any(|&r| r >= self.rows) || cols.iter().any(|&c| c >= self.cols) {
            return Err(Error::Dimension("submatrix index out of range".into()));
        }
        Self::from_bit_fn(rows.len(), cols.len(), self.convention, |i, j| self.bit(rows[i], cols[j]))
    }

    pub fn permute(&self, row_perm: &[usize], col_perm: &[usize]) -> Self {
        let mut m = self.submatrix(row_perm, col_perm).expect("valid permutation");
        m.label = self.label.clone();
        m
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| (0..i).all(|j| self.bit(i, j) == self.bit(j, i)))
    }

    /// True when every cell holds the same value.
    pub fn is_constant(&self) -> bool {
        let b = self.bit(0, 0);
        (0..self.rows).all(|i| (0..self.cols).all(|j| self.bit(i, j) == b))
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Indices of one representative per distinct row, in first-occurrence order.
    pub fn distinct_rows(&self) -> Vec<usize> {
        let mut seen = std::collections::HashSet::new();
        (0..self.rows).filter(|&i| seen.insert(self.row_words(i).to_vec())).collect()
    }

    pub fn distinct_row_count(&self) -> usize {
        self.distinct_rows().len()
    }

    /// Copy with duplicate rows removed (first occurrences kept).
    pub fn dedup_rows(&self) -> Self {
        let keep = self.distinct_rows();
        let all: Vec<usize> = (0..self.cols).collect();
        let mut m = self.submatrix(&keep, &all).expect("valid rows");
        m.label = self.label.clone();
        m
    }

    /// Stored entries as a real matrix.
    pub fn to_dense(&self) -> DenseMatrix<f64> {
        DenseMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) as f64)
    }

    /// Sign view as a real `±1` matrix.
    pub fn to_sign_dense(&self) -> DenseMatrix<f64> {
        DenseMatrix::from_fn(self.rows, self.cols, |i, j| self.sign(i, j) as f64)
    }
}

impl fmt::Debug for CommMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CommMatrix {}x{} {:?} {:?}", self.rows, self.cols, self.convention, self.label)?;
        for i in 0..self.rows.min(32) {
            let line: String = (0..self.cols.min(64))
                .map(|j| match (self.convention, self.bit(i, j)) {
                    (Convention::Boolean01, true) => '1',
                    (Convention::Boolean01, false) => '0',
                    (Convention::SignPM1, true) => '+',
                    (Convention::SignPM1, false) => '-',
                })
                .collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

/// `⌈log₂ k⌉` for `k ≥ 1`.
pub fn ceil_log2(k: usize) -> u32 {
    debug_assert!(k >= 1);
    usize::BITS - (k - 1).leading_zeros()
}

/// Exact count of pairwise-distinct rows.
pub fn distinct_row_count(m: &CommMatrix) -> usize {
    m.distinct_row_count()
}

/// One-way deterministic cost `⌈log₂(distinct rows)⌉`.
pub fn one_way_cc(m: &CommMatrix) -> u32 {
    ceil_log2(m.distinct_row_count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_round_trip() {
        let m = CommMatrix::from_entries(2, 3, &[1, -1, 1, -1, -1, 1], Convention::SignPM1).unwrap();
        assert_eq!(m.to_bool().get(0, 1), 0);
        assert_eq!(m.to_bool().to_sign(), m);
        assert_eq!(m.to_bool().get(0, 0), 1);
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(CommMatrix::from_entries(1, 2, &[0, 2], Convention::Boolean01).is_err());
        assert!(CommMatrix::from_entries(1, 2, &[0, 1], Convention::SignPM1).is_err());
        assert!(CommMatrix::from_entries(1, 2, &[0], Convention::Boolean01).is_err());
    }

    #[test]
    fn one_way_cost() {
        let ones = CommMatrix::all_ones(4, 4, Convention::Boolean01).unwrap();
        assert_eq!(distinct_row_count(&ones), 1);
        assert_eq!(one_way_cc(&ones), 0);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(8), 3);
    }

    #[test]
    fn wide_rows_pack_across_words() {
        let m = CommMatrix::from_bool_fn(3, 130, |i, j| (i + j) % 7 == 0).unwrap();
        assert!(m.bit(0, 126));
        assert!(!m.bit(0, 127));
        assert_eq!(m.transpose().transpose(), m);
    }
}
