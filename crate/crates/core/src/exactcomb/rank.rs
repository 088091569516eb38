//! Exact rank by fraction-free (Bareiss) elimination.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::matrices::CommMatrix;

/// Integer type usable by the Bareiss kernel. Fixed-width types report overflow
/// so the caller can retry with a wider type.
pub trait ExactInt: Clone + PartialEq + Zero {
    fn from_i64(v: i64) -> Self;

    /// `(a·b − c·d) / p`, exact by the Bareiss invariant; `None` on overflow.
    fn bareiss_step(a: &Self, b: &Self, c: &Self, d: &Self, p: &Self) -> Option<Self>;
}

macro_rules! impl_exact_prim {
    ($($t:ty),*) => {$(
        impl ExactInt for $t {
            fn from_i64(v: i64) -> Self {
                v as $t
            }

            fn bareiss_step(a: &Self, b: &Self, c: &Self, d: &Self, p: &Self) -> Option<Self> {
                let x = a.checked_mul(*b)?;
                let y = c.checked_mul(*d)?;
                x.checked_sub(y)?.checked_div(*p)
            }
        }
    )*};
}

impl_exact_prim!(i32, i64, i128);

impl ExactInt for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }

    fn bareiss_step(a: &Self, b: &Self, c: &Self, d: &Self, p: &Self) -> Option<Self> {
        Some((a * b - c * d) / p)
    }
}

/// Rank of a rectangular integer matrix over the rationals, or `None` if `T` overflowed.
pub fn rank_with<T: ExactInt>(entries: &[Vec<i64>]) -> Option<usize> {
    let rows = entries.len();
    if rows == 0 {
        return Some(0);
    }
    let cols = entries[0].len();
    let mut a: Vec<Vec<T>> = entries.iter().map(|r| r.iter().map(|&v| T::from_i64(v)).collect()).collect();
    let mut prev = T::from_i64(1);
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, piv);
        let (top, rest) = a.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        for row in rest.iter_mut() {
            for j in (col + 1)..cols {
                row[j] = T::bareiss_step(&row[j], &pivot_row[col], &row[col], &pivot_row[j], &prev)?;
            }
            row[col] = T::zero();
        }
        prev = pivot_row[col].clone();
        rank += 1;
    }
    Some(rank)
}

/// Exact rank of an integer matrix: `i128` arithmetic, big integers on overflow.
pub fn rank_integer(entries: &[Vec<i64>]) -> usize {
    rank_with::<i128>(entries).unwrap_or_else(|| rank_with::<BigInt>(entries).expect("big integers never overflow"))
}

/// Exact rank of the stored entries (`{0,1}` or `{−1,+1}`).
pub fn rank_exact(m: &CommMatrix) -> usize {
    let entries: Vec<Vec<i64>> =
        (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j) as i64).collect()).collect();
    rank_integer(&entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::{gen_equality, gen_hamming_distance, Convention};

    #[test]
    fn identity_and_ones() {
        assert_eq!(rank_exact(&gen_equality(3).unwrap()), 8);
        assert_eq!(rank_exact(&CommMatrix::all_ones(5, 5, Convention::Boolean01).unwrap()), 1);
        assert_eq!(rank_exact(&gen_hamming_distance(2, 1).unwrap()), 2);
    }

    #[test]
    fn narrow_types_fall_back() {
        // Hilbert-like growth overflows i32 quickly.
        let m: Vec<Vec<i64>> = (0..12).map(|i| (0..12).map(|j| ((i * 31 + j * 17) % 23) as i64 - 11).collect()).collect();
        let wide = rank_integer(&m);
        match rank_with::<i32>(&m) {
            Some(r) => assert_eq!(r, wide),
            None => {}
        }
        assert_eq!(rank_with::<BigInt>(&m), Some(wide));
    }

    #[test]
    fn rectangular_with_skipped_columns() {
        let m = vec![vec![0, 1, 2], vec![0, 2, 4], vec![0, 0, 1]];
        assert_eq!(rank_integer(&m), 2);
    }
}
