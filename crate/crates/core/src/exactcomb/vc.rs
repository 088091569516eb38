//! VC dimension, Sauer–Shelah maximality, and SQ dimension.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrices::{binomial, CommMatrix, Convention};

/// A dimension found by a capped search. `at_cap` means "at least `value`".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CappedDim {
    pub value: usize,
    pub at_cap: bool,
}

impl std::fmt::Display for CappedDim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.at_cap {
            write!(f, ">= {}", self.value)
        } else {
            write!(f, "{}", self.value)
        }
    }
}

fn shattered(rows: &[Vec<bool>], set: &[usize]) -> bool {
    let need = 1usize << set.len();
    if rows.len() < need {
        return false;
    }
    let mut seen = HashSet::with_capacity(need);
    for r in rows {
        let pat = set.iter().enumerate().fold(0usize, |a, (k, &j)| a | (r[j] as usize) << k);
        seen.insert(pat);
        if seen.len() == need {
            return true;
        }
    }
    false
}

/// Largest `d ≤ cap` such that some `d` columns are shattered by the rows.
pub fn vc_dimension(m: &CommMatrix, cap: usize) -> Result<CappedDim> {
    if m.cols() > 64 {
        return Err(Error::SizeLimit(format!("vc_dimension: {} columns exceeds 64", m.cols())));
    }
    if cap > 6 {
        return Err(Error::InvalidArgument(format!("vc_dimension: cap {cap} exceeds 6")));
    }
    let d = m.dedup_rows();
    let rows: Vec<Vec<bool>> = (0..d.rows()).map(|i| (0..d.cols()).map(|j| d.bit(i, j)).collect()).collect();
    // Level-wise: a set is shattered only if all its subsets are.
    let mut level: Vec<Vec<usize>> = vec![Vec::new()];
    let mut dim = 0;
    while dim < cap {
        let prev: HashSet<Vec<usize>> = level.iter().cloned().collect();
        let mut next = Vec::new();
        for s in &level {
            let start = s.last().map_or(0, |&l| l + 1);
            for j in start..d.cols() {
                let mut cand = s.clone();
                cand.push(j);
                let subsets_ok = (0..cand.len()).all(|drop| {
                    let sub: Vec<usize> = cand.iter().enumerate().filter(|&(k, _)| k != drop).map(|(_, &c)| c).collect();
                    prev.contains(&sub)
                });
                if subsets_ok && shattered(&rows, &cand) {
                    next.push(cand);
                }
            }
        }
        if next.is_empty() {
            return Ok(CappedDim { value: dim, at_cap: false });
        }
        level = next;
        dim += 1;
    }
    Ok(CappedDim { value: dim, at_cap: true })
}

/// Class-size versus Sauer–Shelah bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SauerShelah {
    pub class_size: usize,
    pub vc_dim: usize,
    pub binomial_sum: u128,
    pub is_maximum: bool,
}

pub fn sauer_shelah_check(m: &CommMatrix, cap: usize) -> Result<SauerShelah> {
    let vc = vc_dimension(m, cap)?;
    if vc.at_cap {
        return Err(Error::BudgetExceeded(format!("sauer_shelah_check: VC dimension reached cap {cap}")));
    }
    let class_size = m.distinct_row_count();
    let binomial_sum: u128 = (0..=vc.value)
        .map(|i| u128::try_from(binomial(m.cols(), i)).expect("fits"))
        .sum();
    Ok(SauerShelah {
        class_size,
        vc_dim: vc.value,
        binomial_sum,
        is_maximum: class_size as u128 == binomial_sum,
    })
}

/// Largest `d ≤ cap` with `d` rows whose pairwise uniform correlations are at most `1/d` in magnitude.
pub fn sq_dimension_uniform(m: &CommMatrix, cap: usize) -> Result<CappedDim> {
    m.require(Convention::SignPM1, "sq_dimension_uniform")?;
    if m.rows() > 64 {
        return Err(Error::SizeLimit(format!("sq_dimension_uniform: {} rows exceeds 64", m.rows())));
    }
    if cap == 0 {
        return Err(Error::InvalidArgument("cap must be positive".into()));
    }
    let r = m.rows();
    let cols = m.cols() as i64;
    // Integer correlations Σ_y f_i(y) f_j(y).
    let mut corr = vec![vec![0i64; r]; r];
    for i in 0..r {
        for j in 0..i {
            let s: i64 = (0..m.cols()).map(|y| (m.sign(i, y) * m.sign(j, y)) as i64).sum();
            corr[i][j] = s;
            corr[j][i] = s;
        }
    }
    let top = cap.min(r);
    for d in (2..=top).rev() {
        let adj: Vec<u64> = (0..r)
            .map(|i| (0..r).filter(|&j| j != i && corr[i][j].abs() * d as i64 <= cols).fold(0u64, |a, j| a | 1 << j))
            .collect();
        let all = if r == 64 { u64::MAX } else { (1u64 << r) - 1 };
        if has_clique(&adj, all, 0, d) {
            return Ok(CappedDim { value: d, at_cap: d == cap });
        }
    }
    Ok(CappedDim { value: 1, at_cap: cap == 1 })
}

fn has_clique(adj: &[u64], cand: u64, size: usize, target: usize) -> bool {
    if size >= target {
        return true;
    }
    if size + (cand.count_ones() as usize) < target {
        return false;
    }
    let mut c = cand;
    while c != 0 {
        if size + (c.count_ones() as usize) < target {
            return false;
        }
        let v = c.trailing_zeros() as usize;
        c &= c - 1;
        if has_clique(adj, c & adj[v], size + 1, target) {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::{gen_equality, gen_projective_intervals};

    #[test]
    fn vc_small_cases() {
        assert_eq!(vc_dimension(&gen_equality(3).unwrap(), 6).unwrap().value, 1);
        let ones = CommMatrix::all_ones(4, 4, Convention::Boolean01).unwrap();
        assert_eq!(vc_dimension(&ones, 6).unwrap().value, 0);
        assert_eq!(vc_dimension(&gen_projective_intervals(2).unwrap(), 6).unwrap().value, 2);
        assert!(vc_dimension(&ones, 7).is_err());
    }

    #[test]
    fn vc_cap_is_reported() {
        // All 8 patterns on 3 columns.
        let m = CommMatrix::from_bool_fn(8, 3, |i, j| i >> j & 1 == 1).unwrap();
        assert_eq!(vc_dimension(&m, 2).unwrap(), CappedDim { value: 2, at_cap: true });
        assert_eq!(vc_dimension(&m, 3).unwrap(), CappedDim { value: 3, at_cap: true });
        assert_eq!(vc_dimension(&m, 3).unwrap().to_string(), ">= 3");
    }

    #[test]
    fn sauer_shelah_examples() {
        let s = sauer_shelah_check(&gen_projective_intervals(2).unwrap(), 6).unwrap();
        assert_eq!((s.class_size, s.vc_dim, s.binomial_sum, s.is_maximum), (29, 2, 29, true));
        let e = sauer_shelah_check(&gen_equality(2).unwrap(), 6).unwrap();
        assert_eq!((e.class_size, e.vc_dim, e.binomial_sum, e.is_maximum), (4, 1, 5, false));
    }

    #[test]
    fn sq_examples() {
        let h = CommMatrix::from_entries(2, 2, &[1, 1, 1, -1], Convention::SignPM1).unwrap();
        assert_eq!(sq_dimension_uniform(&h, 4).unwrap().value, 2);
        let ones = CommMatrix::all_ones(3, 3, Convention::SignPM1).unwrap();
        assert_eq!(sq_dimension_uniform(&ones, 4).unwrap().value, 1);
        assert!(sq_dimension_uniform(&ones.to_bool(), 4).is_err());
    }
}
