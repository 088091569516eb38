//! Maximum-weight rectangle search.
//!
//! Given a real weight per cell, find a rectangle maximizing the total weight
//! it contains. For a fixed row set the best column set is simply every
//! column with positive partial sum, so exhaustive search only needs to
//! enumerate subsets of the shorter side. Those subsets are visited in Gray
//! code order, updating column sums incrementally.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::DenseMatrix;
use crate::matrices::Rectangle;

/// Largest shorter side enumerated exhaustively.
pub const EXACT_SIDE_CAP: usize = 20;
pub const HEURISTIC_RESTARTS: usize = 32;

#[derive(Clone, Debug)]
pub struct WeightedRect {
    pub rect: Rectangle,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct OracleAnswer {
    /// Best rectangles found, by decreasing value. Never empty.
    pub best: Vec<WeightedRect>,
    /// True when `best[0]` is a proven maximum.
    pub exact: bool,
}

impl OracleAnswer {
    pub fn value(&self) -> f64 {
        self.best[0].value
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMode {
    /// Exhaustive when the shorter side is within [`EXACT_SIDE_CAP`], heuristic otherwise.
    Auto,
    /// Always alternate-maximization heuristic.
    Heuristic,
}

#[derive(Clone, Debug)]
pub struct RectOracle {
    pub mode: OracleMode,
    pub seed: u64,
    /// Number of rectangles to keep per query.
    pub keep: usize,
}

impl Default for RectOracle {
    fn default() -> Self {
        Self { mode: OracleMode::Auto, seed: 0x5eed, keep: 6 }
    }
}

impl RectOracle {
    pub fn is_exact_for(&self, rows: usize, cols: usize) -> bool {
        self.mode == OracleMode::Auto && rows.min(cols) <= EXACT_SIDE_CAP
    }

    /// Maximizes `Σ_{(i,j)∈R} w(i,j)` over all rectangles, including the empty one.
    pub fn maximize(&self, w: &DenseMatrix<f64>) -> OracleAnswer {
        if self.is_exact_for(w.rows(), w.cols()) {
            OracleAnswer { best: max_rect_exact(w, self.keep), exact: true }
        } else {
            OracleAnswer { best: max_rect_heuristic(w, HEURISTIC_RESTARTS, self.seed, self.keep), exact: false }
        }
    }
}

struct TopK {
    k: usize,
    items: Vec<(f64, u64)>,
}

impl TopK {
    fn offer(&mut self, v: f64, key: u64) {
        if self.items.len() == self.k && v <= self.items[self.k - 1].0 {
            return;
        }
        if self.items.iter().any(|&(_, k)| k == key) {
            return;
        }
        let pos = self.items.partition_point(|&(x, _)| x >= v);
        self.items.insert(pos, (v, key));
        self.items.truncate(self.k);
    }
}

/// Exhaustive search; returns up to `keep` distinct best rectangles.
pub fn max_rect_exact(w: &DenseMatrix<f64>, keep: usize) -> Vec<WeightedRect> {
    let transposed = w.rows() > w.cols();
    let a = if transposed { w.transpose() } else { w.clone() };
    let (r, c) = (a.rows(), a.cols());
    assert!(r <= 40, "exhaustive rectangle search over {r} rows");
    let mut sums = vec![0.0f64; c];
    let mut top = TopK { k: keep.max(1), items: vec![(0.0, 0)] };
    let mut mask: u64 = 0;
    for step in 1u64..(1u64 << r) {
        let bit = step.trailing_zeros() as usize;
        let row = a.row(bit);
        if mask >> bit & 1 == 0 {
            mask |= 1 << bit;
            for (s, &x) in sums.iter_mut().zip(row) {
                *s += x;
            }
        } else {
            mask &= !(1 << bit);
            for (s, &x) in sums.iter_mut().zip(row) {
                *s -= x;
            }
        }
        let v: f64 = sums.iter().map(|&s| s.max(0.0)).sum();
        if top.items.len() < top.k || v > top.items[top.items.len() - 1].0 {
            top.offer(v, mask);
        }
    }
    top.items
        .into_iter()
        .map(|(_, rmask)| {
            let rows: Vec<usize> = (0..r).filter(|&i| rmask >> i & 1 == 1).collect();
            let cols = best_cols(&a, &rows);
            let rect = if transposed {
                Rectangle::new(set(w.rows(), &cols), set(w.cols(), &rows))
            } else {
                Rectangle::new(set(w.rows(), &rows), set(w.cols(), &cols))
            };
            let value = rect_weight(w, &rect);
            WeightedRect { rect, value }
        })
        .collect()
}

fn set(n: usize, idx: &[usize]) -> crate::matrices::BitSet {
    crate::matrices::BitSet::from_indices(n, idx.iter().copied())
}

fn best_cols(a: &DenseMatrix<f64>, rows: &[usize]) -> Vec<usize> {
    (0..a.cols()).filter(|&j| rows.iter().map(|&i| a[(i, j)]).sum::<f64>() > 0.0).collect()
}

fn best_rows(a: &DenseMatrix<f64>, cols: &[usize]) -> Vec<usize> {
    (0..a.rows()).filter(|&i| cols.iter().map(|&j| a[(i, j)]).sum::<f64>() > 0.0).collect()
}

pub fn rect_weight(w: &DenseMatrix<f64>, r: &Rectangle) -> f64 {
    r.cells().map(|(i, j)| w[(i, j)]).sum()
}

/// Alternating row/column maximization from seeded random starts.
pub fn max_rect_heuristic(w: &DenseMatrix<f64>, restarts: usize, seed: u64, keep: usize) -> Vec<WeightedRect> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (r, c) = (w.rows(), w.cols());
    let mut found: Vec<WeightedRect> = vec![WeightedRect { rect: Rectangle::empty(r, c), value: 0.0 }];
    let mut starts: Vec<Vec<usize>> = Vec::new();
    // Deterministic starts: each single row, best positive row first.
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| {
        let pa: f64 = w.row(a).iter().map(|x| x.max(0.0)).sum();
        let pb: f64 = w.row(b).iter().map(|x| x.max(0.0)).sum();
        pb.partial_cmp(&pa).unwrap_or(std::cmp::Ordering::Equal)
    });
    for &i in order.iter().take(restarts / 2) {
        starts.push(vec![i]);
    }
    while starts.len() < restarts {
        let mut rows: Vec<usize> = (0..r).filter(|_| rng.random_bool(0.5)).collect();
        if rows.is_empty() {
            rows.push(rng.random_range(0..r));
        }
        rows.shuffle(&mut rng);
        starts.push(rows);
    }
    for mut rows in starts {
        rows.sort_unstable();
        let mut cols = best_cols(w, &rows);
        for _ in 0..200 {
            let nr = best_rows(w, &cols);
            let nc = best_cols(w, &nr);
            if nr == rows && nc == cols {
                break;
            }
            rows = nr;
            cols = nc;
        }
        let rect = Rectangle::new(set(r, &rows), set(c, &cols));
        let value = rect_weight(w, &rect);
        if !found.iter().any(|f| f.rect == rect) {
            found.push(WeightedRect { rect, value });
        }
    }
    found.sort_by(|a, b| b.value.partial_cmp(&a.value).unwrap_or(std::cmp::Ordering::Equal));
    found.truncate(keep.max(1));
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(w: &DenseMatrix<f64>) -> f64 {
        let (r, c) = (w.rows(), w.cols());
        let mut best: f64 = 0.0;
        for rm in 0u64..1 << r {
            for cm in 0u64..1 << c {
                let mut s = 0.0;
                for i in 0..r {
                    for j in 0..c {
                        if rm >> i & 1 == 1 && cm >> j & 1 == 1 {
                            s += w[(i, j)];
                        }
                    }
                }
                best = best.max(s);
            }
        }
        best
    }

    #[test]
    fn exact_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let r = rng.random_range(1..6);
            let c = rng.random_range(1..7);
            let w = DenseMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0));
            let ans = max_rect_exact(&w, 4);
            assert!((ans[0].value - brute(&w)).abs() < 1e-12);
            for wr in &ans {
                assert!((rect_weight(&w, &wr.rect) - wr.value).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn heuristic_never_exceeds_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let w = DenseMatrix::from_fn(6, 6, |_, _| rng.random_range(-1.0..1.0));
        let h = max_rect_heuristic(&w, 32, 1, 3);
        assert!(h[0].value <= brute(&w) + 1e-12);
        assert!(h[0].value > 0.0);
    }
}
