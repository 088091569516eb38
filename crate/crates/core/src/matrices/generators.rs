//! Generator families for the separating examples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::comm::{CommMatrix, Convention};
use crate::error::{Error, Result};
use crate::exactcomb::SignWitness;
use crate::linalg::DenseMatrix;

fn check_range(name: &str, v: usize, lo: usize, hi: usize) -> Result<()> {
    if v < lo || v > hi {
        return Err(Error::SizeLimit(format!("{name}={v} outside supported range {lo}..={hi}")));
    }
    Ok(())
}

/// `EQ_n`: `2ⁿ × 2ⁿ` identity.
pub fn gen_equality(n: usize) -> Result<CommMatrix> {
    check_range("n", n, 1, 16)?;
    let s = 1usize << n;
    Ok(CommMatrix::from_bool_fn(s, s, |i, j| i == j)?.with_label(format!("eq({n})")))
}

/// `HD_k`: entry 1 iff the Hamming distance of the indices is `k`.
pub fn gen_hamming_distance(n: usize, k: usize) -> Result<CommMatrix> {
    check_range("n", n, 1, 12)?;
    check_range("k", k, 0, n)?;
    let s = 1usize << n;
    Ok(CommMatrix::from_bool_fn(s, s, |i, j| (i ^ j).count_ones() as usize == k)?
        .with_label(format!("hd({n},{k})")))
}

/// `GT_m`: entry 1 iff row index exceeds column index.
pub fn gen_greater_than(m: usize) -> Result<CommMatrix> {
    check_range("m", m, 2, 64)?;
    Ok(CommMatrix::from_bool_fn(m, m, |i, j| i > j)?.with_label(format!("gt({m})")))
}

/// Two-dimensional realization of greater-than: `u_x = (x, -1)`, `v_y = (1, y + 1/2)`.
pub fn greater_than_witness(m: usize) -> SignWitness {
    let u = DenseMatrix::from_fn(m, 2, |i, k| if k == 0 { i as f64 } else { -1.0 });
    let v = DenseMatrix::from_fn(m, 2, |j, k| if k == 0 { 1.0 } else { j as f64 + 0.5 });
    SignWitness::new(u, v)
}

/// Sylvester–Hadamard sign matrix of order `2^k`.
pub fn gen_hadamard(k: usize) -> Result<CommMatrix> {
    check_range("k", k, 1, 8)?;
    let s = 1usize << k;
    Ok(CommMatrix::from_sign_fn(s, s, |i, j| (i & j).count_ones() % 2 == 0)?.with_label(format!("hadamard({k})")))
}

/// Seeded uniform random matrix.
pub fn random_matrix(rows: usize, cols: usize, convention: Convention, seed: u64) -> Result<CommMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = match convention {
        Convention::Boolean01 => CommMatrix::from_bool_fn(rows, cols, |_, _| rng.random::<bool>())?,
        Convention::SignPM1 => CommMatrix::from_sign_fn(rows, cols, |_, _| rng.random::<bool>())?,
    };
    Ok(m.with_label(format!("random({rows}x{cols},seed={seed})")))
}

/// Every integer vector of `[-c, c]³`, lexicographic.
pub fn sip3d_points(c: usize) -> Vec<[i64; 3]> {
    let c = c as i64;
    let mut out = Vec::new();
    for a in -c..=c {
        for b in -c..=c {
            for d in -c..=c {
                out.push([a, b, d]);
            }
        }
    }
    out
}

const SIP_ROW_SHIFT: [f64; 3] = [1.0, std::f64::consts::SQRT_2, 1.732_050_807_568_877_2];
const SIP_COL_SHIFT: [f64; 3] = [2.236_067_977_499_79, 2.449_489_742_783_178, 2.645_751_311_064_590_7];
const SIP_ETA: f64 = 1e-2;

/// Matrix of `sign⟨x, y⟩` over `x, y ∈ [-c, c]³` together with its rank-3 witness.
///
/// Cells with `⟨x, y⟩ = 0` take the sign of the perturbed product
/// `⟨x + η p, y + η q⟩` for fixed irrational directions `p, q` and `η = 10⁻²`.
/// On every other cell the perturbation cannot change the sign (it moves the
/// product by less than 1), so the matrix agrees with `sign⟨x, y⟩` wherever
/// that is defined and the perturbed vectors form a strict 3-dimensional
/// realization. The zero cells are listed in the witness's perturbation log.
pub fn sip3d_instance(c: usize) -> Result<(CommMatrix, SignWitness)> {
    check_range("C", c, 1, 4)?;
    let pts = sip3d_points(c);
    let n = pts.len();
    let u = DenseMatrix::from_fn(n, 3, |i, k| pts[i][k] as f64 + SIP_ETA * SIP_ROW_SHIFT[k]);
    let v = DenseMatrix::from_fn(n, 3, |j, k| pts[j][k] as f64 + SIP_ETA * SIP_COL_SHIFT[k]);
    let mut log = Vec::new();
    let m = CommMatrix::from_sign_fn(n, n, |i, j| {
        let exact: i64 = (0..3).map(|k| pts[i][k] * pts[j][k]).sum();
        if exact != 0 {
            return exact > 0;
        }
        log.push((i, j));
        (0..3).map(|k| u[(i, k)] * v[(j, k)]).sum::<f64>() > 0.0
    })?
    .with_label(format!("sip3d({c})"));
    let mut w = SignWitness::new(u, v);
    w.perturbation_log = log;
    Ok((m, w))
}

/// See [`sip3d_instance`].
pub fn gen_sign_inner_product_3d(c: usize) -> Result<CommMatrix> {
    Ok(sip3d_instance(c)?.0)
}

/// Points and lines of the projective plane `PG(2, q)` for prime `q`.
#[derive(Clone, Debug)]
pub struct ProjectivePlane {
    pub q: u32,
    /// Normalized homogeneous coordinates (first nonzero coordinate 1), lexicographic.
    pub points: Vec<[u32; 3]>,
    /// Each line as the sorted list of its point indices.
    pub lines: Vec<Vec<usize>>,
}

impl ProjectivePlane {
    pub fn new(q: u32) -> Result<Self> {
        if ![2, 3, 5].contains(&q) {
            return Err(Error::InvalidArgument(format!("q={q} is not a supported prime (2, 3, 5)")));
        }
        let mut points = Vec::new();
        for a in 0..q {
            for b in 0..q {
                for c in 0..q {
                    let p = [a, b, c];
                    if let Some(&first) = p.iter().find(|&&x| x != 0) {
                        if first == 1 {
                            points.push(p);
                        }
                    }
                }
            }
        }
        // Lines are in bijection with normalized dual vectors.
        let lines = points
            .iter()
            .map(|l| {
                (0..points.len())
                    .filter(|&k| (0..3).map(|t| l[t] * points[k][t]).sum::<u32>() % q == 0)
                    .collect()
            })
            .collect();
        Ok(Self { q, points, lines })
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }
}

/// Interval class of `PG(2, q)` with lexicographic line orders.
///
/// Columns are points; rows are the empty interval, every singleton, and every
/// contiguous run of length at least 2 inside a line's order.
pub fn gen_projective_intervals(q: u32) -> Result<CommMatrix> {
    let plane = ProjectivePlane::new(q)?;
    let n = plane.num_points();
    let mut rows: Vec<Vec<usize>> = vec![Vec::new()];
    rows.extend((0..n).map(|p| vec![p]));
    for line in &plane.lines {
        for len in 2..=line.len() {
            for start in 0..=line.len() - len {
                rows.push(line[start..start + len].to_vec());
            }
        }
    }
    Ok(CommMatrix::from_bool_fn(rows.len(), n, |i, j| rows[i].contains(&j))?.with_label(format!("pgint({q})")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equality_small() {
        let m = gen_equality(1).unwrap();
        assert_eq!(m.get(0, 0), 1);
        assert_eq!(m.get(0, 1), 0);
        assert!(gen_equality(0).is_err());
        assert!(gen_equality(17).is_err());
    }

    #[test]
    fn hamming_one_is_displayed_m1() {
        let m = gen_hamming_distance(1, 1).unwrap();
        assert_eq!((m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1)), (0, 1, 1, 0));
        assert_eq!(gen_hamming_distance(3, 0).unwrap().to_bool(), gen_equality(3).unwrap().to_bool());
        assert!(gen_hamming_distance(3, 4).is_err());
    }

    #[test]
    fn greater_than_orientation() {
        let m = gen_greater_than(2).unwrap();
        assert_eq!((m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1)), (0, 0, 1, 0));
    }

    #[test]
    fn sip3d_simple_cells() {
        let (m, w) = sip3d_instance(1).unwrap();
        let pts = sip3d_points(1);
        let idx = |p: [i64; 3]| pts.iter().position(|&q| q == p).unwrap();
        assert_eq!(m.get(idx([1, 0, 0]), idx([1, 0, 0])), 1);
        assert_eq!(m.get(idx([1, 0, 0]), idx([-1, 0, 0])), -1);
        assert_eq!(m.rows(), 27);
        assert!(!w.perturbation_log.is_empty());
    }

    #[test]
    fn projective_plane_sizes() {
        for (q, n) in [(2u32, 7usize), (3, 13), (5, 31)] {
            let p = ProjectivePlane::new(q).unwrap();
            assert_eq!(p.num_points(), n);
            assert_eq!(p.lines.len(), n);
            assert!(p.lines.iter().all(|l| l.len() == q as usize + 1));
        }
        assert!(ProjectivePlane::new(4).is_err());
    }

    #[test]
    fn random_is_seeded() {
        let a = random_matrix(4, 5, Convention::Boolean01, 9).unwrap();
        let b = random_matrix(4, 5, Convention::Boolean01, 9).unwrap();
        assert_eq!(a, b);
    }
}
