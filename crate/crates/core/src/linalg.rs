//! Dense real matrices with the few spectral kernels the toolkit needs:
//! cyclic Jacobi for symmetric eigenproblems and one-sided Jacobi for SVD.

use std::ops::{Index, IndexMut};

use crate::scalar::Real;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds from row-major data. Panics when the length does not match.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length must equal rows*cols");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d = *d + a * b;
                }
            }
        }
        out
    }

    pub fn mat_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn hadamard(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a * b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|x| x * c)
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// `diag(u) * self * diag(v)`.
    pub fn scale_rows_cols(&self, u: &[T], v: &[T]) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| u[i] * self[(i, j)] * v[j])
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn row_norms(&self) -> Vec<T> {
        (0..self.rows).map(|i| norm(self.row(i))).collect()
    }

    pub fn col_norms(&self) -> Vec<T> {
        (0..self.cols).map(|j| norm(&self.col(j))).collect()
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    /// Copy of the `(r0..r0+h, c0..c0+w)` block.
    pub fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> Self {
        Self::from_fn(h, w, |i, j| self[(r0 + i, c0 + j)])
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Symmetric eigendecomposition `A = Q diag(λ) Qᵀ`. Eigenvectors are the columns of `Q`.
#[derive(Clone, Debug)]
pub struct SymEigen<T> {
    pub values: Vec<T>,
    pub vectors: DenseMatrix<T>,
}

impl<T: Real> SymEigen<T> {
    /// Reassembles `Q diag(f(λ)) Qᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> DenseMatrix<T> {
        let n = self.values.len();
        let fl: Vec<T> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = DenseMatrix::zeros(n, n);
        for k in 0..n {
            if fl[k] == T::zero() {
                continue;
            }
            for i in 0..n {
                let a = self.vectors[(i, k)] * fl[k];
                if a == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j] + a * self.vectors[(j, k)];
                }
            }
        }
        out
    }
}

/// Cyclic Jacobi eigensolver.
pub fn sym_eigen<T: Real>(a: &DenseMatrix<T>) -> SymEigen<T> {
    sym_eigen_warm(a, None)
}

/// Cyclic Jacobi eigensolver started from an approximate eigenbasis `warm`
/// (rotates `warmᵀ A warm` instead of `A`, which is nearly diagonal when the
/// basis is good).
pub fn sym_eigen_warm<T: Real>(a: &DenseMatrix<T>, warm: Option<&DenseMatrix<T>>) -> SymEigen<T> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "eigen input must be square");
    let (mut w, mut q) = match warm {
        Some(q0) if q0.rows() == n && q0.cols() == n => (q0.transpose().matmul(a).matmul(q0), q0.clone()),
        _ => (a.clone(), DenseMatrix::identity(n)),
    };
    for i in 0..n {
        for j in 0..i {
            let s = (w[(i, j)] + w[(j, i)]) * T::lit(0.5);
            w[(i, j)] = s;
            w[(j, i)] = s;
        }
    }
    let eps = T::kernel_eps();
    for _sweep in 0..60 {
        let off: T = (0..n).map(|i| (0..i).map(|j| w[(i, j)] * w[(i, j)]).sum::<T>()).sum();
        let diag: T = (0..n).map(|i| w[(i, i)] * w[(i, i)]).sum();
        if off <= eps * eps * (diag + off) || off == T::zero() {
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apr = w[(p, r)];
                if apr.abs() <= T::min_positive_value() {
                    continue;
                }
                let app = w[(p, p)];
                let arr = w[(r, r)];
                let theta = (arr - app) / (T::lit(2.0) * apr);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let wkp = w[(k, p)];
                    let wkr = w[(k, r)];
                    w[(k, p)] = c * wkp - s * wkr;
                    w[(k, r)] = s * wkp + c * wkr;
                }
                for k in 0..n {
                    let wpk = w[(p, k)];
                    let wrk = w[(r, k)];
                    w[(p, k)] = c * wpk - s * wrk;
                    w[(r, k)] = s * wpk + c * wrk;
                }
                for k in 0..n {
                    let qkp = q[(k, p)];
                    let qkr = q[(k, r)];
                    q[(k, p)] = c * qkp - s * qkr;
                    q[(k, r)] = s * qkp + c * qkr;
                }
            }
        }
    }
    let values = (0..n).map(|i| w[(i, i)]).collect();
    SymEigen { values, vectors: q }
}

/// Thin singular value decomposition `A = U diag(σ) Vᵀ`, σ sorted descending.
#[derive(Clone, Debug)]
pub struct Svd<T> {
    pub u: DenseMatrix<T>,
    pub sigma: Vec<T>,
    pub v: DenseMatrix<T>,
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd<T: Real>(a: &DenseMatrix<T>) -> Svd<T> {
    if a.rows() < a.cols() {
        let t = svd(&a.transpose());
        return Svd { u: t.v, sigma: t.sigma, v: t.u };
    }
    let (m, n) = (a.rows(), a.cols());
    // Work on columns: store Aᵀ so columns are contiguous rows.
    let mut g: Vec<Vec<T>> = (0..n).map(|j| a.col(j)).collect();
    let mut v: Vec<Vec<T>> = (0..n).map(|j| (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect()).collect();
    let eps = T::kernel_eps();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for r in (p + 1)..n {
                let alpha = dot(&g[p], &g[p]);
                let beta = dot(&g[r], &g[r]);
                let gamma = dot(&g[p], &g[r]);
                if gamma.abs() <= eps * (alpha * beta).sqrt() || gamma == T::zero() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let (gp, gr) = two_mut(&mut g, p, r);
                for k in 0..m {
                    let x = gp[k];
                    let y = gr[k];
                    gp[k] = c * x - s * y;
                    gr[k] = s * x + c * y;
                }
                let (vp, vr) = two_mut(&mut v, p, r);
                for k in 0..n {
                    let x = vp[k];
                    let y = vr[k];
                    vp[k] = c * x - s * y;
                    vr[k] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let sig: Vec<T> = g.iter().map(|c| norm(c)).collect();
    order.sort_by(|&i, &j| sig[j].partial_cmp(&sig[i]).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(&j)));
    let mut u = DenseMatrix::zeros(m, n);
    let mut vm = DenseMatrix::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    let tiny = sig.iter().fold(T::zero(), |a, &b| a.max(b)) * eps;
    for (col, &k) in order.iter().enumerate() {
        sigma.push(sig[k]);
        for i in 0..n {
            vm[(i, col)] = v[k][i];
        }
        if sig[k] > tiny && sig[k] > T::zero() {
            for i in 0..m {
                u[(i, col)] = g[k][i] / sig[k];
            }
        }
    }
    complete_orthonormal(&mut u, &sigma, tiny);
    Svd { u, sigma, v: vm }
}

fn two_mut<X>(v: &mut [X], a: usize, b: usize) -> (&mut X, &mut X) {
    debug_assert!(a < b);
    let (lo, hi) = v.split_at_mut(b);
    (&mut lo[a], &mut hi[0])
}

/// Fills left singular vectors of (near-)zero singular values with an
/// orthonormal completion so that `U` has orthonormal columns.
fn complete_orthonormal<T: Real>(u: &mut DenseMatrix<T>, sigma: &[T], tiny: T) {
    let (m, n) = (u.rows(), u.cols());
    let mut basis: Vec<Vec<T>> = Vec::new();
    for j in 0..n {
        if sigma[j] > tiny && sigma[j] > T::zero() {
            basis.push(u.col(j));
        }
    }
    let mut next_e = 0;
    for j in 0..n {
        if sigma[j] > tiny && sigma[j] > T::zero() {
            continue;
        }
        while next_e < m {
            let mut cand: Vec<T> = (0..m).map(|i| if i == next_e { T::one() } else { T::zero() }).collect();
            next_e += 1;
            for _ in 0..2 {
                for b in &basis {
                    let d = dot(&cand, b);
                    for (c, &bi) in cand.iter_mut().zip(b) {
                        *c = *c - d * bi;
                    }
                }
            }
            let nn = norm(&cand);
            if nn > T::lit(1e-3) {
                for c in cand.iter_mut() {
                    *c = *c / nn;
                }
                for i in 0..m {
                    u[(i, j)] = cand[i];
                }
                basis.push(cand);
                break;
            }
        }
    }
}

pub fn singular_values<T: Real>(a: &DenseMatrix<T>) -> Vec<T> {
    svd(a).sigma
}

/// Sum of singular values.
pub fn trace_norm<T: Real>(a: &DenseMatrix<T>) -> T {
    singular_values(a).into_iter().sum()
}

/// Largest singular value.
pub fn spectral_norm<T: Real>(a: &DenseMatrix<T>) -> T {
    singular_values(a).into_iter().fold(T::zero(), |m, s| m.max(s))
}

/// Orthogonal polar factor `U Vᵀ`, the maximizer of `⟨W, A⟩` over `‖W‖_op ≤ 1`.
pub fn polar_factor<T: Real>(a: &DenseMatrix<T>) -> DenseMatrix<T> {
    let s = svd(a);
    s.u.matmul(&s.v.transpose())
}
