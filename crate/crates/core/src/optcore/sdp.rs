//! Operator-splitting solver for the factorization-norm cone program
//!
//! ```text
//!   min t   s.t.   X = [[P, N], [Nᵀ, Q]] ⪰ 0,   diag(X) ≤ t,   lo ≤ N ≤ hi
//! ```
//!
//! where the off-diagonal block `N` is constrained entrywise (fixed, boxed, or
//! one-sided) and the diagonal blocks are free apart from their diagonals.
//!
//! The iteration is scaled ADMM on `X ∈ PSD`, `Z ∈ affine set`, `X = Z`.
//! Every result carries two certificates computed from the iterates:
//! a factorization of a feasible `X` (upper bound) and a dual PSD matrix
//! `[[D_a, G], [Gᵀ, D_b]]` with diagonal `D_a, D_b` (lower bound).

use crate::linalg::{spectral_norm, sym_eigen_warm, DenseMatrix, SymEigen};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MAX_ORDER: usize = 160;

#[derive(Clone, Debug)]
pub struct ConeProgram<T> {
    rows: usize,
    cols: usize,
    /// Entrywise bounds of the off-diagonal block (`±∞` allowed).
    pub lo: DenseMatrix<T>,
    pub hi: DenseMatrix<T>,
}

impl<T: Real> ConeProgram<T> {
    /// Off-diagonal block fixed to `m`.
    pub fn fixed(m: &DenseMatrix<T>) -> Self {
        Self { rows: m.rows(), cols: m.cols(), lo: m.clone(), hi: m.clone() }
    }

    pub fn boxed(lo: DenseMatrix<T>, hi: DenseMatrix<T>) -> Result<Self> {
        if lo.rows() != hi.rows() || lo.cols() != hi.cols() {
            return Err(Error::Dimension("box bounds differ in shape".into()));
        }
        if lo.as_slice().iter().zip(hi.as_slice()).any(|(a, b)| a > b || a.is_nan() || b.is_nan()) {
            return Err(Error::InvalidArgument("empty box".into()));
        }
        Ok(Self { rows: lo.rows(), cols: lo.cols(), lo, hi })
    }

    pub fn order(&self) -> usize {
        self.rows + self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn clamp(&self, i: usize, j: usize, x: T) -> T {
        x.max(self.lo[(i, j)]).min(self.hi[(i, j)])
    }

    /// `min_{lo ≤ N ≤ hi} ⟨C, N⟩`; `-∞` when unbounded.
    pub fn min_linear(&self, c: &DenseMatrix<T>) -> T {
        let mut s = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let g = c[(i, j)];
                if g == T::zero() {
                    continue;
                }
                let b = if g > T::zero() { self.lo[(i, j)] } else { self.hi[(i, j)] };
                if !b.is_finite() {
                    return T::neg_infinity();
                }
                s = s + g * b;
            }
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdpStatus {
    Converged,
    NonConverged,
}

#[derive(Clone, Debug)]
pub struct SdpOptions<T> {
    /// Target on `upper − lower` (relative to `1 + |value|`) and on the residuals.
    pub tol: T,
    pub max_iter: usize,
    /// Iterations between certificate evaluations.
    pub check_every: usize,
}

impl<T: Real> Default for SdpOptions<T> {
    fn default() -> Self {
        Self { tol: T::lit(1e-5), max_iter: 20_000, check_every: 25 }
    }
}

/// Factorization `N = A B` of a feasible off-diagonal block.
#[derive(Clone, Debug)]
pub struct UpperCertificate<T> {
    pub a: DenseMatrix<T>,
    pub b: DenseMatrix<T>,
    /// `max_i ‖A_i‖ · max_j ‖B^j‖`.
    pub value: T,
}

/// Dual certificate: `[[diag(a), G], [Gᵀ, diag(b)]] ⪰ 0`.
/// Certifies `t ≥ -max_N ⟨G, N⟩ / √(Σa · Σb)` over the feasible blocks `N`.
#[derive(Clone, Debug)]
pub struct DualCertificate<T> {
    pub a: Vec<T>,
    pub b: Vec<T>,
    pub g: DenseMatrix<T>,
    pub value: T,
}

#[derive(Clone, Debug)]
pub struct SdpSolution<T> {
    pub status: SdpStatus,
    /// Reported objective, clamped into `[lower, upper]`.
    pub value: T,
    /// Feasible primal block (after correction) whose diagonal bounds `upper`.
    pub primal: DenseMatrix<T>,
    pub upper: UpperCertificate<T>,
    pub lower: DualCertificate<T>,
    pub primal_residual: T,
    pub dual_residual: T,
    pub iterations: usize,
}

impl<T: Real> SdpSolution<T> {
    pub fn gap(&self) -> T {
        self.upper.value - self.lower.value
    }
}

/// Solves the program; always returns the best certified bracket found.
pub fn solve_sdp<T: Real>(cp: &ConeProgram<T>, opts: &SdpOptions<T>) -> Result<SdpSolution<T>> {
    let n = cp.order();
    if n > MAX_ORDER {
        return Err(Error::SizeLimit(format!("PSD block of order {n} (cap {MAX_ORDER})")));
    }
    if n == 0 {
        return Err(Error::Dimension("empty cone program".into()));
    }
    let (r, c) = (cp.rows, cp.cols);
    let scale = {
        let m = cp.lo.as_slice().iter().chain(cp.hi.as_slice()).filter(|x| x.is_finite()).fold(T::zero(), |a, &b| a.max(b.abs()));
        if m > T::zero() {
            m
        } else {
            T::one()
        }
    };
    let mut x = DenseMatrix::<T>::zeros(n, n);
    let mut z = DenseMatrix::<T>::zeros(n, n);
    let mut u = DenseMatrix::<T>::zeros(n, n);
    let mut rho = T::one() / (scale * T::lit(n as f64).sqrt());
    let mut basis: Option<DenseMatrix<T>> = None;
    let mut best_upper: Option<(UpperCertificate<T>, DenseMatrix<T>)> = None;
    let mut best_lower: Option<DualCertificate<T>> = None;
    let mut t = T::zero();
    let mut pres = T::infinity();
    let mut dres = T::infinity();
    let mut iterations = 0;
    let mut status = SdpStatus::NonConverged;
    for k in 1..=opts.max_iter {
        iterations = k;
        let z_prev = z.clone();
        // Z-step: project X + U onto the affine set, with t chosen optimally.
        let v = add(&x, &u);
        t = affine_step(cp, &v, rho, &mut z);
        // X-step: PSD projection of Z − U.
        let w = sub(&z, &u);
        let eig = sym_eigen_warm(&w, basis.as_ref());
        x = eig.reconstruct_with(|l| l.max(T::zero()));
        basis = Some(eig.vectors);
        // Dual update.
        let diff = sub(&x, &z);
        u = add(&u, &diff);
        pres = diff.frobenius();
        dres = rho * sub(&z, &z_prev).frobenius();
        if k % 20 == 0 {
            let mu = T::lit(10.0);
            if pres > mu * dres {
                rho = rho * T::lit(2.0);
                u = u.scale(T::lit(0.5));
            } else if dres > mu * pres {
                rho = rho * T::lit(0.5);
                u = u.scale(T::lit(2.0));
            }
        }
        if k % opts.check_every == 0 || k == opts.max_iter {
            let up = upper_certificate(cp, &x);
            if best_upper.as_ref().is_none_or(|(b, _)| up.0.value < b.value) {
                best_upper = Some(up);
            }
            let lo = dual_certificate(cp, &u.scale(rho), r, c);
            if best_lower.as_ref().is_none_or(|b| lo.value > b.value) {
                best_lower = Some(lo);
            }
            let ub = best_upper.as_ref().map(|b| b.0.value).unwrap_or(T::infinity());
            let lb = best_lower.as_ref().map(|b| b.value).unwrap_or(T::neg_infinity());
            if ub - lb <= opts.tol * (T::one() + ub.abs()) {
                status = SdpStatus::Converged;
                break;
            }
        }
    }
    let (upper, primal) = best_upper.unwrap_or_else(|| upper_certificate(cp, &x));
    let lower = best_lower.unwrap_or_else(|| dual_certificate(cp, &u.scale(rho), r, c));
    let value = t.max(lower.value).min(upper.value);
    Ok(SdpSolution { status, value, primal, upper, lower, primal_residual: pres, dual_residual: dres, iterations })
}

fn add<T: Real>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> DenseMatrix<T> {
    DenseMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)] + b[(i, j)])
}

fn sub<T: Real>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> DenseMatrix<T> {
    a.sub(b)
}

/// Writes the affine projection of `v` into `z` and returns the optimal `t`.
fn affine_step<T: Real>(cp: &ConeProgram<T>, v: &DenseMatrix<T>, rho: T, z: &mut DenseMatrix<T>) -> T {
    let n = cp.order();
    let r = cp.rows;
    let half = T::lit(0.5);
    for i in 0..n {
        for j in 0..i {
            let s = (v[(i, j)] + v[(j, i)]) * half;
            let val = if i >= r && j < r { cp.clamp(j, i - r, s) } else { s };
            z[(i, j)] = val;
            z[(j, i)] = val;
        }
    }
    let diag: Vec<T> = (0..n).map(|i| v[(i, i)]).collect();
    let t = diag_epigraph(&diag, rho);
    for (i, d) in diag.iter().enumerate() {
        z[(i, i)] = d.min(t);
    }
    t
}

/// `argmin_t t + (ρ/2) Σ_{v_i > t} (t − v_i)²`.
pub fn diag_epigraph<T: Real>(v: &[T], rho: T) -> T {
    let mut s: Vec<T> = v.to_vec();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut sum = T::zero();
    for k in 0..s.len() {
        sum = sum + s[k];
        let t = (sum - T::one() / rho) / T::lit((k + 1) as f64);
        let next = if k + 1 < s.len() { s[k + 1] } else { T::neg_infinity() };
        if t >= next {
            return t;
        }
    }
    unreachable!("the last candidate always satisfies the bound")
}

fn top_right<T: Real>(x: &DenseMatrix<T>, r: usize, c: usize) -> DenseMatrix<T> {
    DenseMatrix::from_fn(r, c, |i, j| x[(i, r + j)])
}

/// Makes a PSD block with an exactly feasible off-diagonal part out of an
/// (approximately) PSD iterate, and factors it.
fn upper_certificate<T: Real>(cp: &ConeProgram<T>, x: &DenseMatrix<T>) -> (UpperCertificate<T>, DenseMatrix<T>) {
    let (r, c) = (cp.rows, cp.cols);
    let n = r + c;
    let eig = sym_eigen_warm(x, None);
    let y = eig.reconstruct_with(|l| l.max(T::zero()));
    let off = top_right(&y, r, c);
    let target = DenseMatrix::from_fn(r, c, |i, j| cp.clamp(i, j, off[(i, j)]));
    let e = target.sub(&off);
    let shift = spectral_norm(&e);
    let mut yc = y.clone();
    for i in 0..r {
        for j in 0..c {
            yc[(i, r + j)] = target[(i, j)];
            yc[(r + j, i)] = target[(i, j)];
        }
    }
    // Extra margin so rounding in the factorization cannot flip a sign.
    let pad = shift * T::lit(1.0 + 1e-9) + T::kernel_eps() * (T::one() + y.max_abs()) * T::lit(n as f64);
    for i in 0..n {
        yc[(i, i)] = yc[(i, i)] + pad;
    }
    let cert = factor_block(&yc, r, c);
    (cert, yc)
}

/// Splits a PSD block into `A` (rows) and `B` (columns) reproducing its off-diagonal part.
fn factor_block<T: Real>(y: &DenseMatrix<T>, r: usize, c: usize) -> UpperCertificate<T> {
    let n = r + c;
    let eig: SymEigen<T> = sym_eigen_warm(y, None);
    let keep: Vec<usize> = (0..n).filter(|&k| eig.values[k] > T::zero()).collect();
    let g = DenseMatrix::from_fn(n, keep.len().max(1), |i, k| {
        if keep.is_empty() {
            T::zero()
        } else {
            eig.vectors[(i, keep[k])] * eig.values[keep[k]].sqrt()
        }
    });
    let d = g.cols();
    let mut a = DenseMatrix::from_fn(r, d, |i, k| g[(i, k)]);
    let mut b = DenseMatrix::from_fn(d, c, |k, j| g[(r + j, k)]);
    let ra = a.row_norms().into_iter().fold(T::zero(), T::max);
    let cb = b.col_norms().into_iter().fold(T::zero(), T::max);
    if ra > T::zero() && cb > T::zero() {
        let s = (cb / ra).sqrt();
        a = a.scale(s);
        b = b.scale(T::one() / s);
    }
    let value = a.row_norms().into_iter().fold(T::zero(), T::max) * b.col_norms().into_iter().fold(T::zero(), T::max);
    UpperCertificate { a, b, value }
}

/// Builds a valid dual certificate from an approximate multiplier matrix.
fn dual_certificate<T: Real>(cp: &ConeProgram<T>, lam: &DenseMatrix<T>, r: usize, c: usize) -> DualCertificate<T> {
    let floor = T::lit(1e-12);
    let sym = DenseMatrix::from_fn(lam.rows(), lam.cols(), |i, j| (lam[(i, j)] + lam[(j, i)]) * T::lit(0.5));
    let a: Vec<T> = (0..r).map(|i| sym[(i, i)].max(T::zero())).collect();
    let b: Vec<T> = (0..c).map(|j| sym[(r + j, r + j)].max(T::zero())).collect();
    let g = top_right(&sym, r, c);
    certify_dual(cp, a, b, g, floor)
}

/// Scales `g` so the dual block is PSD and evaluates the bound.
pub fn certify_dual<T: Real>(cp: &ConeProgram<T>, mut a: Vec<T>, mut b: Vec<T>, mut g: DenseMatrix<T>, floor: T) -> DualCertificate<T> {
    let (r, c) = (cp.rows, cp.cols);
    let sa: T = a.iter().copied().sum();
    let sb: T = b.iter().copied().sum();
    let fa = floor * (T::one() + sa);
    let fb = floor * (T::one() + sb);
    for x in a.iter_mut() {
        *x = x.max(fa);
    }
    for x in b.iter_mut() {
        *x = x.max(fb);
    }
    // Drop entries whose sign makes the bound unbounded below.
    for i in 0..r {
        for j in 0..c {
            let gij = g[(i, j)];
            let bad = (gij > T::zero() && !cp.hi[(i, j)].is_finite()) || (gij < T::zero() && !cp.lo[(i, j)].is_finite());
            if bad {
                g[(i, j)] = T::zero();
            }
        }
    }
    let k = DenseMatrix::from_fn(r, c, |i, j| g[(i, j)] / (a[i].sqrt() * b[j].sqrt()));
    let s = spectral_norm(&k) * T::lit(1.0 + 1e-10);
    if s > T::one() {
        g = g.scale(T::one() / s);
    }
    let sa: T = a.iter().copied().sum();
    let sb: T = b.iter().copied().sum();
    let m = cp.min_linear(&g.scale(-T::one()));
    let value = if m.is_finite() { m / (sa * sb).sqrt() } else { T::neg_infinity() };
    DualCertificate { a, b, g, value }
}
