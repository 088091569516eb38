//! The γ₂ factorization norm and its approximate variants.
//!
//! `γ₂(M) = min { max_i ‖A_i‖ · max_j ‖B^j‖ : AB = M }` is computed as the
//! cone program `min t` over `[[P, M], [Mᵀ, Q]] ⪰ 0` with diagonals at most
//! `t`. The variants `γ₂^α` and `γ₂^∞` replace the fixed block `M` by any `N`
//! with `1 ≤ M_ij N_ij ≤ α`.
//!
//! Every value comes with a factorization (upper bound) and a pair of unit
//! vectors whose reweighted trace norm `‖uvᵀ ∘ M‖_tr` is a lower bound.

use crate::error::{Error, Result};
use crate::linalg::{polar_factor, svd, trace_norm, DenseMatrix};
use crate::matrices::{CommMatrix, Convention};
use crate::optcore::{certify_dual, solve_sdp, ConeProgram, SdpOptions, SdpStatus, MAX_ORDER};
use crate::scalar::Real;

pub const DEFAULT_TOL: f64 = 1e-5;
const UNIT_TOL: f64 = 1e-9;
const POLISH_STEPS: usize = 60;
const SDP_MAX_ITER: usize = 20_000;

/// Approximation parameter of the variant norms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Alpha {
    Finite(f64),
    Infinite,
}

impl Alpha {
    fn validate(self) -> Result<()> {
        match self {
            Alpha::Finite(a) if !(a >= 1.0) || !a.is_finite() => {
                Err(Error::InvalidArgument(format!("alpha must be a finite number >= 1 or infinite, got {a}")))
            }
            _ => Ok(()),
        }
    }
}

/// A γ₂ computation request.
#[derive(Clone, Debug)]
pub struct Gamma2Request {
    pub matrix: CommMatrix,
    /// `None` for plain γ₂.
    pub alpha: Option<Alpha>,
    pub tol: f64,
}

impl Gamma2Request {
    pub fn new(matrix: CommMatrix) -> Self {
        Self { matrix, alpha: None, tol: DEFAULT_TOL }
    }

    pub fn with_alpha(mut self, alpha: Alpha) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", self.tol)));
        }
        if let Some(a) = self.alpha {
            a.validate()?;
            self.matrix.require(Convention::SignPM1, "gamma2 variant")?;
        }
        check_order(self.matrix.rows(), self.matrix.cols())
    }

    pub fn solve(&self) -> Result<Gamma2<f64>> {
        self.validate()?;
        match self.alpha {
            None => gamma2(&self.matrix, self.tol),
            Some(a) => gamma2_alpha(&self.matrix, a, self.tol),
        }
    }
}

/// Unit vectors `u, v` with `value = ‖uvᵀ ∘ M‖_tr`.
#[derive(Clone, Debug)]
pub struct TraceCertificate<T> {
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub value: T,
}

/// `AB` reproduces the certified block; `value = max_i ‖A_i‖ · max_j ‖B^j‖`.
#[derive(Clone, Debug)]
pub struct FactorCertificate<T> {
    pub a: DenseMatrix<T>,
    pub b: DenseMatrix<T>,
    pub value: T,
}

#[derive(Clone, Debug)]
pub struct Gamma2Certificate<T> {
    pub lower: TraceCertificate<T>,
    pub upper: FactorCertificate<T>,
}

#[derive(Clone, Debug)]
pub struct Gamma2<T> {
    pub value: T,
    /// Certified lower bound on the requested norm.
    pub lower: T,
    /// Certified upper bound on the requested norm.
    pub upper: T,
    pub status: SdpStatus,
    /// Block the certificate refers to: `M` itself, or the realized `N` of a variant.
    pub block: DenseMatrix<T>,
    pub certificate: Gamma2Certificate<T>,
    pub iterations: usize,
}

fn check_order(rows: usize, cols: usize) -> Result<()> {
    if rows + cols > MAX_ORDER {
        return Err(Error::SizeLimit(format!("gamma2 needs rows+cols <= {MAX_ORDER}, got {}", rows + cols)));
    }
    Ok(())
}

/// `γ₂` of the matrix's stored entries (0/1 or ±1).
pub fn gamma2(m: &CommMatrix, tol: f64) -> Result<Gamma2<f64>> {
    gamma2_dense(&m.to_dense(), tol)
}

/// `γ₂^α` of a sign matrix.
pub fn gamma2_alpha(m: &CommMatrix, alpha: Alpha, tol: f64) -> Result<Gamma2<f64>> {
    alpha.validate()?;
    m.require(Convention::SignPM1, "gamma2_alpha")?;
    gamma2_alpha_dense(&m.to_sign_dense(), alpha, tol)
}

/// `γ₂^∞` of a sign matrix.
pub fn gamma2_inf(m: &CommMatrix, tol: f64) -> Result<Gamma2<f64>> {
    gamma2_alpha(m, Alpha::Infinite, tol)
}

/// `γ₂` of an arbitrary real matrix.
pub fn gamma2_dense<T: Real>(m: &DenseMatrix<T>, tol: T) -> Result<Gamma2<T>> {
    check_order(m.rows(), m.cols())?;
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    if m.max_abs() == T::zero() {
        let (r, c) = (m.rows(), m.cols());
        let cert = Gamma2Certificate {
            lower: TraceCertificate { u: uniform(r), v: uniform(c), value: T::zero() },
            upper: FactorCertificate { a: DenseMatrix::zeros(r, 1), b: DenseMatrix::zeros(1, c), value: T::zero() },
        };
        return Ok(Gamma2 { value: T::zero(), lower: T::zero(), upper: T::zero(), status: SdpStatus::Converged, block: m.clone(), certificate: cert, iterations: 0 });
    }
    let cp = ConeProgram::fixed(m);
    let sol = solve_sdp(&cp, &sdp_options(tol))?;
    let start = dual_vectors(&sol.lower.a, &sol.lower.b);
    let lower = polish(m, start);
    let lower_value = lower.value.max(sol.lower.value);
    let upper = FactorCertificate { a: sol.upper.a, b: sol.upper.b, value: sol.upper.value };
    let value = sol.value.max(lower_value).min(upper.value);
    Ok(Gamma2 {
        value,
        lower: lower_value,
        upper: upper.value,
        status: sol.status,
        block: m.clone(),
        certificate: Gamma2Certificate { lower, upper },
        iterations: sol.iterations,
    })
}

/// `γ₂^α` of a real `±1` matrix.
pub fn gamma2_alpha_dense<T: Real>(m: &DenseMatrix<T>, alpha: Alpha, tol: T) -> Result<Gamma2<T>> {
    alpha.validate()?;
    check_order(m.rows(), m.cols())?;
    if m.as_slice().iter().any(|&x| x != T::one() && x != -T::one()) {
        return Err(Error::Convention("gamma2 variants need a ±1 matrix".into()));
    }
    let hi_mag = match alpha {
        Alpha::Finite(a) => T::lit(a),
        Alpha::Infinite => T::infinity(),
    };
    let lo = m.map(|s| if s > T::zero() { T::one() } else { -hi_mag });
    let hi = m.map(|s| if s > T::zero() { hi_mag } else { -T::one() });
    let cp = ConeProgram::boxed(lo, hi)?;
    let sol = solve_sdp(&cp, &sdp_options(tol))?;
    let block = sol.upper.a.matmul(&sol.upper.b);
    let start = dual_vectors(&sol.lower.a, &sol.lower.b);
    let trace = polish(&block, start);
    let lower_value = sol.lower.value.max(variant_trace_lower(&cp, m, &trace));
    let upper = FactorCertificate { a: sol.upper.a, b: sol.upper.b, value: sol.upper.value };
    let value = sol.value.max(lower_value).min(upper.value);
    Ok(Gamma2 {
        value,
        lower: lower_value,
        upper: upper.value,
        status: sol.status,
        block,
        certificate: Gamma2Certificate { lower: trace, upper },
        iterations: sol.iterations,
    })
}

/// Lower bound on the variant from unit vectors: the dual witness
/// `G = -(u vᵀ ∘ W)` with `W` the polar factor of `uvᵀ ∘ M`, certified on the box.
fn variant_trace_lower<T: Real>(cp: &ConeProgram<T>, m: &DenseMatrix<T>, t: &TraceCertificate<T>) -> T {
    let r = uvt_hadamard(&t.u, &t.v, m);
    let w = polar_factor(&r);
    let g = DenseMatrix::from_fn(m.rows(), m.cols(), |i, j| -(t.u[i] * t.v[j] * w[(i, j)]));
    let a: Vec<T> = t.u.iter().map(|&x| x * x).collect();
    let b: Vec<T> = t.v.iter().map(|&x| x * x).collect();
    certify_dual(cp, a, b, g, T::lit(1e-12)).value
}

fn sdp_options<T: Real>(tol: T) -> SdpOptions<T> {
    SdpOptions { tol, max_iter: SDP_MAX_ITER, ..Default::default() }
}

fn uniform<T: Real>(n: usize) -> Vec<T> {
    vec![T::one() / T::lit(n as f64).sqrt(); n]
}

/// Unit vectors `√(a/Σa)`, `√(b/Σb)` read off the dual diagonal.
fn dual_vectors<T: Real>(a: &[T], b: &[T]) -> Option<(Vec<T>, Vec<T>)> {
    let sa: T = a.iter().copied().sum();
    let sb: T = b.iter().copied().sum();
    if !(sa > T::zero()) || !(sb > T::zero()) {
        return None;
    }
    Some((a.iter().map(|&x| (x / sa).sqrt()).collect(), b.iter().map(|&x| (x / sb).sqrt()).collect()))
}

fn uvt_hadamard<T: Real>(u: &[T], v: &[T], m: &DenseMatrix<T>) -> DenseMatrix<T> {
    DenseMatrix::from_fn(m.rows(), m.cols(), |i, j| u[i] * v[j] * m[(i, j)])
}

/// Alternating ascent on `‖uvᵀ ∘ M‖_tr`: fix the polar factor `W`, then take
/// the top singular pair of `M ∘ W`. Starts from `start` and from uniform vectors.
fn polish<T: Real>(m: &DenseMatrix<T>, start: Option<(Vec<T>, Vec<T>)>) -> TraceCertificate<T> {
    let mut starts = vec![(uniform(m.rows()), uniform(m.cols()))];
    starts.extend(start);
    let mut best: Option<TraceCertificate<T>> = None;
    for (mut u, mut v) in starts {
        let mut value = trace_norm(&uvt_hadamard(&u, &v, m));
        for _ in 0..POLISH_STEPS {
            let w = polar_factor(&uvt_hadamard(&u, &v, m));
            let k = m.hadamard(&w);
            let s = svd(&k);
            let nu = unit(s.u.col(0));
            let nv = unit(s.v.col(0));
            let next = trace_norm(&uvt_hadamard(&nu, &nv, m));
            if !(next > value * (T::one() + T::lit(1e-12))) {
                break;
            }
            u = nu;
            v = nv;
            value = next;
        }
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(TraceCertificate { u, v, value });
        }
    }
    best.expect("at least one start")
}

fn unit<T: Real>(x: Vec<T>) -> Vec<T> {
    let n = crate::linalg::norm(&x);
    if n > T::zero() {
        x.into_iter().map(|a| a / n).collect()
    } else {
        x
    }
}

/// `‖uvᵀ ∘ M‖_tr`, a lower bound on `γ₂(M)` for unit `u`, `v`.
pub fn gamma2_lower_trace<T: Real>(m: &DenseMatrix<T>, u: &[T], v: &[T]) -> Result<T> {
    if u.len() != m.rows() || v.len() != m.cols() {
        return Err(Error::Dimension(format!(
            "weight vectors of length {}/{} for a {}x{} matrix",
            u.len(),
            v.len(),
            m.rows(),
            m.cols()
        )));
    }
    for (name, x) in [("u", u), ("v", v)] {
        let n = crate::linalg::norm(x);
        if (n - T::one()).abs() > T::lit(UNIT_TOL) {
            return Err(Error::InvalidArgument(format!("{name} must be a unit vector, norm is {n:?}")));
        }
    }
    Ok(trace_norm(&uvt_hadamard(u, v, m)))
}

/// Recomputes both sides of a certificate against `block`: the trace value,
/// the factorization value, and the factorization error `‖AB − block‖_∞`.
pub fn check_certificate<T: Real>(block: &DenseMatrix<T>, cert: &Gamma2Certificate<T>) -> Result<(T, T, T)> {
    let lower = gamma2_lower_trace(block, &cert.lower.u, &cert.lower.v)?;
    let a = &cert.upper.a;
    let b = &cert.upper.b;
    if a.rows() != block.rows() || b.cols() != block.cols() || a.cols() != b.rows() {
        return Err(Error::Dimension("factor shapes do not match the block".into()));
    }
    let upper = a.row_norms().into_iter().fold(T::zero(), T::max) * b.col_norms().into_iter().fold(T::zero(), T::max);
    let err = a.matmul(b).sub(block).max_abs();
    Ok((lower, upper, err))
}

/// True iff `γ₂(P) ≤ 2^cost_bits + tol`.
///
/// `P` holds acceptance probabilities of a protocol with `cost_bits` bits of
/// communication; the check passes exactly when the factorization-norm lower
/// bound is consistent with that cost. The decision is made on certified
/// bounds where they settle it and on the solver value otherwise.
pub fn acceptance_gamma2_check(p: &DenseMatrix<f64>, cost_bits: f64, tol: f64) -> Result<bool> {
    if p.as_slice().iter().any(|&x| !(0.0..=1.0).contains(&x)) {
        return Err(Error::Precondition("acceptance probabilities must lie in [0, 1]".into()));
    }
    let g = gamma2_dense(p, tol)?;
    let budget = 2f64.powf(cost_bits) + tol;
    Ok(if g.upper <= budget {
        true
    } else if g.lower > budget {
        false
    } else {
        g.value <= budget
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_trace_lower_is_one() {
        let i4 = DenseMatrix::<f64>::identity(4);
        let u = vec![0.5; 4];
        assert!((gamma2_lower_trace(&i4, &u, &u).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_unit_vectors_rejected() {
        let i2 = DenseMatrix::<f64>::identity(2);
        assert!(gamma2_lower_trace(&i2, &[1.0, 1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn zero_matrix_is_zero() {
        let z = DenseMatrix::<f64>::zeros(3, 2);
        assert_eq!(gamma2_dense(&z, 1e-5).unwrap().value, 0.0);
    }

    #[test]
    fn alpha_must_be_at_least_one() {
        assert!(Alpha::Finite(0.5).validate().is_err());
        assert!(Alpha::Finite(f64::NAN).validate().is_err());
        assert!(Alpha::Finite(1.0).validate().is_ok());
    }
}
