//! Scalar abstractions shared by the numeric kernels.
//!
//! Two families are used:
//!
//! * [`Real`] for the dense floating-point kernels (eigen/SVD, the SDP splitting
//!   method, Monte Carlo statistics). Implemented for `f32` and `f64`.
//! * [`Field`] for the simplex engine. Implemented for `f64` (tolerance-based
//!   comparisons) and [`BigRational`] (exact, zero tolerance), so the same LP
//!   code path can re-solve tiny programs exactly.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Floating-point scalar for the dense linear-algebra kernels.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + Sum + 'static
{
    /// Converts an `f64` literal. Never fails for the implemented types.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    /// Relative machine-level tolerance used by the iterative kernels.
    fn kernel_eps() -> Self;
}

impl Real for f32 {
    fn kernel_eps() -> Self {
        1e-6
    }
}

impl Real for f64 {
    fn kernel_eps() -> Self {
        1e-13
    }
}

/// Ordered field used by the simplex engine.
pub trait Field:
    Clone + Debug + PartialOrd + Num + Neg<Output = Self> + Signed + Send + Sync + 'static
{
    /// True when arithmetic is exact and comparisons need no tolerance.
    const EXACT: bool;

    /// Pivot and feasibility tolerance. Zero for exact types.
    fn tolerance() -> Self;

    /// Exact conversion of a finite `f64` (binary expansion for rationals).
    fn from_f64(x: f64) -> Self;

    fn to_f64(&self) -> f64;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn to_rational(&self) -> BigRational;

    fn from_rational(r: &BigRational) -> Self;

    fn is_pos(&self) -> bool {
        *self > Self::tolerance()
    }

    fn is_neg(&self) -> bool {
        *self < -Self::tolerance()
    }

    fn is_near_zero(&self) -> bool {
        !self.is_pos() && !self.is_neg()
    }
}

impl Field for f64 {
    const EXACT: bool = false;

    fn tolerance() -> Self {
        1e-9
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn to_rational(&self) -> BigRational {
        BigRational::from_float(*self).unwrap_or_else(BigRational::zero)
    }

    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r)
    }
}

impl Field for BigRational {
    const EXACT: bool = true;

    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite coefficient")
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_rational(&self) -> BigRational {
        self.clone()
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
}

/// Nearest-ish `f64` for a big rational, robust to numerators beyond `f64` range.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Scale both down by a common power of two.
    let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(900);
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    if d == 0.0 {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    } else {
        n / d
    }
}

/// `1` in any [`Field`].
pub fn one<T: Field>() -> T {
    T::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_round_trip_of_binary_fractions() {
        for x in [0.0, 1.0, -2.5, 0.375, 1e-3] {
            let r = <BigRational as Field>::from_f64(x);
            assert_eq!(rational_to_f64(&r), x);
        }
    }

    #[test]
    fn huge_rational_converts() {
        let big = BigInt::from(3u8).pow(2000u32);
        let r = BigRational::new(big.clone() * 2, big);
        assert!((rational_to_f64(&r) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exact_field_has_zero_tolerance() {
        let t = <BigRational as Field>::tolerance();
        assert!(t.is_zero());
        assert!(<BigRational as Field>::from_ratio(1, 3).is_pos());
        assert!(one::<f64>() == 1.0);
    }
}
