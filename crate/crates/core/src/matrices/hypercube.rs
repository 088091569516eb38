use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Eigenvalues `n - 2k` of the `n`-cube adjacency matrix with multiplicities `C(n, k)`.
pub fn hypercube_spectrum(n: usize) -> Vec<(i64, BigInt)> {
    (0..=n).map(|k| (n as i64 - 2 * k as i64, binomial(n, k))).collect()
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `(1/2ⁿ)·Σₖ C(n,k)·|n − 2k|`: trace norm of the uniformly reweighted `HD₁`
/// matrix, a lower bound on its `γ₂` norm.
pub fn hypercube_trace_lower(n: usize) -> Result<BigRational> {
    if !(1..=20).contains(&n) {
        return Err(Error::SizeLimit(format!("n={n} outside 1..=20")));
    }
    let sum: BigInt = hypercube_spectrum(n).into_iter().map(|(ev, mult)| mult * BigInt::from(ev.abs())).sum();
    Ok(BigRational::new(sum, BigInt::one() << n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(hypercube_trace_lower(1).unwrap(), BigRational::one());
        assert_eq!(hypercube_trace_lower(2).unwrap(), BigRational::one());
        assert_eq!(hypercube_trace_lower(4).unwrap(), BigRational::new(3.into(), 2.into()));
        assert!(hypercube_trace_lower(0).is_err());
    }

    #[test]
    fn multiplicities_sum_to_dimension() {
        for n in 1..=10 {
            let total: BigInt = hypercube_spectrum(n).into_iter().map(|(_, m)| m).sum();
            assert_eq!(total, BigInt::one() << n);
        }
    }
}
