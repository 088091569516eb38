//! Communication-complexity measures on explicit matrices.
//!
//! The crate computes exact combinatorial measures (rank, protocol depth,
//! cover and partition numbers, VC dimension, small sign-rank), certified
//! LP and SDP lower bounds (discrepancy, rectangle and partition bounds, the
//! γ₂ factorization-norm family), simulates public-coin protocols, and checks
//! the known inequalities between all of these on concrete instances.

pub mod error;
pub mod facnorm;
pub mod hierarchy;
pub mod exactcomb;
pub mod linalg;
pub mod lpbounds;
pub mod matrices;
pub mod optcore;
pub mod protosim;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
pub use matrices::{BitSet, BitString, CommMatrix, Convention, DistKind, Distribution, Rectangle};
pub use report::{MeasureKind, MeasureReport, MeasureValue, Outcome, RelationOutcome, SkippedMeasure};
pub use scalar::{Field, Real};

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;
/// Dense `f64` matrix.
pub type Mat = linalg::DenseMatrix<f64>;
/// Floating-point linear program.
pub type Lp = optcore::LinearProgram<f64>;
/// Exact rational linear program.
pub type ExactLp = optcore::LinearProgram<Rational>;
