//! Rectangle-family lower bounds as linear programs.
//!
//! Each program is solved on the side with one variable per cell. The
//! exponentially many rectangle constraints are generated lazily from a
//! maximum-weight rectangle oracle, and every result carries a bracket
//! `[lower, upper]` on the true optimum.

mod bounds;
mod family;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrices::{CommMatrix, Distribution, Rectangle};
use crate::optcore::{OracleMode, RectOracle, DEFAULT_MAX_CUTS, EXACT_SIDE_CAP, MAX_VARS};

pub use bounds::{
    discrepancy, discrepancy_under, fontes_family, partition_bound, product_discrepancy_upper,
    rectangle_bound_candidates, rectangle_bound_conventional, rectangle_bound_lp, relaxed_partition_bound,
    smooth_rectangle_bound_lp, weak_regularity, FontesKind,
};
pub use family::{solve_rect_program, CellFamily, RectProgramOutcome};

/// Largest `rows + cols` for which the exhaustive (rows, cols) enumeration of
/// the conventional rectangle bound and the full-enumeration programs run.
pub const ENUMERATION_CAP: usize = 24;
/// Largest `rows + cols` accepted with [`BoundConfig::full_enumeration`].
pub const FULL_PROGRAM_CAP: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundKind {
    /// Converged with an exact oracle; `lower` and `upper` agree to solver tolerance.
    Exact,
    LowerBoundOnly,
    UpperBoundOnly,
    /// No admissible object exists; the value is `+∞`.
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Exactness {
    ExactOracle,
    Heuristic,
}

#[derive(Clone, Debug, Serialize)]
pub struct RectWeight {
    pub rect: Rectangle,
    pub label: Option<bool>,
    pub weight: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Certificate {
    pub distribution: Option<Distribution>,
    /// Feasible point of the maximization side.
    pub point: Vec<f64>,
    /// Primal rectangle weights read off the active cuts.
    pub rectangles: Vec<RectWeight>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundResult {
    pub value: f64,
    pub kind: BoundKind,
    /// Certified lower bound on the quantity (may be `-∞` when unknown).
    pub lower: f64,
    /// Certified upper bound on the quantity (may be `+∞` when unknown).
    pub upper: f64,
    pub certificate: Certificate,
    pub cuts: usize,
    pub rounds: usize,
}

impl BoundResult {
    pub(crate) fn exact(value: f64) -> Self {
        Self {
            value,
            kind: BoundKind::Exact,
            lower: value,
            upper: value,
            certificate: Certificate::default(),
            cuts: 0,
            rounds: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BoundConfig {
    pub exactness: Exactness,
    pub max_cuts: usize,
    pub seed: u64,
    /// Add every rectangle constraint up front instead of generating them.
    pub full_enumeration: bool,
    /// Relative bracket width treated as converged.
    pub gap_tol: f64,
    /// Violated rectangles requested from the oracle per family and round.
    pub cuts_per_round: usize,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self { exactness: Exactness::ExactOracle, max_cuts: 4 * DEFAULT_MAX_CUTS, seed: 0x5eed, full_enumeration: false, gap_tol: 1e-6, cuts_per_round: 24 }
    }
}

impl BoundConfig {
    pub fn heuristic() -> Self {
        Self { exactness: Exactness::Heuristic, ..Self::default() }
    }

    pub fn full() -> Self {
        Self { full_enumeration: true, ..Self::default() }
    }

    pub(crate) fn oracle(&self) -> RectOracle {
        let mode = match self.exactness {
            Exactness::ExactOracle => OracleMode::Auto,
            Exactness::Heuristic => OracleMode::Heuristic,
        };
        RectOracle { mode, seed: self.seed, keep: self.cuts_per_round.max(1) }
    }

    /// Rejects instances outside the exact oracle's reach and programs too large for the LP solver.
    pub(crate) fn check(&self, m: &CommMatrix, nvars: usize, op: &str) -> Result<()> {
        if self.exactness == Exactness::ExactOracle && m.rows().min(m.cols()) > EXACT_SIDE_CAP {
            return Err(Error::SizeLimit(format!(
                "{op}: exact rectangle oracle needs a side of at most {EXACT_SIDE_CAP}, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        if self.full_enumeration && m.rows() + m.cols() > FULL_PROGRAM_CAP {
            return Err(Error::SizeLimit(format!(
                "{op}: full enumeration needs rows+cols <= {FULL_PROGRAM_CAP}, got {}",
                m.rows() + m.cols()
            )));
        }
        if nvars > MAX_VARS {
            return Err(Error::SizeLimit(format!("{op}: {nvars} program variables exceed {MAX_VARS}")));
        }
        Ok(())
    }
}

/// A bound computation request with its validated parameters.
#[derive(Clone, Debug)]
pub struct BoundRequest {
    pub matrix: CommMatrix,
    pub epsilon: f64,
    pub mu: Option<Distribution>,
    pub exactness: Exactness,
}

impl BoundRequest {
    pub fn new(matrix: CommMatrix, epsilon: f64) -> Self {
        Self { matrix, epsilon, mu: None, exactness: Exactness::ExactOracle }
    }

    pub fn with_mu(mut self, mu: Distribution) -> Self {
        self.mu = Some(mu);
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_epsilon(self.epsilon)?;
        if let Some(mu) = &self.mu {
            mu.matches(&self.matrix)?;
        }
        Ok(())
    }

    pub fn config(&self) -> BoundConfig {
        BoundConfig { exactness: self.exactness, ..BoundConfig::default() }
    }

    /// The request's distribution, defaulting to uniform.
    pub fn mu_or_uniform(&self) -> Distribution {
        self.mu.clone().unwrap_or_else(|| Distribution::uniform(self.matrix.rows(), self.matrix.cols()))
    }
}

pub(crate) fn check_epsilon(eps: f64) -> Result<()> {
    if !(0.0..0.5).contains(&eps) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in [0, 1/2), got {eps}")));
    }
    Ok(())
}
