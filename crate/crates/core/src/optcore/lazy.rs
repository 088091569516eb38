//! Cutting-plane loop over an implicitly described constraint family.

use super::lp::{Constraint, LinearProgram, LpSolution, LpStatus};
use super::simplex::IncrementalLp;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_CUTS: usize = 500;

/// Separation result for a candidate point.
#[derive(Clone, Debug)]
pub struct Separation {
    /// Violated constraints to add (may be empty).
    pub cuts: Vec<Constraint<f64>>,
    /// Largest violation found, `max(0, a·x − b)` over the family.
    pub violation: f64,
    /// True when `violation` is the true maximum over the whole family.
    pub exact: bool,
}

/// Supplies the most violated members of a constraint family.
pub trait ConstraintOracle {
    fn separate(&mut self, x: &[f64]) -> Result<Separation>;
}

#[derive(Clone, Copy, Debug)]
pub struct LazyOptions {
    pub tol: f64,
    /// Cap on the total number of generated cuts.
    pub max_cuts: usize,
    pub max_rounds: usize,
}

impl Default for LazyOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_cuts: DEFAULT_MAX_CUTS, max_rounds: 10_000 }
    }
}

#[derive(Clone, Debug)]
pub struct LazySolution {
    /// Solution of the final restricted program.
    pub solution: LpSolution<f64>,
    /// Final restricted program (base plus generated cuts).
    pub program: LinearProgram<f64>,
    pub cuts: usize,
    pub rounds: usize,
    /// Oracle violation at the returned point.
    pub violation: f64,
    /// True when the final separation was exact and found nothing above `tol`.
    pub converged: bool,
    /// True when every separation call was exact.
    pub exact_oracle: bool,
}

pub fn solve_lp_lazy(
    base: &LinearProgram<f64>,
    oracle: &mut dyn ConstraintOracle,
    tol: f64,
) -> Result<LazySolution> {
    solve_lp_lazy_with(base, oracle, &LazyOptions { tol, ..Default::default() })
}

pub fn solve_lp_lazy_with(
    base: &LinearProgram<f64>,
    oracle: &mut dyn ConstraintOracle,
    opts: &LazyOptions,
) -> Result<LazySolution> {
    let mut lp = IncrementalLp::new(base.clone())?;
    let mut cuts = 0usize;
    let mut exact_oracle = true;
    for round in 1..=opts.max_rounds {
        let sol = lp.solve()?;
        if sol.status != LpStatus::Optimal {
            return Ok(LazySolution {
                violation: f64::INFINITY,
                solution: sol,
                program: lp.into_program(),
                cuts,
                rounds: round,
                converged: false,
                exact_oracle,
            });
        }
        let sep = oracle.separate(&sol.x)?;
        exact_oracle &= sep.exact;
        let mut fresh: Vec<Constraint<f64>> = Vec::new();
        for c in sep.cuts {
            if violation_of(&c, &sol.x) > opts.tol && !fresh.contains(&c) && !lp.program().constraints.contains(&c) {
                fresh.push(c);
            }
        }
        let done = sep.violation <= opts.tol || fresh.is_empty();
        if done || cuts >= opts.max_cuts {
            return Ok(LazySolution {
                converged: done && sep.exact && sep.violation <= opts.tol,
                violation: sep.violation,
                solution: sol,
                program: lp.into_program(),
                cuts,
                rounds: round,
                exact_oracle,
            });
        }
        for c in fresh {
            lp.add_constraint(c)?;
            cuts += 1;
        }
    }
    Err(Error::BudgetExceeded(format!("cutting-plane loop exceeded {} rounds", opts.max_rounds)))
}

/// `max(0, a·x − b)` for `≤` rows, the analogous quantity otherwise.
pub fn violation_of(c: &Constraint<f64>, x: &[f64]) -> f64 {
    let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
    match c.rel {
        super::lp::Relation::Le => (lhs - c.rhs).max(0.0),
        super::lp::Relation::Ge => (c.rhs - lhs).max(0.0),
        super::lp::Relation::Eq => (lhs - c.rhs).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optcore::lp::{Relation, Sense};

    /// Family `x_i ≤ 1` for each coordinate.
    struct Boxes;

    impl ConstraintOracle for Boxes {
        fn separate(&mut self, x: &[f64]) -> Result<Separation> {
            let mut cuts = Vec::new();
            let mut worst: f64 = 0.0;
            for (i, &v) in x.iter().enumerate() {
                if v > 1.0 {
                    let mut a = vec![0.0; x.len()];
                    a[i] = 1.0;
                    cuts.push(Constraint { coeffs: a, rel: Relation::Le, rhs: 1.0 });
                    worst = worst.max(v - 1.0);
                }
            }
            Ok(Separation { cuts, violation: worst, exact: true })
        }
    }

    #[test]
    fn adds_cuts_until_feasible() {
        let mut lp = LinearProgram::<f64>::new(Sense::Max, 3);
        for j in 0..3 {
            lp.set_objective(j, 1.0);
        }
        lp.add_constraint(vec![1.0, 1.0, 1.0], Relation::Le, 10.0);
        let s = solve_lp_lazy(&lp, &mut Boxes, 1e-9).unwrap();
        assert!(s.converged);
        assert!((s.solution.value() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn optimal_base_needs_one_round() {
        let mut lp = LinearProgram::<f64>::new(Sense::Max, 1);
        lp.set_objective(0, 1.0);
        lp.add_constraint(vec![1.0], Relation::Le, 0.5);
        let s = solve_lp_lazy(&lp, &mut Boxes, 1e-9).unwrap();
        assert_eq!(s.rounds, 1);
        assert_eq!(s.cuts, 0);
    }
}
