//! Shared machinery for rectangle-indexed maximization programs.
//!
//! Every program here has the shape
//!
//! ```text
//!   max cᵀx   s.t.  Σ_{(i,j)∈R} w_f(x)(i,j) ≤ 1   for every rectangle R and family f,
//!                   homogeneous side constraints, sign bounds at 0,
//! ```
//!
//! where each family `f` maps the variable vector linearly to a weight per
//! cell. Because all implicit rows have right-hand side 1 and everything else
//! is homogeneous, any `x` with oracle violation `v` scales to the feasible
//! point `x / (1 + v)`. A solve therefore always yields a bracket: the value
//! of the restricted program is an upper bound, and the scaled point's value
//! is a lower bound whenever the oracle was exact.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::matrices::Rectangle;
use crate::optcore::{
    solve_lp_lazy_with, Constraint, ConstraintOracle, LazyOptions, LinearProgram, LpStatus, RectOracle, Relation,
    Separation,
};

/// Linear map from variables to per-cell weights: `terms[cell] = [(var, coef)]`.
#[derive(Clone, Debug)]
pub struct CellFamily {
    pub rows: usize,
    pub cols: usize,
    pub terms: Vec<Vec<(usize, f64)>>,
    /// Output label carried by rectangles of this family, if any.
    pub label: Option<bool>,
}

impl CellFamily {
    pub fn new(rows: usize, cols: usize, label: Option<bool>) -> Self {
        Self { rows, cols, terms: vec![Vec::new(); rows * cols], label }
    }

    pub fn push(&mut self, i: usize, j: usize, var: usize, coef: f64) {
        if coef != 0.0 {
            self.terms[i * self.cols + j].push((var, coef));
        }
    }

    pub fn weights(&self, x: &[f64]) -> DenseMatrix<f64> {
        DenseMatrix::from_fn(self.rows, self.cols, |i, j| {
            self.terms[i * self.cols + j].iter().map(|&(v, c)| c * x[v]).sum()
        })
    }

    /// Constraint row `Σ_{cells∈R} w(cell) ≤ 1`.
    pub fn row(&self, r: &Rectangle, nvars: usize) -> Constraint<f64> {
        let mut coeffs = vec![0.0; nvars];
        for (i, j) in r.cells() {
            for &(v, c) in &self.terms[i * self.cols + j] {
                coeffs[v] += c;
            }
        }
        Constraint { coeffs, rel: Relation::Le, rhs: 1.0 }
    }
}

pub struct RectSeparator<'a> {
    pub families: &'a [CellFamily],
    pub oracle: &'a RectOracle,
    pub nvars: usize,
    pub tol: f64,
    /// Origin `(family, rectangle)` of every row handed out, keyed by coefficient bits.
    pub log: HashMap<Vec<u64>, (usize, Rectangle)>,
}

fn row_key(c: &Constraint<f64>) -> Vec<u64> {
    c.coeffs.iter().map(|a| a.to_bits()).collect()
}

impl ConstraintOracle for RectSeparator<'_> {
    fn separate(&mut self, x: &[f64]) -> Result<Separation> {
        let mut cuts = Vec::new();
        let mut worst: f64 = 0.0;
        let mut exact = true;
        for (f, fam) in self.families.iter().enumerate() {
            let ans = self.oracle.maximize(&fam.weights(x));
            exact &= ans.exact;
            worst = worst.max(ans.value() - 1.0);
            for wr in ans.best {
                if wr.value > 1.0 + self.tol {
                    let row = fam.row(&wr.rect, self.nvars);
                    self.log.entry(row_key(&row)).or_insert((f, wr.rect));
                    cuts.push(row);
                }
            }
        }
        Ok(Separation { cuts, violation: worst.max(0.0), exact })
    }
}

/// Exact (or heuristic) maximum violation at `x`.
pub fn max_violation(families: &[CellFamily], oracle: &RectOracle, x: &[f64]) -> (f64, bool) {
    let mut worst: f64 = 0.0;
    let mut exact = true;
    for fam in families {
        let ans = oracle.maximize(&fam.weights(x));
        exact &= ans.exact;
        worst = worst.max(ans.value() - 1.0);
    }
    (worst, exact)
}

#[derive(Clone, Debug)]
pub struct RectProgramOutcome {
    /// Value of the final restricted program; an upper bound on the true optimum.
    pub upper: f64,
    /// Objective at the scaled feasible point; a lower bound when `lower_certified`.
    pub lower: f64,
    pub lower_certified: bool,
    /// Scaled point `x / (1 + v)`.
    pub point: Vec<f64>,
    /// Active implicit rows with positive multiplier: `(rectangle, family label, weight)`.
    pub active: Vec<(Rectangle, Option<bool>, f64)>,
    pub cuts: usize,
    pub rounds: usize,
    pub upper_certified: bool,
}

/// Solves a max-form rectangle program by cutting planes.
pub fn solve_rect_program(
    base: LinearProgram<f64>,
    families: &[CellFamily],
    seeds: &[Rectangle],
    oracle: &RectOracle,
    max_cuts: usize,
) -> Result<RectProgramOutcome> {
    let nvars = base.num_vars();
    let mut lp = base;
    let base_rows = lp.num_constraints();
    let mut seeded: Vec<(usize, usize)> = Vec::new();
    for (f, fam) in families.iter().enumerate() {
        for (s, r) in seeds.iter().enumerate() {
            let row = fam.row(r, nvars);
            if row.coeffs.iter().any(|&a| a != 0.0) && !lp.constraints.contains(&row) {
                lp.constraints.push(row);
                seeded.push((f, s));
            }
        }
    }
    let tol = 1e-9;
    let mut sep = RectSeparator { families, oracle, nvars, tol, log: HashMap::new() };
    let opts = LazyOptions { tol, max_cuts, ..Default::default() };
    let lazy = solve_lp_lazy_with(&lp, &mut sep, &opts)?;
    if lazy.solution.status != LpStatus::Optimal {
        return Err(Error::Solver(format!(
            "restricted rectangle program ended with status {:?}",
            lazy.solution.status
        )));
    }
    let sol = &lazy.solution;
    let (v, exact) = max_violation(families, oracle, &sol.x);
    let scale = 1.0 / (1.0 + v);
    let point: Vec<f64> = sol.x.iter().map(|a| a * scale).collect();
    let lower = lazy.program.objective_value(&point);
    let mut active = Vec::new();
    for (k, c) in lazy.program.constraints.iter().enumerate().skip(base_rows) {
        let y = sol.duals[k];
        if y <= 1e-12 {
            continue;
        }
        let origin = if k - base_rows < seeded.len() {
            let (f, s) = seeded[k - base_rows];
            Some((f, seeds[s].clone()))
        } else {
            sep.log.get(&row_key(c)).cloned()
        };
        if let Some((f, rect)) = origin {
            active.push((rect, families[f].label, y));
        }
    }
    Ok(RectProgramOutcome {
        upper: sol.value(),
        lower,
        lower_certified: exact,
        point,
        active,
        cuts: lazy.cuts,
        rounds: lazy.rounds,
        upper_certified: sol.certified() || sol.exact_resolve,
    })
}
