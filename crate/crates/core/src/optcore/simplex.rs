//! Dense two-phase revised simplex with an explicit basis inverse.
//!
//! Pricing is Dantzig's largest-coefficient rule with lowest-index tie
//! breaking; after a run of degenerate pivots the solver switches to Bland's
//! rule until it makes progress again. Programs with many more rows than
//! columns are solved through their explicit dual, which keeps the basis small.

use num_rational::BigRational;

use super::lp::{LinearProgram, LpSolution, LpStatus, Relation, Sense};
use crate::error::{Error, Result};
use crate::scalar::Field;

pub const MAX_VARS: usize = 4000;
pub const MAX_CONSTRAINTS: usize = 20000;
const EXACT_RESOLVE_VARS: usize = 64;
const DEGENERATE_RUN: usize = 30;
const REINVERT_EVERY: usize = 64;
const PRICE_BLOCK: usize = 256;

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub max_iter: Option<usize>,
    /// Allow solving through the explicit dual when rows dominate.
    pub allow_dualize: bool,
    /// Allow the exact rational re-solve on failed checks.
    pub allow_exact: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { max_iter: None, allow_dualize: true, allow_exact: true }
    }
}

/// Solves with default options.
pub fn solve_lp<T: Field>(lp: &LinearProgram<T>) -> Result<LpSolution<T>> {
    solve_lp_with(lp, &SolveOptions::default())
}

pub fn solve_lp_with<T: Field>(lp: &LinearProgram<T>, opts: &SolveOptions) -> Result<LpSolution<T>> {
    if lp.num_vars() > MAX_VARS {
        return Err(Error::SizeLimit(format!("LP has {} variables (cap {MAX_VARS})", lp.num_vars())));
    }
    if lp.num_constraints() > MAX_CONSTRAINTS {
        return Err(Error::SizeLimit(format!("LP has {} constraints (cap {MAX_CONSTRAINTS})", lp.num_constraints())));
    }
    if !lp.is_finite() {
        return Err(Error::InvalidArgument("LP coefficients must be finite".into()));
    }
    let mut sol = None;
    if opts.allow_dualize && lp.num_constraints() > 2 * lp.num_vars() + 8 {
        let s = solve_via_dual(lp, opts)?;
        if s.status == LpStatus::Optimal {
            sol = Some(s);
        }
    }
    let mut sol = match sol {
        Some(s) => s,
        None => solve_direct(lp, opts)?,
    };
    if sol.status == LpStatus::Optimal && !T::EXACT && !sol.certified() {
        if opts.allow_exact && lp.num_vars() <= EXACT_RESOLVE_VARS {
            let exact: LinearProgram<BigRational> = lp.convert();
            let es = solve_direct(&exact, &SolveOptions { allow_exact: false, ..*opts })?;
            sol = convert_solution(&es);
            sol.exact_resolve = true;
        } else {
            sol.unstable = true;
        }
    }
    Ok(sol)
}

fn convert_solution<T: Field, U: Field>(s: &LpSolution<T>) -> LpSolution<U> {
    let cv = |t: &T| U::from_rational(&t.to_rational());
    LpSolution {
        status: s.status,
        x: s.x.iter().map(cv).collect(),
        duals: s.duals.iter().map(cv).collect(),
        objective: cv(&s.objective),
        dual_objective: cv(&s.dual_objective),
        gap: s.gap,
        residual: s.residual,
        dual_residual: s.dual_residual,
        iterations: s.iterations,
        exact_resolve: s.exact_resolve,
        unstable: s.unstable,
    }
}

/// How an original variable is recovered from standard-form columns.
#[derive(Clone, Debug)]
enum VarMap<T> {
    /// `x = lo + z`
    Shift(T, usize),
    /// `x = hi − z`
    NegShift(T, usize),
    /// `x = z⁺ − z⁻`
    Split(usize, usize),
}

/// `min cᵀz  s.t.  A z = b,  z ≥ 0,  b ≥ 0`.
struct StdForm<T> {
    m: usize,
    n: usize,
    /// Column-major: `cols[j][i]`.
    cols: Vec<Vec<T>>,
    b: Vec<T>,
    c: Vec<T>,
    map: Vec<VarMap<T>>,
    /// Standard-form row `i` came from original row `origin[i]` (None for bound rows), scaled by `sign[i]`.
    origin: Vec<Option<usize>>,
    sign: Vec<T>,
    /// Column usable as the initial basic variable of each row.
    unit: Vec<Option<usize>>,
    /// Original variable and multiplier behind each structural column.
    col_src: Vec<(usize, T)>,
    shift: Vec<T>,
    structural: usize,
}

fn to_std<T: Field>(lp: &LinearProgram<T>) -> StdForm<T> {
    let nv = lp.num_vars();
    let mut map = Vec::with_capacity(nv);
    let mut ncols = 0;
    // (original var, coefficient multiplier) per structural column
    let mut col_src: Vec<(usize, T)> = Vec::new();
    let mut bound_rows: Vec<(usize, T)> = Vec::new(); // (std column, rhs) for z ≤ rhs
    let mut shift = vec![T::zero(); nv];
    for j in 0..nv {
        match (&lp.lower[j], &lp.upper[j]) {
            (Some(l), u) => {
                map.push(VarMap::Shift(l.clone(), ncols));
                col_src.push((j, T::one()));
                shift[j] = l.clone();
                if let Some(u) = u {
                    bound_rows.push((ncols, u.clone() - l.clone()));
                }
                ncols += 1;
            }
            (None, Some(u)) => {
                map.push(VarMap::NegShift(u.clone(), ncols));
                col_src.push((j, -T::one()));
                shift[j] = u.clone();
                ncols += 1;
            }
            (None, None) => {
                map.push(VarMap::Split(ncols, ncols + 1));
                col_src.push((j, T::one()));
                col_src.push((j, -T::one()));
                ncols += 2;
            }
        }
    }
    let structural = ncols;
    let m = lp.num_constraints() + bound_rows.len();
    let n_slack = lp.constraints.iter().filter(|c| c.rel != Relation::Eq).count() + bound_rows.len();
    let n = structural + n_slack;
    let mut cols = vec![vec![T::zero(); m]; n];
    let mut b = vec![T::zero(); m];
    let mut origin = Vec::with_capacity(m);
    let mut sign = Vec::with_capacity(m);
    let mut unit = vec![None; m];
    let mut c = vec![T::zero(); n];
    let obj_sign = if lp.sense == Sense::Max { -T::one() } else { T::one() };
    for (k, (j, mult)) in col_src.iter().enumerate() {
        c[k] = obj_sign.clone() * lp.objective[*j].clone() * mult.clone();
    }
    let mut slack = structural;
    for (i, con) in lp.constraints.iter().enumerate() {
        let mut rhs = con.rhs.clone();
        for j in 0..nv {
            if !shift[j].is_zero() {
                rhs = rhs - con.coeffs[j].clone() * shift[j].clone();
            }
        }
        let flip = rhs < T::zero();
        let s = if flip { -T::one() } else { T::one() };
        for (k, (j, mult)) in col_src.iter().enumerate() {
            let a = &con.coeffs[*j];
            if !a.is_zero() {
                cols[k][i] = s.clone() * a.clone() * mult.clone();
            }
        }
        match con.rel {
            Relation::Le | Relation::Ge => {
                let coef = if con.rel == Relation::Le { T::one() } else { -T::one() };
                let coef = coef * s.clone();
                if coef > T::zero() {
                    unit[i] = Some(slack);
                }
                cols[slack][i] = coef;
                slack += 1;
            }
            Relation::Eq => {}
        }
        b[i] = s.clone() * rhs;
        origin.push(Some(i));
        sign.push(s);
    }
    for (k, (col, rhs)) in bound_rows.into_iter().enumerate() {
        let i = lp.num_constraints() + k;
        let flip = rhs < T::zero();
        let s = if flip { -T::one() } else { T::one() };
        cols[col][i] = s.clone();
        cols[slack][i] = s.clone();
        if !flip {
            unit[i] = Some(slack);
        }
        slack += 1;
        b[i] = s.clone() * rhs;
        origin.push(None);
        sign.push(s);
    }
    StdForm { m, n, cols, b, c, map, origin, sign, unit, col_src, shift, structural }
}

struct Tableau<T> {
    sf: StdForm<T>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: Vec<Vec<T>>,
    xb: Vec<T>,
    iterations: usize,
    max_iter: usize,
    /// Nonzero row indices of each structural column.
    nz: Vec<Vec<usize>>,
    /// Where the next partial pricing pass starts.
    price_from: usize,
}

fn nonzeros<T: Field>(col: &[T]) -> Vec<usize> {
    (0..col.len()).filter(|&k| !col[k].is_zero()).collect()
}

impl<T: Field> Tableau<T> {
    /// Column `j` of `[A | I]` (artificials are `n..n+m`).
    fn column(&self, j: usize) -> ColumnRef<'_, T> {
        if j < self.sf.n {
            ColumnRef::Dense(&self.sf.cols[j])
        } else {
            ColumnRef::Unit(j - self.sf.n)
        }
    }

    fn binv_times(&self, j: usize) -> Vec<T> {
        let m = self.sf.m;
        match self.column(j) {
            ColumnRef::Unit(k) => (0..m).map(|i| self.binv[i][k].clone()).collect(),
            ColumnRef::Dense(col) => {
                let nz = &self.nz[j];
                (0..m)
                    .map(|i| {
                        let row = &self.binv[i];
                        nz.iter().fold(T::zero(), |acc, &k| acc + row[k].clone() * col[k].clone())
                    })
                    .collect()
            }
        }
    }

    fn duals(&self, cost: &dyn Fn(usize) -> T) -> Vec<T> {
        let m = self.sf.m;
        let mut y = vec![T::zero(); m];
        for i in 0..m {
            let cb = cost(self.basis[i]);
            if cb.is_zero() {
                continue;
            }
            for k in 0..m {
                if !self.binv[i][k].is_zero() {
                    y[k] = y[k].clone() + cb.clone() * self.binv[i][k].clone();
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[T], cost: &dyn Fn(usize) -> T) -> T {
        match self.column(j) {
            ColumnRef::Unit(k) => cost(j) - y[k].clone(),
            ColumnRef::Dense(col) => {
                let mut d = cost(j);
                for &k in &self.nz[j] {
                    d = d - y[k].clone() * col[k].clone();
                }
                d
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize, w: &[T]) {
        let m = self.sf.m;
        let piv = w[r].clone();
        for k in 0..m {
            if !self.binv[r][k].is_zero() {
                self.binv[r][k] = self.binv[r][k].clone() / piv.clone();
            }
        }
        self.xb[r] = self.xb[r].clone() / piv;
        let prow = self.binv[r].clone();
        let px = self.xb[r].clone();
        for i in 0..m {
            if i == r || w[i].is_zero() {
                continue;
            }
            let f = w[i].clone();
            let row = &mut self.binv[i];
            for k in 0..m {
                if !prow[k].is_zero() {
                    row[k] = row[k].clone() - f.clone() * prow[k].clone();
                }
            }
            self.xb[i] = self.xb[i].clone() - f * px.clone();
        }
        self.is_basic[self.basis[r]] = false;
        self.basis[r] = q;
        self.is_basic[q] = true;
    }

    /// Recomputes `B⁻¹` and `x_B` from scratch (floating point only).
    fn reinvert(&mut self) {
        let m = self.sf.m;
        let mut aug: Vec<Vec<T>> = (0..m)
            .map(|i| {
                let mut row = vec![T::zero(); 2 * m];
                for (p, &j) in self.basis.iter().enumerate() {
                    row[p] = match self.column(j) {
                        ColumnRef::Unit(k) => {
                            if k == i {
                                T::one()
                            } else {
                                T::zero()
                            }
                        }
                        ColumnRef::Dense(col) => col[i].clone(),
                    };
                }
                row[m + i] = T::one();
                row
            })
            .collect();
        for col in 0..m {
            let piv = (col..m)
                .max_by(|&a, &b| aug[a][col].abs().partial_cmp(&aug[b][col].abs()).unwrap_or(std::cmp::Ordering::Equal))
                .expect("non-empty");
            if aug[piv][col].abs().to_f64() < 1e-14 {
                return; // keep the product-form inverse
            }
            aug.swap(col, piv);
            let p = aug[col][col].clone();
            for v in aug[col].iter_mut() {
                *v = v.clone() / p.clone();
            }
            let prow = aug[col].clone();
            for i in 0..m {
                if i != col && !aug[i][col].is_zero() {
                    let f = aug[i][col].clone();
                    for k in 0..2 * m {
                        if !prow[k].is_zero() {
                            aug[i][k] = aug[i][k].clone() - f.clone() * prow[k].clone();
                        }
                    }
                }
            }
        }
        // Row p of B⁻¹ corresponds to basis position p.
        for p in 0..m {
            self.binv[p] = aug[p][m..].to_vec();
        }
        let b = &self.sf.b;
        for p in 0..m {
            self.xb[p] = (0..m).fold(T::zero(), |a, k| a + self.binv[p][k].clone() * b[k].clone());
        }
    }

    /// Runs simplex iterations for `cost` over candidate columns `allowed`.
    ///
    /// In floating point a long degenerate run triggers a small deterministic
    /// perturbation of the right-hand side; it is removed at the end and any
    /// resulting infeasibility is repaired with dual simplex pivots.
    fn run(&mut self, cost: &dyn Fn(usize) -> T, allowed: &dyn Fn(usize) -> bool) -> LpStatus {
        if T::EXACT {
            return self.run_inner(cost, allowed, false);
        }
        let original = self.sf.b.clone();
        let status = self.run_inner(cost, allowed, true);
        if self.sf.b == original {
            return status;
        }
        self.sf.b = original;
        self.reinvert();
        if status != LpStatus::Optimal {
            return status;
        }
        match self.dual_run_with(cost, allowed) {
            LpStatus::Optimal => self.run_inner(cost, allowed, false),
            other => other,
        }
    }

    /// Shifts every basic value up by a tiny amount, adjusting `b` to match.
    fn perturb(&mut self) {
        let m = self.sf.m;
        let scale = self.sf.b.iter().fold(1.0f64, |a, v| a.max(v.abs().to_f64()));
        let mut bump = vec![T::zero(); m];
        for (p, &j) in self.basis.clone().iter().enumerate() {
            let h = ((p as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 40) as f64 / (1u64 << 24) as f64;
            let delta = T::from_f64(scale * 1e-6 * (1.0 + h));
            self.xb[p] = self.xb[p].clone() + delta.clone();
            match self.column(j) {
                ColumnRef::Unit(k) => bump[k] = bump[k].clone() + delta,
                ColumnRef::Dense(col) => {
                    for (k, a) in col.iter().enumerate() {
                        if !a.is_zero() {
                            bump[k] = bump[k].clone() + a.clone() * delta.clone();
                        }
                    }
                }
            }
        }
        for (b, d) in self.sf.b.iter_mut().zip(bump) {
            *b = b.clone() + d;
        }
    }

    fn run_inner(&mut self, cost: &dyn Fn(usize) -> T, allowed: &dyn Fn(usize) -> bool, may_perturb: bool) -> LpStatus {
        let total = self.sf.n + self.sf.m;
        let mut perturbed = false;
        let tol = T::tolerance();
        let mut degenerate = 0usize;
        loop {
            if self.iterations >= self.max_iter {
                return LpStatus::IterLimit;
            }
            if !T::EXACT && self.iterations > 0 && self.iterations % REINVERT_EVERY.max(self.sf.m) == 0 {
                self.reinvert();
            }
            if may_perturb && !perturbed && degenerate >= DEGENERATE_RUN {
                self.perturb();
                perturbed = true;
                degenerate = 0;
            }
            let y = self.duals(cost);
            let bland = degenerate >= DEGENERATE_RUN;
            let mut enter: Option<(usize, T)> = None;
            // Bland scans in index order; otherwise price blocks cyclically and
            // stop at the first block holding an improving column.
            let block = if bland || T::EXACT { total } else { PRICE_BLOCK.max(total / 8) };
            let start = if bland || T::EXACT { 0 } else { self.price_from % total.max(1) };
            for step in 0..total {
                let j = (start + step) % total;
                if step > 0 && step % block == 0 && enter.is_some() {
                    self.price_from = j;
                    break;
                }
                if self.is_basic[j] || !allowed(j) {
                    continue;
                }
                let d = self.reduced_cost(j, &y, cost);
                if d < -tol.clone() {
                    if bland {
                        enter = Some((j, d));
                        break;
                    }
                    if enter.as_ref().is_none_or(|(_, best)| d < *best) {
                        enter = Some((j, d));
                    }
                }
            }
            let Some((q, _)) = enter else {
                return LpStatus::Optimal;
            };
            let w = self.binv_times(q);
            let pivot_tol = if T::EXACT { T::zero() } else { T::from_f64(1e-9) };
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.sf.m {
                if w[i] > pivot_tol {
                    let ratio = self.xb[i].clone() / w[i].clone();
                    let better = match &leave {
                        None => true,
                        Some((r, best)) => {
                            ratio < best.clone() - tol.clone()
                                || (!(ratio > best.clone() + tol.clone()) && self.basis[i] < self.basis[*r])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, step)) = leave else {
                return LpStatus::Unbounded;
            };
            if step.is_pos() {
                degenerate = 0;
            } else {
                degenerate += 1;
            }
            self.pivot(r, q, &w);
            for v in self.xb.iter_mut() {
                if v.is_neg() || v.is_near_zero() {
                    if !T::EXACT && *v < T::zero() {
                        *v = T::zero();
                    }
                }
            }
            self.iterations += 1;
        }
    }
}

enum ColumnRef<'a, T> {
    Dense(&'a [T]),
    Unit(usize),
}

fn simplex<T: Field>(sf: StdForm<T>, max_iter: usize) -> (LpStatus, Tableau<T>) {
    let (m, n) = (sf.m, sf.n);
    let mut basis = Vec::with_capacity(m);
    let mut is_basic = vec![false; n + m];
    for i in 0..m {
        let j = sf.unit[i].unwrap_or(n + i);
        basis.push(j);
        is_basic[j] = true;
    }
    let mut binv = vec![vec![T::zero(); m]; m];
    for (i, row) in binv.iter_mut().enumerate() {
        row[i] = T::one();
    }
    let xb = sf.b.clone();
    let nz = sf.cols.iter().map(|c| nonzeros(c)).collect();
    let mut t = Tableau { sf, basis, is_basic, binv, xb, iterations: 0, max_iter, nz, price_from: 0 };
    let has_art = t.basis.iter().any(|&j| j >= n);
    if has_art {
        let status = t.run(&|j| if j >= n { T::one() } else { T::zero() }, &|j| j < n);
        if status == LpStatus::IterLimit {
            return (status, t);
        }
        let infeas = (0..m).filter(|&i| t.basis[i] >= n).fold(T::zero(), |a, i| a + t.xb[i].clone());
        let scale = t.sf.b.iter().fold(T::one(), |a, v| if v.abs() > a { v.abs() } else { a });
        let limit = if T::EXACT { T::zero() } else { T::from_f64(1e-9) * scale };
        if infeas > limit {
            return (LpStatus::Infeasible, t);
        }
        // Drive remaining artificials out where possible.
        for r in 0..m {
            if t.basis[r] < n {
                continue;
            }
            let row = t.binv[r].clone();
            let pick = (0..n).filter(|&j| !t.is_basic[j]).find(|&j| {
                let v = t.sf.cols[j].iter().zip(&row).fold(T::zero(), |a, (c, b)| a + c.clone() * b.clone());
                if T::EXACT {
                    !v.is_zero()
                } else {
                    v.abs().to_f64() > 1e-7
                }
            });
            if let Some(j) = pick {
                let w = t.binv_times(j);
                t.pivot(r, j, &w);
            }
        }
    }
    let status = t.phase2();
    (status, t)
}

impl<T: Field> Tableau<T> {
    fn phase2(&mut self) -> LpStatus {
        let n = self.sf.n;
        let c = self.sf.c.clone();
        let status = self.run(&|j| if j >= n { T::zero() } else { c[j].clone() }, &|j| j < n);
        if !T::EXACT {
            self.reinvert();
        }
        status
    }

    /// Standard-form primal values and row duals.
    fn extract(&self) -> (Vec<T>, Vec<T>) {
        let n = self.sf.n;
        let mut z = vec![T::zero(); n];
        for (p, &j) in self.basis.iter().enumerate() {
            if j < n {
                z[j] = if !T::EXACT && self.xb[p] < T::zero() { T::zero() } else { self.xb[p].clone() };
            }
        }
        let y = self.duals(&|j| if j >= n { T::zero() } else { self.sf.c[j].clone() });
        (z, y)
    }

    /// Appends an inequality row with its slack basic; `x_B` may turn negative.
    fn add_row(&mut self, origin: usize, con: &super::lp::Constraint<T>) {
        let (m, n) = (self.sf.m, self.sf.n);
        let sf = &mut self.sf;
        let mut rhs = con.rhs.clone();
        for (j, sh) in sf.shift.iter().enumerate() {
            if !sh.is_zero() {
                rhs = rhs - con.coeffs[j].clone() * sh.clone();
            }
        }
        for k in 0..n {
            let v = if k < sf.structural {
                let (j, mult) = &sf.col_src[k];
                con.coeffs[*j].clone() * mult.clone()
            } else {
                T::zero()
            };
            if !v.is_zero() {
                self.nz[k].push(m);
            }
            sf.cols[k].push(v);
        }
        let coef = if con.rel == Relation::Le { T::one() } else { -T::one() };
        let mut slack = vec![T::zero(); m + 1];
        slack[m] = coef.clone();
        self.nz.push(vec![m]);
        sf.cols.push(slack);
        sf.c.push(T::zero());
        sf.b.push(rhs.clone());
        sf.origin.push(Some(origin));
        sf.sign.push(T::one());
        sf.unit.push(None);
        sf.n = n + 1;
        sf.m = m + 1;
        for j in self.basis.iter_mut() {
            if *j >= n {
                *j += 1;
            }
        }
        let a_b: Vec<T> = self.basis.iter().map(|&j| if j < n { self.sf.cols[j][m].clone() } else { T::zero() }).collect();
        let inv = T::one() / coef;
        let mut last = vec![T::zero(); m + 1];
        for (p, a) in a_b.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for k in 0..m {
                if !self.binv[p][k].is_zero() {
                    last[k] = last[k].clone() - inv.clone() * a.clone() * self.binv[p][k].clone();
                }
            }
        }
        last[m] = inv.clone();
        for row in self.binv.iter_mut() {
            row.push(T::zero());
        }
        self.binv.push(last);
        let ax = a_b.iter().zip(&self.xb).fold(T::zero(), |acc, (a, x)| acc + a.clone() * x.clone());
        self.xb.push((rhs - ax) * inv);
        self.basis.push(n);
        self.is_basic = vec![false; self.sf.n + self.sf.m];
        for &j in &self.basis {
            self.is_basic[j] = true;
        }
    }

    /// Dual simplex from a dual-feasible basis until `x_B ≥ 0`.
    fn dual_run(&mut self) -> LpStatus {
        let n = self.sf.n;
        let c = self.sf.c.clone();
        self.dual_run_with(&|j: usize| if j >= n { T::zero() } else { c[j].clone() }, &|j| j < n)
    }

    fn dual_run_with(&mut self, cost: &dyn Fn(usize) -> T, allowed: &dyn Fn(usize) -> bool) -> LpStatus {
        let n = self.sf.n;
        let tol = T::tolerance();
        let pivot_tol = if T::EXACT { T::zero() } else { T::from_f64(1e-9) };
        loop {
            if self.iterations >= self.max_iter {
                return LpStatus::IterLimit;
            }
            if !T::EXACT && self.iterations > 0 && self.iterations % REINVERT_EVERY.max(self.sf.m) == 0 {
                self.reinvert();
            }
            let mut leave: Option<(usize, T)> = None;
            for (i, v) in self.xb.iter().enumerate() {
                if *v < -tol.clone() && leave.as_ref().is_none_or(|(_, b)| *v < *b) {
                    leave = Some((i, v.clone()));
                }
            }
            let Some((r, _)) = leave else {
                return LpStatus::Optimal;
            };
            let y = self.duals(cost);
            let rho = self.binv[r].clone();
            let mut enter: Option<(usize, T, T)> = None;
            for j in 0..n + self.sf.m {
                if self.is_basic[j] || !allowed(j) {
                    continue;
                }
                let alpha = match self.column(j) {
                    ColumnRef::Unit(k) => rho[k].clone(),
                    ColumnRef::Dense(col) => col
                        .iter()
                        .zip(&rho)
                        .fold(T::zero(), |a, (x, p)| if x.is_zero() { a } else { a + x.clone() * p.clone() }),
                };
                if !(alpha < -pivot_tol.clone()) {
                    continue;
                }
                let mut d = self.reduced_cost(j, &y, cost);
                if d < T::zero() {
                    d = T::zero();
                }
                let ratio = d / (-alpha.clone());
                let better = match &enter {
                    None => true,
                    Some((_, br, ba)) => ratio < br.clone() - tol.clone() || (!(ratio > br.clone() + tol.clone()) && alpha.abs() > ba.abs()),
                };
                if better {
                    enter = Some((j, ratio, alpha));
                }
            }
            let Some((q, _, _)) = enter else {
                return LpStatus::Infeasible;
            };
            let w = self.binv_times(q);
            self.pivot(r, q, &w);
            self.iterations += 1;
        }
    }
}

fn default_iter_limit(m: usize, n: usize) -> usize {
    50_000 + 20 * (m + n)
}

/// Maps a finished tableau back to the original variables and rows.
fn recover<T: Field>(lp: &LinearProgram<T>, status: LpStatus, t: &Tableau<T>) -> LpSolution<T> {
    let (z, y) = if status == LpStatus::Optimal {
        t.extract()
    } else {
        (vec![T::zero(); t.sf.n], vec![T::zero(); t.sf.m])
    };
    let x: Vec<T> = t
        .sf
        .map
        .iter()
        .map(|vm| match vm {
            VarMap::Shift(l, c) => l.clone() + z[*c].clone(),
            VarMap::NegShift(u, c) => u.clone() - z[*c].clone(),
            VarMap::Split(p, q) => z[*p].clone() - z[*q].clone(),
        })
        .collect();
    let obj_sign = if lp.sense == Sense::Max { -T::one() } else { T::one() };
    let mut duals = vec![T::zero(); lp.num_constraints()];
    for i in 0..t.sf.m {
        if let Some(r) = t.sf.origin[i] {
            duals[r] = obj_sign.clone() * y[i].clone() * t.sf.sign[i].clone();
        }
    }
    finish(lp, status, x, duals, t.iterations)
}

fn solve_direct<T: Field>(lp: &LinearProgram<T>, opts: &SolveOptions) -> Result<LpSolution<T>> {
    let sf = to_std(lp);
    let limit = opts.max_iter.unwrap_or_else(|| default_iter_limit(sf.m, sf.n));
    let (status, t) = simplex(sf, limit);
    Ok(recover(lp, status, &t))
}

/// Explicit dual of a program whose variables are all `≥ 0` or free:
/// `min bᵀy` with one variable per row and one row per original variable.
struct DualState {
    d: LinearProgram<f64>,
    /// `+1` for a max original, `-1` for min.
    sgn: f64,
}

impl DualState {
    fn eligible(lp: &LinearProgram<f64>) -> bool {
        lp.upper.iter().all(|u| u.is_none()) && lp.lower.iter().all(|l| l.is_none_or(|v| v == 0.0))
    }

    fn new(lp: &LinearProgram<f64>) -> Self {
        let sgn = if lp.sense == Sense::Max { 1.0 } else { -1.0 };
        let mut d = LinearProgram::<f64>::new(Sense::Min, 0);
        for j in 0..lp.num_vars() {
            let rel = if lp.lower[j].is_some() { Relation::Ge } else { Relation::Eq };
            d.constraints.push(super::lp::Constraint { coeffs: Vec::new(), rel, rhs: sgn * lp.objective[j] });
        }
        let mut st = Self { d, sgn };
        for c in &lp.constraints {
            st.push_var(c);
        }
        st
    }

    fn push_var(&mut self, c: &super::lp::Constraint<f64>) {
        let d = &mut self.d;
        d.objective.push(c.rhs);
        let (lo, hi) = match c.rel {
            Relation::Le => (Some(0.0), None),
            Relation::Ge => (None, Some(0.0)),
            Relation::Eq => (None, None),
        };
        d.lower.push(lo);
        d.upper.push(hi);
        d.names.push(format!("y{}", d.names.len()));
        for (row, a) in d.constraints.iter_mut().zip(&c.coeffs) {
            row.coeffs.push(*a);
        }
    }
}

impl Tableau<f64> {
    /// Appends a standard-form column (already in row-sign coordinates); returns its index.
    fn add_column(&mut self, col: Vec<f64>, cost: f64) -> usize {
        let n = self.sf.n;
        self.nz.push(nonzeros(&col));
        self.sf.cols.push(col);
        self.sf.c.push(cost);
        self.sf.n = n + 1;
        for j in self.basis.iter_mut() {
            if *j >= n {
                *j += 1;
            }
        }
        self.is_basic = vec![false; self.sf.n + self.sf.m];
        for &j in &self.basis {
            self.is_basic[j] = true;
        }
        n
    }

    /// Adds the dual variable of a new original row to a dual-side tableau.
    fn add_dual_var(&mut self, dvar: usize, c: &super::lp::Constraint<f64>) {
        let m = self.sf.m;
        let base: Vec<f64> = (0..m).map(|k| self.sf.sign[k] * c.coeffs[k]).collect();
        let push = |t: &mut Self, mult: f64| {
            let col: Vec<f64> = base.iter().map(|a| a * mult).collect();
            t.add_column(col, c.rhs * mult)
        };
        let vm = match c.rel {
            Relation::Le => VarMap::Shift(0.0, push(self, 1.0)),
            Relation::Ge => VarMap::NegShift(0.0, push(self, -1.0)),
            Relation::Eq => {
                let p = push(self, 1.0);
                let q = push(self, -1.0);
                VarMap::Split(p, q)
            }
        };
        debug_assert_eq!(self.sf.map.len(), dvar);
        self.sf.map.push(vm);
    }
}

/// A floating-point program that accepts new rows between solves.
///
/// Programs whose variables are all nonnegative or free are kept on the dual
/// side, where a new row is a new column and the previous basis stays
/// feasible; other programs append the row with its slack basic and restore
/// feasibility with dual simplex pivots.
pub struct IncrementalLp {
    lp: LinearProgram<f64>,
    state: Option<(LpStatus, Tableau<f64>)>,
    pending: usize,
    dual: Option<DualState>,
}

impl IncrementalLp {
    pub fn new(lp: LinearProgram<f64>) -> Result<Self> {
        if lp.num_vars() > MAX_VARS {
            return Err(Error::SizeLimit(format!("LP has {} variables (cap {MAX_VARS})", lp.num_vars())));
        }
        if !lp.is_finite() {
            return Err(Error::InvalidArgument("LP coefficients must be finite".into()));
        }
        let pending = lp.num_constraints();
        Ok(Self { lp, state: None, pending, dual: None })
    }

    pub fn program(&self) -> &LinearProgram<f64> {
        &self.lp
    }

    pub fn into_program(self) -> LinearProgram<f64> {
        self.lp
    }

    pub fn add_constraint(&mut self, c: super::lp::Constraint<f64>) -> Result<()> {
        if c.coeffs.len() != self.lp.num_vars() {
            return Err(Error::Dimension("constraint width must equal variable count".into()));
        }
        if self.lp.num_constraints() >= MAX_CONSTRAINTS {
            return Err(Error::SizeLimit(format!("LP has {} constraints (cap {MAX_CONSTRAINTS})", MAX_CONSTRAINTS)));
        }
        self.lp.constraints.push(c);
        Ok(())
    }

    /// Solves the current program, reusing the last basis when possible.
    pub fn solve(&mut self) -> Result<LpSolution<f64>> {
        let sol = if DualState::eligible(&self.lp) { self.solve_dual_side() } else { self.solve_row_side() };
        self.pending = self.lp.num_constraints();
        if sol.status == LpStatus::Optimal && sol.certified() {
            return Ok(sol);
        }
        // Fall back to the full solver with its dual and exact paths.
        self.state = None;
        self.dual = None;
        solve_lp(&self.lp)
    }

    fn solve_dual_side(&mut self) -> LpSolution<f64> {
        let total = self.lp.num_constraints();
        let warm = self.dual.is_some() && matches!(&self.state, Some((LpStatus::Optimal, _)));
        let mut status = LpStatus::Optimal;
        if warm {
            let ds = self.dual.as_mut().expect("checked above");
            let (_, t) = self.state.as_mut().expect("checked above");
            for i in self.pending..total {
                ds.push_var(&self.lp.constraints[i]);
                t.add_dual_var(i, &self.lp.constraints[i]);
            }
            t.max_iter = t.iterations + default_iter_limit(t.sf.m, t.sf.n);
            status = t.phase2();
            self.state.as_mut().expect("present").0 = status;
        }
        if !warm || status != LpStatus::Optimal {
            let ds = DualState::new(&self.lp);
            let sf = to_std(&ds.d);
            let limit = default_iter_limit(sf.m, sf.n);
            self.state = Some(simplex(sf, limit));
            self.dual = Some(ds);
        }
        let ds = self.dual.as_ref().expect("built");
        let (status, t) = self.state.as_ref().expect("solved");
        let dsol = recover(&ds.d, *status, t);
        let nv = self.lp.num_vars();
        if dsol.status != LpStatus::Optimal {
            // Dual infeasible or unbounded: the original is unbounded or infeasible.
            let st = match dsol.status {
                LpStatus::Infeasible => LpStatus::Unbounded,
                LpStatus::Unbounded => LpStatus::Infeasible,
                other => other,
            };
            return finish(&self.lp, st, vec![0.0; nv], vec![0.0; total], dsol.iterations);
        }
        let x: Vec<f64> = (0..nv).map(|j| dsol.duals[j]).collect();
        let duals: Vec<f64> = (0..total).map(|i| ds.sgn * dsol.x[i]).collect();
        finish(&self.lp, LpStatus::Optimal, x, duals, dsol.iterations)
    }

    fn solve_row_side(&mut self) -> LpSolution<f64> {
        let total = self.lp.num_constraints();
        let warm = self.dual.is_none()
            && matches!(&self.state, Some((LpStatus::Optimal, _)))
            && self.lp.constraints[self.pending..].iter().all(|c| c.rel != Relation::Eq);
        let mut status = LpStatus::Optimal;
        if warm {
            let (_, t) = self.state.as_mut().expect("checked above");
            for i in self.pending..total {
                t.add_row(i, &self.lp.constraints[i]);
            }
            t.max_iter = t.iterations + default_iter_limit(t.sf.m, t.sf.n);
            status = t.dual_run();
            if status == LpStatus::Optimal {
                status = t.phase2();
            }
            self.state.as_mut().expect("present").0 = status;
        }
        if !warm || status != LpStatus::Optimal {
            let sf = to_std(&self.lp);
            let limit = default_iter_limit(sf.m, sf.n);
            self.state = Some(simplex(sf, limit));
            self.dual = None;
        }
        let (status, t) = self.state.as_ref().expect("solved");
        recover(&self.lp, *status, t)
    }
}

/// Fills objective, dual objective, and the integrity measures.
fn finish<T: Field>(lp: &LinearProgram<T>, status: LpStatus, x: Vec<T>, duals: Vec<T>, iterations: usize) -> LpSolution<T> {
    let objective = lp.objective_value(&x);
    let residual = lp.max_violation(&x);
    let mut dual_objective = T::zero();
    let mut dual_residual: f64 = 0.0;
    for (c, y) in lp.constraints.iter().zip(&duals) {
        dual_objective = dual_objective + c.rhs.clone() * y.clone();
        // Sign of ∂obj/∂rhs must match the row type.
        let yv = y.to_f64();
        let bad = match (lp.sense, c.rel) {
            (Sense::Max, Relation::Le) | (Sense::Min, Relation::Ge) => -yv,
            (Sense::Max, Relation::Ge) | (Sense::Min, Relation::Le) => yv,
            (_, Relation::Eq) => 0.0,
        };
        dual_residual = dual_residual.max(bad);
    }
    for j in 0..lp.num_vars() {
        let mut d = lp.objective[j].clone();
        for (c, y) in lp.constraints.iter().zip(&duals) {
            if !c.coeffs[j].is_zero() {
                d = d - c.coeffs[j].clone() * y.clone();
            }
        }
        // For max, d > 0 pushes toward the upper bound; for min, toward the lower.
        let toward_upper = match lp.sense {
            Sense::Max => d.is_pos(),
            Sense::Min => d.is_neg(),
        };
        let toward_lower = match lp.sense {
            Sense::Max => d.is_neg(),
            Sense::Min => d.is_pos(),
        };
        let bound = if toward_upper {
            lp.upper[j].clone()
        } else if toward_lower {
            lp.lower[j].clone()
        } else {
            Some(x[j].clone())
        };
        match bound {
            Some(bv) => dual_objective = dual_objective + d * bv,
            None => {
                dual_residual = dual_residual.max(d.abs().to_f64());
                dual_objective = dual_objective + d * x[j].clone();
            }
        }
    }
    let gap = (objective.to_f64() - dual_objective.to_f64()).abs();
    LpSolution {
        status,
        x,
        duals,
        objective,
        dual_objective,
        gap,
        residual,
        dual_residual,
        iterations,
        exact_resolve: false,
        unstable: false,
    }
}

/// Solves `lp` through its explicit dual and maps the answer back.
fn solve_via_dual<T: Field>(lp: &LinearProgram<T>, opts: &SolveOptions) -> Result<LpSolution<T>> {
    let nv = lp.num_vars();
    // Primal P': max c'ᵀx' over x' ≥ 0 or free, rows as given plus bound rows.
    let sgn = if lp.sense == Sense::Max { T::one() } else { -T::one() };
    #[derive(Clone)]
    enum Kind<T> {
        NonNeg { base: T, neg: bool },
        Free,
    }
    let mut kinds = Vec::with_capacity(nv);
    let mut bound_rows: Vec<(usize, T)> = Vec::new();
    for j in 0..nv {
        match (&lp.lower[j], &lp.upper[j]) {
            (Some(l), u) => {
                kinds.push(Kind::NonNeg { base: l.clone(), neg: false });
                if let Some(u) = u {
                    bound_rows.push((j, u.clone() - l.clone()));
                }
            }
            (None, Some(u)) => kinds.push(Kind::NonNeg { base: u.clone(), neg: true }),
            (None, None) => kinds.push(Kind::Free),
        }
    }
    let col_mult = |j: usize| match &kinds[j] {
        Kind::NonNeg { neg: true, .. } => -T::one(),
        _ => T::one(),
    };
    let base = |j: usize| match &kinds[j] {
        Kind::NonNeg { base, .. } => base.clone(),
        Kind::Free => T::zero(),
    };
    let rows = lp.num_constraints() + bound_rows.len();
    // Dual D: min Σ b'_i y_i, one variable per P' row, one constraint per P' column.
    let mut d = LinearProgram::<T>::new(Sense::Min, rows);
    for (i, c) in lp.constraints.iter().enumerate() {
        let mut rhs = c.rhs.clone();
        for j in 0..nv {
            let bj = base(j);
            if !bj.is_zero() {
                rhs = rhs - c.coeffs[j].clone() * bj;
            }
        }
        d.set_objective(i, rhs);
        match c.rel {
            Relation::Le => d.set_bounds(i, Some(T::zero()), None),
            Relation::Ge => d.set_bounds(i, None, Some(T::zero())),
            Relation::Eq => d.set_free(i),
        }
    }
    for (k, (_, rhs)) in bound_rows.iter().enumerate() {
        d.set_objective(lp.num_constraints() + k, rhs.clone());
    }
    for j in 0..nv {
        let mut coeffs = vec![T::zero(); rows];
        for (i, c) in lp.constraints.iter().enumerate() {
            coeffs[i] = c.coeffs[j].clone() * col_mult(j);
        }
        for (k, (bj, _)) in bound_rows.iter().enumerate() {
            if *bj == j {
                coeffs[lp.num_constraints() + k] = T::one();
            }
        }
        let cj = sgn.clone() * lp.objective[j].clone() * col_mult(j);
        let rel = match kinds[j] {
            Kind::NonNeg { .. } => Relation::Ge,
            Kind::Free => Relation::Eq,
        };
        d.add_constraint(coeffs, rel, cj);
    }
    let ds = solve_direct(&d, opts)?;
    if ds.status != LpStatus::Optimal {
        return Ok(LpSolution { status: ds.status, ..finish(lp, ds.status, vec![T::zero(); nv], vec![T::zero(); lp.num_constraints()], ds.iterations) });
    }
    let x: Vec<T> = (0..nv)
        .map(|j| {
            let xp = ds.duals[j].clone();
            match &kinds[j] {
                Kind::NonNeg { base, neg: false } => base.clone() + xp,
                Kind::NonNeg { base, neg: true } => base.clone() - xp,
                Kind::Free => xp,
            }
        })
        .collect();
    let duals: Vec<T> = (0..lp.num_constraints()).map(|i| sgn.clone() * ds.x[i].clone()).collect();
    Ok(finish(lp, LpStatus::Optimal, x, duals, ds.iterations))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_max() {
        let mut lp = LinearProgram::<f64>::new(Sense::Max, 1);
        lp.set_objective(0, 1.0);
        lp.add_constraint(vec![1.0], Relation::Le, 3.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value() - 3.0).abs() < 1e-12);
        assert!((s.duals[0] - 1.0).abs() < 1e-12);
        assert!(s.certified());
    }

    #[test]
    fn infeasible_pair() {
        let mut lp = LinearProgram::<f64>::new(Sense::Max, 1);
        lp.set_free(0);
        lp.add_constraint(vec![1.0], Relation::Le, -1.0);
        lp.add_constraint(vec![1.0], Relation::Ge, 0.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = LinearProgram::<f64>::new(Sense::Max, 2);
        lp.set_objective(0, 1.0);
        lp.add_constraint(vec![1.0, -1.0], Relation::Le, 1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn mixed_bounds_and_equalities() {
        // min x + 2y - z, x in [1, 4], y free, z <= 2, x + y = 3, y - z >= -1
        let mut lp = LinearProgram::<f64>::new(Sense::Min, 3);
        lp.set_objective(0, 1.0);
        lp.set_objective(1, 2.0);
        lp.set_objective(2, -1.0);
        lp.set_bounds(0, Some(1.0), Some(4.0));
        lp.set_free(1);
        lp.set_bounds(2, None, Some(2.0));
        lp.add_constraint(vec![1.0, 1.0, 0.0], Relation::Eq, 3.0);
        lp.add_constraint(vec![0.0, 1.0, -1.0], Relation::Ge, -1.0);
        let s = solve_lp(&lp).unwrap();
        // y = 3 - x, z <= y + 1 = 4 - x and z <= 2; obj = x + 6 - 2x - z = 6 - x - z.
        // x = 4: z <= 0 → obj 2; x = 2: z = 2 → obj 2; optimum 2.
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value() - 2.0).abs() < 1e-9, "{}", s.value());
        assert!(s.certified(), "{s:?}");
    }

    #[test]
    fn exact_rational_solve() {
        let mut lp = LinearProgram::<BigRational>::new(Sense::Max, 2);
        lp.set_objective(0, BigRational::from_ratio(1, 1));
        lp.set_objective(1, BigRational::from_ratio(1, 1));
        lp.add_constraint(vec![BigRational::from_ratio(3, 1), BigRational::from_ratio(1, 1)], Relation::Le, BigRational::from_ratio(1, 1));
        lp.add_constraint(vec![BigRational::from_ratio(1, 1), BigRational::from_ratio(3, 1)], Relation::Le, BigRational::from_ratio(1, 1));
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.objective, BigRational::from_ratio(1, 2));
        assert_eq!(s.gap, 0.0);
    }

    #[test]
    fn dual_path_matches_direct() {
        // Many rows over two variables.
        let mut lp = LinearProgram::<f64>::new(Sense::Max, 2);
        lp.set_objective(0, 1.0);
        lp.set_objective(1, 1.0);
        for k in 0..40 {
            let a = (k as f64 * 0.37).sin().abs() + 0.1;
            lp.add_constraint(vec![a, 1.0 - a / 2.0], Relation::Le, 1.0 + (k % 3) as f64);
        }
        let via = solve_lp(&lp).unwrap();
        let direct = solve_lp_with(&lp, &SolveOptions { allow_dualize: false, ..Default::default() }).unwrap();
        assert!((via.value() - direct.value()).abs() < 1e-9);
        assert!(via.certified() && direct.certified());
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's cycling example.
        let mut lp = LinearProgram::<f64>::new(Sense::Min, 4);
        for (j, c) in [-0.75, 150.0, -0.02, 6.0].into_iter().enumerate() {
            lp.set_objective(j, c);
        }
        lp.add_constraint(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0);
        lp.add_constraint(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0);
        lp.add_constraint(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value() + 0.05).abs() < 1e-9);
    }
}
