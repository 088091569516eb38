//! Two-dimensional sign realizations.
//!
//! Rows become unit vectors at angles `θ_x` and columns become unit normals
//! `ψ_y`; the cell sign is `sign cos(θ_x − ψ_y)`. For a fixed circular order
//! of the (distinct) row points, a column is realizable iff its `+` rows and
//! its `−` rows are each circularly contiguous and each spans an arc shorter
//! than `π`; a constant column needs every point inside an open half circle,
//! i.e. one angular gap longer than `π`. Maximizing a common margin `δ` over
//! the angular gaps is a small linear program.

use std::f64::consts::{PI, TAU};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::budget::SearchBudget;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::matrices::{CommMatrix, Convention};
use crate::optcore::{solve_lp, LinearProgram, LpStatus, Relation, Sense};

/// Minimum `|⟨U_x, V_y⟩|` accepted by the checker.
pub const SIGN_MARGIN: f64 = 1e-9;

/// Real factorization whose inner products carry the sign pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct SignWitness {
    pub u: DenseMatrix<f64>,
    pub v: DenseMatrix<f64>,
    pub d: usize,
    /// Cells where strictness required a perturbation.
    pub perturbation_log: Vec<(usize, usize)>,
}

impl SignWitness {
    pub fn new(u: DenseMatrix<f64>, v: DenseMatrix<f64>) -> Self {
        assert_eq!(u.cols(), v.cols(), "factor dimensions must agree");
        let d = u.cols();
        Self { u, v, d, perturbation_log: Vec::new() }
    }

    pub fn transpose(self) -> Self {
        Self {
            u: self.v,
            v: self.u,
            d: self.d,
            perturbation_log: self.perturbation_log.into_iter().map(|(i, j)| (j, i)).collect(),
        }
    }

    /// Smallest `sign(M_xy)·⟨U_x, V_y⟩` over all cells.
    pub fn min_signed_margin(&self, m: &CommMatrix) -> f64 {
        let mut worst = f64::INFINITY;
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let ip = crate::linalg::dot(self.u.row(i), self.v.row(j));
                worst = worst.min(ip * m.sign(i, j) as f64);
            }
        }
        worst
    }
}

/// True iff every cell has `sign⟨U_x, V_y⟩ = M_xy` with `|⟨U_x, V_y⟩| ≥ 1e-9`.
pub fn verify_sign_factorization(m: &CommMatrix, w: &SignWitness) -> Result<bool> {
    m.require(Convention::SignPM1, "verify_sign_factorization")?;
    if w.u.rows() != m.rows() || w.v.rows() != m.cols() || w.u.cols() != w.v.cols() {
        return Err(Error::Dimension(format!(
            "witness {}x{} / {}x{} does not fit a {}x{} matrix",
            w.u.rows(),
            w.u.cols(),
            w.v.rows(),
            w.v.cols(),
            m.rows(),
            m.cols()
        )));
    }
    Ok(w.min_signed_margin(m) >= SIGN_MARGIN)
}

/// Decision for `signrank(M) ≤ 2`, with a verified witness when true.
#[derive(Clone, Debug)]
pub struct SignRankDecision {
    pub realizable: bool,
    pub witness: Option<SignWitness>,
    /// Rows of a non-realizable submatrix when the answer came from a refutation search.
    pub refuting_rows: Option<Vec<usize>>,
}

/// Decides whether a sign matrix has a 2-dimensional strict realization.
///
/// Exact when the matrix has at most `budget.max_rows` distinct rows or
/// distinct columns (the problem is transpose-symmetric). Above that, small
/// row subsets are tested exactly: a non-realizable submatrix refutes the whole
/// matrix, and otherwise the budget error is returned.
pub fn signrank_le_2(m: &CommMatrix, budget: &SearchBudget) -> Result<SignRankDecision> {
    m.require(Convention::SignPM1, "signrank_le_2")?;
    let cap = budget.max_rows.min(9);
    let rows = m.distinct_row_count();
    if rows <= cap {
        return decide_small(m, budget);
    }
    let t = m.transpose();
    if t.distinct_row_count() <= cap {
        let mut d = decide_small(&t, budget)?;
        d.witness = d.witness.map(SignWitness::transpose);
        return Ok(d);
    }
    refute_by_subsets(m, cap, budget)
}

fn refute_by_subsets(m: &CommMatrix, cap: usize, budget: &SearchBudget) -> Result<SignRankDecision> {
    let distinct = m.distinct_rows();
    let all_cols: Vec<usize> = (0..m.cols()).collect();
    let mut meter = budget.meter("signrank_le_2");
    for restart in 0..64u64 {
        let mut order = distinct.clone();
        if restart > 0 {
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(restart));
        }
        let mut chosen: Vec<usize> = Vec::new();
        for &r in &order {
            meter.tick()?;
            let mut trial = chosen.clone();
            trial.push(r);
            trial.sort_unstable();
            let sub = m.submatrix(&trial, &all_cols)?;
            if !decide_small(&sub, budget)?.realizable {
                return Ok(SignRankDecision { realizable: false, witness: None, refuting_rows: Some(trial) });
            }
            chosen = trial;
            if chosen.len() == cap {
                break;
            }
        }
    }
    Err(Error::BudgetExceeded(format!(
        "signrank_le_2: {} distinct rows and columns, no refuting subset of size {cap} found",
        distinct.len()
    )))
}

/// Column pattern over the distinct row points: bit `k` set iff row point `k` is `+`.
fn column_patterns(m: &CommMatrix, reps: &[usize]) -> Vec<u32> {
    (0..m.cols())
        .map(|j| reps.iter().enumerate().fold(0u32, |a, (k, &i)| a | (m.bit(i, j) as u32) << k))
        .collect()
}

fn decide_small(m: &CommMatrix, budget: &SearchBudget) -> Result<SignRankDecision> {
    let reps = m.distinct_rows();
    let k = reps.len();
    if k > 9 {
        return Err(Error::BudgetExceeded(format!("signrank_le_2: {k} distinct rows exceeds 9")));
    }
    let row_of: Vec<usize> = (0..m.rows())
        .map(|i| reps.iter().position(|&r| m.row_words(r) == m.row_words(i)).expect("representative"))
        .collect();
    let pats = column_patterns(m, &reps);
    let mut uniq = pats.clone();
    uniq.sort_unstable();
    uniq.dedup();
    let full = (1u32 << k) - 1;
    let has_constant = uniq.iter().any(|&p| p == 0 || p == full);
    let nonconst: Vec<u32> = uniq.iter().copied().filter(|&p| p != 0 && p != full).collect();
    let mut meter = budget.meter("signrank_le_2");

    let mut found = None;
    for_each_circular_order(k, &mut |order: &[usize]| -> Result<bool> {
        meter.tick()?;
        let mut pos = vec![0usize; k];
        for (p, &r) in order.iter().enumerate() {
            pos[r] = p;
        }
        // Each non-constant column as a cyclic interval [start, start+len) of positions.
        let mut arcs = Vec::with_capacity(nonconst.len());
        for &p in &nonconst {
            let ppos = (0..k).filter(|&r| p >> r & 1 == 1).fold(0u32, |a, r| a | 1 << pos[r]);
            match cyclic_interval(ppos, k) {
                Some(arc) => arcs.push(arc),
                None => return Ok(false),
            }
        }
        let wraps: Vec<Option<usize>> = if has_constant { (0..k).map(Some).collect() } else { vec![None] };
        for wrap in wraps {
            if let Some(gaps) = solve_gaps(k, &arcs, wrap)? {
                found = Some((order.to_vec(), gaps, wrap));
                return Ok(true);
            }
        }
        Ok(false)
    })?;

    let Some((order, gaps, wrap)) = found else {
        return Ok(SignRankDecision { realizable: false, witness: None, refuting_rows: None });
    };
    let w = build_witness(m, &reps, &row_of, &pats, &order, &gaps, wrap);
    if verify_sign_factorization(m, &w)? {
        Ok(SignRankDecision { realizable: true, witness: Some(w), refuting_rows: None })
    } else {
        Err(Error::Solver("signrank_le_2: gap solution did not yield a verifiable witness".into()))
    }
}

/// Visits circular orders of `0..k` with `0` first, one of each mirror pair.
fn for_each_circular_order(k: usize, f: &mut dyn FnMut(&[usize]) -> Result<bool>) -> Result<()> {
    if k <= 2 {
        let order: Vec<usize> = (0..k).collect();
        f(&order)?;
        return Ok(());
    }
    let mut rest: Vec<usize> = (1..k).collect();
    // Heap's algorithm over the tail.
    let n = rest.len();
    let mut c = vec![0usize; n];
    let mut visit = |rest: &[usize]| -> Result<bool> {
        if rest[0] > rest[n - 1] {
            return Ok(false);
        }
        let mut order = Vec::with_capacity(k);
        order.push(0);
        order.extend_from_slice(rest);
        f(&order)
    };
    if visit(&rest)? {
        return Ok(());
    }
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                rest.swap(0, i);
            } else {
                rest.swap(c[i], i);
            }
            if visit(&rest)? {
                return Ok(());
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(())
}

/// `(start, len)` if the set bits of `mask` (over `k` positions) form one cyclic run.
fn cyclic_interval(mask: u32, k: usize) -> Option<(usize, usize)> {
    let len = mask.count_ones() as usize;
    (0..k).find_map(|s| {
        let run = (0..len).fold(0u32, |a, t| a | 1 << ((s + t) % k));
        (run == mask).then_some((s, len))
    })
}

/// Gap `g_p` runs from position `p` to position `p+1` (cyclically). Maximizes the
/// margin `δ`; returns the gaps when `δ` is safely positive.
fn solve_gaps(k: usize, arcs: &[(usize, usize)], wrap: Option<usize>) -> Result<Option<Vec<f64>>> {
    if k == 1 {
        return Ok(Some(vec![TAU]));
    }
    let mut lp = LinearProgram::<f64>::new(Sense::Max, k + 1);
    let delta = k;
    lp.set_objective(delta, 1.0);
    lp.set_bounds(delta, Some(0.0), Some(1.0));
    let mut sum = vec![0.0; k + 1];
    for g in 0..k {
        sum[g] = 1.0;
        let mut row = vec![0.0; k + 1];
        row[g] = 1.0;
        row[delta] = -1.0;
        lp.add_constraint(row, Relation::Ge, 0.0);
    }
    lp.add_constraint(sum, Relation::Eq, TAU);
    let inner = |start: usize, len: usize| -> Vec<usize> { (0..len.saturating_sub(1)).map(|t| (start + t) % k).collect() };
    for &(s, len) in arcs {
        // Positive run and the complementary negative run.
        for gaps in [inner(s, len), inner((s + len) % k, k - len)] {
            let mut row = vec![0.0; k + 1];
            for g in gaps {
                row[g] = 1.0;
            }
            row[delta] = 1.0;
            lp.add_constraint(row, Relation::Le, PI);
        }
    }
    if let Some(w) = wrap {
        let mut row = vec![0.0; k + 1];
        row[w] = 1.0;
        row[delta] = -1.0;
        lp.add_constraint(row, Relation::Ge, PI);
    }
    let sol = solve_lp(&lp)?;
    if sol.status == LpStatus::Optimal && sol.x[delta] > 1e-7 {
        Ok(Some(sol.x[..k].to_vec()))
    } else {
        Ok(None)
    }
}

fn build_witness(
    m: &CommMatrix,
    reps: &[usize],
    row_of: &[usize],
    pats: &[u32],
    order: &[usize],
    gaps: &[f64],
    wrap: Option<usize>,
) -> SignWitness {
    let k = reps.len();
    let mut theta_pos = vec![0.0; k];
    for p in 1..k {
        theta_pos[p] = theta_pos[p - 1] + gaps[p - 1];
    }
    let mut pos = vec![0usize; k];
    for (p, &r) in order.iter().enumerate() {
        pos[r] = p;
    }
    let theta_rep: Vec<f64> = (0..k).map(|r| theta_pos[pos[r]]).collect();
    let u = DenseMatrix::from_fn(m.rows(), 2, |i, c| {
        let t = theta_rep[row_of[i]];
        if c == 0 {
            t.cos()
        } else {
            t.sin()
        }
    });
    let full = (1u32 << k) - 1;
    let psi: Vec<f64> = pats
        .iter()
        .map(|&p| {
            if p == 0 || p == full {
                // Normal at the middle of the arc that avoids the wrap gap.
                let w = wrap.unwrap_or(k - 1);
                let start = theta_pos[(w + 1) % k];
                let span = TAU - gaps[w];
                let mid = start + span / 2.0;
                if p == full {
                    mid
                } else {
                    mid + PI
                }
            } else {
                let ppos = (0..k).filter(|&r| p >> r & 1 == 1).fold(0u32, |a, r| a | 1 << pos[r]);
                let (s, len) = cyclic_interval(ppos, k).expect("checked contiguous");
                let angle_at = |p: usize, laps: usize| theta_pos[p % k] + TAU * ((p / k + laps) as f64);
                let start_p = angle_at(s, 0);
                let end_p = angle_at(s + len - 1, 0);
                let start_n = angle_at(s + len, 0);
                let end_n = angle_at(s + k - 1, 0);
                // Boundary direction b in the gap after P and b + π in the gap after N.
                let lo = end_p.max(end_n - PI);
                let hi = start_n.min(start_p + TAU - PI);
                let b = 0.5 * (lo + hi);
                b - PI / 2.0
            }
        })
        .collect();
    let v = DenseMatrix::from_fn(m.cols(), 2, |j, c| if c == 0 { psi[j].cos() } else { psi[j].sin() });
    SignWitness::new(u, v)
}
