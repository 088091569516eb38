//! Cover and partition numbers over cell bitmasks (at most 64 cells).

use std::collections::HashMap;

use super::budget::{Meter, SearchBudget};
use crate::error::{Error, Result};
use crate::matrices::{CommMatrix, Convention};

/// Cell mask of the rectangle `rows × cols` in a matrix with `ncols` columns.
pub(crate) fn cell_mask(rows: u64, cols: u64, ncols: usize) -> u64 {
    let mut out = 0u64;
    let mut r = rows;
    while r != 0 {
        let i = r.trailing_zeros() as usize;
        r &= r - 1;
        out |= cols << (i * ncols);
    }
    out
}

fn fits(m: &CommMatrix, budget: &SearchBudget, op: &str) -> Result<()> {
    budget.check_dims(m, op)?;
    if m.rows() * m.cols() > 64 {
        return Err(Error::SizeLimit(format!("{op}: more than 64 cells")));
    }
    Ok(())
}

/// Cell mask of the `z`-cells.
pub(crate) fn value_cells(m: &CommMatrix, z: bool) -> u64 {
    let mut out = 0u64;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if m.bit(i, j) == z {
                out |= 1 << (i * m.cols() + j);
            }
        }
    }
    out
}

/// Maximal `z`-monochromatic rectangles as `(rows, cols)` masks.
pub fn maximal_rectangles(m: &CommMatrix, z: bool) -> Vec<(u64, u64)> {
    let (r, c) = (m.rows(), m.cols());
    let full_c = if c == 64 { u64::MAX } else { (1u64 << c) - 1 };
    let zrow: Vec<u64> = (0..r).map(|i| if z { m.row_mask(i) } else { !m.row_mask(i) & full_c }).collect();
    let mut seen = std::collections::BTreeSet::new();
    for rs in 1u64..(1u64 << r) {
        let mut cols = full_c;
        let mut t = rs;
        while t != 0 {
            let i = t.trailing_zeros() as usize;
            t &= t - 1;
            cols &= zrow[i];
        }
        if cols == 0 {
            continue;
        }
        let closure = (0..r).filter(|&i| zrow[i] & cols == cols).fold(0u64, |a, i| a | 1 << i);
        if closure == rs {
            seen.insert((rs, cols));
        }
    }
    seen.into_iter().collect()
}

/// Every non-empty `z`-monochromatic rectangle.
fn all_mono_rectangles(m: &CommMatrix, z: bool) -> Vec<(u64, u64)> {
    let (r, c) = (m.rows(), m.cols());
    let full_c = if c == 64 { u64::MAX } else { (1u64 << c) - 1 };
    let zrow: Vec<u64> = (0..r).map(|i| if z { m.row_mask(i) } else { !m.row_mask(i) & full_c }).collect();
    let mut out = Vec::new();
    for rs in 1u64..(1u64 << r) {
        let mut cols = full_c;
        let mut t = rs;
        while t != 0 {
            let i = t.trailing_zeros() as usize;
            t &= t - 1;
            cols &= zrow[i];
        }
        // Every non-empty subset of the common columns.
        let mut sub = cols;
        while sub != 0 {
            out.push((rs, sub));
            sub = (sub - 1) & cols;
        }
    }
    out
}

/// Minimum number of sets whose union is `universe` (sets may overlap).
pub fn min_set_cover(universe: u64, sets: &[u64], meter: &mut Meter) -> Result<Option<Vec<usize>>> {
    if universe == 0 {
        return Ok(Some(Vec::new()));
    }
    if sets.iter().fold(0u64, |a, &s| a | s) & universe != universe {
        return Ok(None);
    }
    // Greedy incumbent.
    let mut greedy = Vec::new();
    let mut left = universe;
    while left != 0 {
        let (k, _) = sets
            .iter()
            .enumerate()
            .max_by_key(|(k, &s)| ((s & left).count_ones(), std::cmp::Reverse(*k)))
            .expect("non-empty");
        greedy.push(k);
        left &= !sets[k];
    }
    let max_size = sets.iter().map(|s| (s & universe).count_ones()).max().unwrap_or(1).max(1);
    let mut best = greedy;
    let mut stack = Vec::new();
    cover_dfs(universe, sets, max_size, &mut stack, &mut best, meter)?;
    Ok(Some(best))
}

fn cover_dfs(
    left: u64,
    sets: &[u64],
    max_size: u32,
    chosen: &mut Vec<usize>,
    best: &mut Vec<usize>,
    meter: &mut Meter,
) -> Result<()> {
    meter.tick()?;
    if left == 0 {
        if chosen.len() < best.len() {
            *best = chosen.clone();
        }
        return Ok(());
    }
    let bound = chosen.len() + left.count_ones().div_ceil(max_size) as usize;
    if bound >= best.len() {
        return Ok(());
    }
    // Branch on the uncovered cell with the fewest candidate sets.
    let mut pick = None;
    let mut t = left;
    while t != 0 {
        let cell = t.trailing_zeros();
        t &= t - 1;
        let cnt = sets.iter().filter(|&&s| s >> cell & 1 == 1).count();
        if pick.is_none_or(|(_, c)| cnt < c) {
            pick = Some((cell, cnt));
        }
    }
    let (cell, _) = pick.expect("left non-empty");
    let mut cands: Vec<usize> = (0..sets.len()).filter(|&k| sets[k] >> cell & 1 == 1).collect();
    cands.sort_by_key(|&k| (std::cmp::Reverse((sets[k] & left).count_ones()), k));
    for k in cands {
        chosen.push(k);
        cover_dfs(left & !sets[k], sets, max_size, chosen, best, meter)?;
        chosen.pop();
    }
    Ok(())
}

/// Minimum number of pairwise-disjoint sets whose union is exactly `universe`.
/// `upper` is a known feasible size used as the initial incumbent.
pub fn min_exact_cover(universe: u64, sets: &[u64], upper: Option<usize>, meter: &mut Meter) -> Result<Option<usize>> {
    if universe == 0 {
        return Ok(Some(0));
    }
    let sets: Vec<u64> = sets.iter().copied().filter(|&s| s != 0 && s & !universe == 0).collect();
    let max_size = sets.iter().map(|s| s.count_ones()).max().unwrap_or(0);
    if max_size == 0 {
        return Ok(None);
    }
    // Candidates grouped by their lowest cell.
    let mut by_low: Vec<Vec<u64>> = vec![Vec::new(); 64];
    for &s in &sets {
        by_low[s.trailing_zeros() as usize].push(s);
    }
    for v in by_low.iter_mut() {
        v.sort_by_key(|s| std::cmp::Reverse(s.count_ones()));
    }
    let mut best = upper.map(|u| u + 1).unwrap_or(usize::MAX);
    let mut seen: HashMap<u64, usize> = HashMap::new();
    exact_dfs(universe, 0, &by_low, max_size, &mut best, &mut seen, meter)?;
    Ok(if best == usize::MAX || upper.is_some_and(|u| best > u) { None } else { Some(best) })
}

fn exact_dfs(
    left: u64,
    used: usize,
    by_low: &[Vec<u64>],
    max_size: u32,
    best: &mut usize,
    seen: &mut HashMap<u64, usize>,
    meter: &mut Meter,
) -> Result<()> {
    meter.tick()?;
    if left == 0 {
        *best = (*best).min(used);
        return Ok(());
    }
    if used + (left.count_ones().div_ceil(max_size) as usize) >= *best {
        return Ok(());
    }
    match seen.get(&left) {
        Some(&u) if u <= used => return Ok(()),
        _ => {
            seen.insert(left, used);
        }
    }
    // Every cell below the lowest uncovered one is covered, so the covering
    // set of that cell has it as its own lowest cell.
    let cell = left.trailing_zeros() as usize;
    for &s in &by_low[cell] {
        if s & !left == 0 {
            exact_dfs(left & !s, used + 1, by_low, max_size, best, seen, meter)?;
        }
    }
    Ok(())
}

/// `C^z(M)`: minimum number of `z`-monochromatic rectangles covering all `z`-cells.
pub fn cover_number(m: &CommMatrix, z: bool, budget: &SearchBudget) -> Result<usize> {
    Ok(cover_with_witness(m, z, budget)?.len())
}

/// An optimal `z`-cover as `(rows, cols)` masks.
pub fn cover_with_witness(m: &CommMatrix, z: bool, budget: &SearchBudget) -> Result<Vec<(u64, u64)>> {
    fits(m, budget, "cover_number")?;
    let universe = value_cells(m, z);
    if universe == 0 {
        return Ok(Vec::new());
    }
    let rects = maximal_rectangles(m, z);
    let sets: Vec<u64> = rects.iter().map(|&(r, c)| cell_mask(r, c, m.cols())).collect();
    let mut meter = budget.meter("cover_number");
    let pick = min_set_cover(universe, &sets, &mut meter)?.expect("single cells cover every z-cell");
    Ok(pick.into_iter().map(|k| rects[k]).collect())
}

/// `C(M) = C⁰(M) + C¹(M)`.
pub fn cover_total(m: &CommMatrix, budget: &SearchBudget) -> Result<usize> {
    Ok(cover_number(m, false, budget)? + cover_number(m, true, budget)?)
}

/// `N^z = log₂ C^z`; `None` when there are no `z`-cells.
pub fn n_z(m: &CommMatrix, z: bool, budget: &SearchBudget) -> Result<Option<f64>> {
    let c = cover_number(m, z, budget)?;
    Ok(if c == 0 { None } else { Some((c as f64).log2()) })
}

/// Nonnegative sign-rank of a Boolean matrix, which equals `C¹`.
pub fn boolean_rank(m: &CommMatrix, budget: &SearchBudget) -> Result<usize> {
    m.require(Convention::Boolean01, "boolean_rank")?;
    cover_number(m, true, budget)
}

/// `C^D(M)`: minimum partition of all cells into monochromatic rectangles.
pub fn partition_number(m: &CommMatrix, budget: &SearchBudget) -> Result<usize> {
    let small = SearchBudget { max_rows: budget.max_rows.min(6), max_cols: budget.max_cols.min(6), ..*budget };
    fits(m, &small, "partition_number")?;
    let upper = super::protocol::protocol_partition_number(m, &SearchBudget::new(10, 10))?;
    let mut sets: Vec<u64> = Vec::new();
    for z in [false, true] {
        sets.extend(all_mono_rectangles(m, z).into_iter().map(|(r, c)| cell_mask(r, c, m.cols())));
    }
    let universe = value_cells(m, false) | value_cells(m, true);
    let mut meter = small.meter("partition_number");
    Ok(min_exact_cover(universe, &sets, Some(upper), &mut meter)?.expect("protocol partition is feasible"))
}

/// Minimum partition of the 1-cells into all-ones rectangles (0 for the zero matrix).
pub fn ones_partition_number(m: &CommMatrix, budget: &SearchBudget) -> Result<usize> {
    m.require(Convention::Boolean01, "ones_partition_number")?;
    let small = SearchBudget { max_rows: budget.max_rows.min(6), max_cols: budget.max_cols.min(6), ..*budget };
    fits(m, &small, "ones_partition_number")?;
    let sets: Vec<u64> = all_mono_rectangles(m, true).into_iter().map(|(r, c)| cell_mask(r, c, m.cols())).collect();
    let universe = value_cells(m, true);
    let mut meter = small.meter("ones_partition_number");
    Ok(min_exact_cover(universe, &sets, None, &mut meter)?.expect("single cells partition the ones"))
}

/// `(rank, ones partition number)`, a bracket on nonnegative rank.
pub fn rank_plus_bracket(m: &CommMatrix, budget: &SearchBudget) -> Result<(usize, usize)> {
    let upper = ones_partition_number(m, budget)?;
    Ok((super::rank::rank_exact(m), upper))
}
