//! Optimal deterministic protocol trees by memoized search over sub-rectangles.

use super::budget::{Meter, SearchBudget};
use crate::error::Result;
use crate::matrices::{CommMatrix, Rectangle};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Speaker {
    RowPlayer,
    ColPlayer,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProtocolNode {
    Leaf(bool),
    /// The speaker announces whether its input lies in `part` (bit 1) or not (bit 0).
    Internal { speaker: Speaker, part: u64, zero: Box<ProtocolNode>, one: Box<ProtocolNode> },
}

/// A deterministic protocol over the full matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolTree {
    pub root: ProtocolNode,
    pub depth: usize,
    pub leaf_count: usize,
}

impl ProtocolTree {
    fn from_root(root: ProtocolNode) -> Self {
        fn walk(n: &ProtocolNode) -> (usize, usize) {
            match n {
                ProtocolNode::Leaf(_) => (0, 1),
                ProtocolNode::Internal { zero, one, .. } => {
                    let (d0, l0) = walk(zero);
                    let (d1, l1) = walk(one);
                    (1 + d0.max(d1), l0 + l1)
                }
            }
        }
        let (depth, leaf_count) = walk(&root);
        Self { root, depth, leaf_count }
    }

    /// Leaf rectangles with their output values.
    pub fn leaves(&self, rows: usize, cols: usize) -> Vec<(Rectangle, bool)> {
        fn walk(n: &ProtocolNode, r: u64, c: u64, rows: usize, cols: usize, out: &mut Vec<(Rectangle, bool)>) {
            match n {
                ProtocolNode::Leaf(v) => out.push((Rectangle::from_masks(rows, cols, r, c), *v)),
                ProtocolNode::Internal { speaker, part, zero, one } => match speaker {
                    Speaker::RowPlayer => {
                        walk(zero, r & !part, c, rows, cols, out);
                        walk(one, r & part, c, rows, cols, out);
                    }
                    Speaker::ColPlayer => {
                        walk(zero, r, c & !part, rows, cols, out);
                        walk(one, r, c & part, rows, cols, out);
                    }
                },
            }
        }
        let mut out = Vec::new();
        walk(&self.root, full_mask(rows), full_mask(cols), rows, cols, &mut out);
        out
    }

    /// Checks that every leaf is a non-empty rectangle on which `m` equals the leaf output.
    /// Leaves of a protocol partition the matrix by construction.
    pub fn verify(&self, m: &CommMatrix) -> bool {
        let leaves = self.leaves(m.rows(), m.cols());
        leaves.len() == self.leaf_count
            && leaves.iter().all(|(r, v)| !r.is_empty() && r.cells().all(|(i, j)| m.bit(i, j) == *v))
    }

    /// Runs the protocol on input `(x, y)`, returning output and bits sent.
    pub fn run(&self, x: usize, y: usize) -> (bool, usize) {
        let mut node = &self.root;
        let mut bits = 0;
        loop {
            match node {
                ProtocolNode::Leaf(v) => return (*v, bits),
                ProtocolNode::Internal { speaker, part, zero, one } => {
                    let input = if *speaker == Speaker::RowPlayer { x } else { y };
                    bits += 1;
                    node = if part >> input & 1 == 1 { one } else { zero };
                }
            }
        }
    }
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Goal {
    Depth,
    Leaves,
}

const UNKNOWN: u16 = u16::MAX;

struct Search<'a> {
    cols: usize,
    row_masks: Vec<u64>,
    memo: Vec<u16>,
    goal: Goal,
    meter: Meter,
    _m: &'a CommMatrix,
}

impl<'a> Search<'a> {
    fn new(m: &'a CommMatrix, goal: Goal, budget: &SearchBudget, op: &'static str) -> Result<Self> {
        budget.check_dims(m, op)?;
        let states = 1usize << (m.rows() + m.cols());
        if states > budget.max_states {
            return Err(crate::error::Error::BudgetExceeded(format!("{op}: {states} memo states")));
        }
        Ok(Self {
            cols: m.cols(),
            row_masks: (0..m.rows()).map(|i| m.row_mask(i)).collect(),
            memo: vec![UNKNOWN; states],
            goal,
            meter: budget.meter(op),
            _m: m,
        })
    }

    #[inline]
    fn key(&self, r: u64, c: u64) -> usize {
        ((r as usize) << self.cols) | c as usize
    }

    /// `Some(v)` when the rectangle is monochromatic with value `v`.
    fn mono(&self, r: u64, c: u64) -> Option<bool> {
        let mut any_one = false;
        let mut any_zero = false;
        let mut rr = r;
        while rr != 0 {
            let i = rr.trailing_zeros() as usize;
            rr &= rr - 1;
            let hits = self.row_masks[i] & c;
            any_one |= hits != 0;
            any_zero |= hits != c;
            if any_one && any_zero {
                return None;
            }
        }
        Some(any_one)
    }

    fn combine(&self, a: u16, b: u16) -> u16 {
        match self.goal {
            Goal::Depth => 1 + a.max(b),
            Goal::Leaves => a + b,
        }
    }

    fn solve(&mut self, r: u64, c: u64) -> Result<u16> {
        let k = self.key(r, c);
        if self.memo[k] != UNKNOWN {
            return Ok(self.memo[k]);
        }
        self.meter.tick()?;
        let base = match self.goal {
            Goal::Depth => 0,
            Goal::Leaves => 1,
        };
        if self.mono(r, c).is_some() {
            self.memo[k] = base;
            return Ok(base);
        }
        let floor = match self.goal {
            Goal::Depth => 1,
            Goal::Leaves => 2,
        };
        let mut best = u16::MAX - 1;
        for (set, is_row) in [(r, true), (c, false)] {
            if set.count_ones() < 2 {
                continue;
            }
            let low = set & set.wrapping_neg();
            let rest = set & !low;
            // Subsets containing the lowest element, excluding the full set.
            let mut sub = rest;
            loop {
                let part = sub | low;
                if part != set {
                    let other = set & !part;
                    let (a, b) = if is_row {
                        (self.solve(part, c)?, self.solve(other, c)?)
                    } else {
                        (self.solve(r, part)?, self.solve(r, other)?)
                    };
                    best = best.min(self.combine(a, b));
                    if best == floor {
                        self.memo[k] = best;
                        return Ok(best);
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
        }
        self.memo[k] = best;
        Ok(best)
    }

    fn build(&mut self, r: u64, c: u64) -> Result<ProtocolNode> {
        if let Some(v) = self.mono(r, c) {
            return Ok(ProtocolNode::Leaf(v));
        }
        let target = self.solve(r, c)?;
        for (set, is_row) in [(r, true), (c, false)] {
            if set.count_ones() < 2 {
                continue;
            }
            let low = set & set.wrapping_neg();
            let rest = set & !low;
            let mut sub = rest;
            loop {
                let part = sub | low;
                if part != set {
                    let other = set & !part;
                    let (a, b) = if is_row {
                        (self.solve(part, c)?, self.solve(other, c)?)
                    } else {
                        (self.solve(r, part)?, self.solve(r, other)?)
                    };
                    if self.combine(a, b) == target {
                        let (speaker, one, zero) = if is_row {
                            (Speaker::RowPlayer, self.build(part, c)?, self.build(other, c)?)
                        } else {
                            (Speaker::ColPlayer, self.build(r, part)?, self.build(r, other)?)
                        };
                        return Ok(ProtocolNode::Internal {
                            speaker,
                            part,
                            zero: Box::new(zero),
                            one: Box::new(one),
                        });
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
        }
        unreachable!("memoized optimum must be realized by some split")
    }
}

/// `D(M)`: minimum depth of a protocol tree with monochromatic leaves.
pub fn deterministic_cc(m: &CommMatrix, budget: &SearchBudget) -> Result<usize> {
    let mut s = Search::new(m, Goal::Depth, budget, "deterministic_cc")?;
    Ok(s.solve(full_mask(m.rows()), full_mask(m.cols()))? as usize)
}

/// `D(M)` with an optimal tree.
pub fn deterministic_protocol(m: &CommMatrix, budget: &SearchBudget) -> Result<ProtocolTree> {
    let mut s = Search::new(m, Goal::Depth, budget, "deterministic_cc")?;
    let root = s.build(full_mask(m.rows()), full_mask(m.cols()))?;
    Ok(ProtocolTree::from_root(root))
}

/// `C^P(M)`: minimum number of leaves of a protocol tree.
pub fn protocol_partition_number(m: &CommMatrix, budget: &SearchBudget) -> Result<usize> {
    let mut s = Search::new(m, Goal::Leaves, budget, "protocol_partition_number")?;
    Ok(s.solve(full_mask(m.rows()), full_mask(m.cols()))? as usize)
}

/// `C^P(M)` with a leaf-optimal tree.
pub fn protocol_partition_tree(m: &CommMatrix, budget: &SearchBudget) -> Result<ProtocolTree> {
    let mut s = Search::new(m, Goal::Leaves, budget, "protocol_partition_number")?;
    let root = s.build(full_mask(m.rows()), full_mask(m.cols()))?;
    Ok(ProtocolTree::from_root(root))
}
