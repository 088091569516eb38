use serde::{Deserialize, Serialize};

use super::comm::CommMatrix;
use super::rect::Rectangle;
use crate::error::{Error, Result};

const MASS_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum DistKind {
    General,
    Product { row: Vec<f64>, col: Vec<f64> },
}

/// Probability distribution over the cells of a `rows × cols` matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    kind: DistKind,
}

impl Distribution {
    /// Validates nonnegativity and unit total mass (within `1e-12`).
    pub fn new(rows: usize, cols: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != rows * cols {
            return Err(Error::Dimension(format!("expected {} weights, got {}", rows * cols, weights.len())));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidArgument(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { rows, cols, weights, kind: DistKind::General })
    }

    /// Clamps small negatives to zero and rescales to unit mass.
    pub fn normalized(rows: usize, cols: usize, mut weights: Vec<f64>) -> Result<Self> {
        for w in weights.iter_mut() {
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidArgument("distribution has no positive mass".into()));
        }
        for w in weights.iter_mut() {
            *w /= total;
        }
        let mut d = Self::new(rows, cols, weights.clone());
        if d.is_err() {
            // Rounding of the division can leave |Σ - 1| just above 1e-12 for large supports.
            let s: f64 = weights.iter().sum();
            if let Some(k) = weights.iter().position(|&w| w > 0.0) {
                weights[k] += 1.0 - s;
            }
            d = Self::new(rows, cols, weights);
        }
        d
    }

    pub fn uniform(rows: usize, cols: usize) -> Self {
        let n = (rows * cols) as f64;
        let row = vec![1.0 / rows as f64; rows];
        let col = vec![1.0 / cols as f64; cols];
        Self { rows, cols, weights: vec![1.0 / n; rows * cols], kind: DistKind::Product { row, col } }
    }

    /// Uniform over the cells where `keep` holds.
    pub fn uniform_on(rows: usize, cols: usize, keep: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let w: Vec<f64> = (0..rows * cols).map(|k| if keep(k / cols, k % cols) { 1.0 } else { 0.0 }).collect();
        Self::normalized(rows, cols, w)
    }

    pub fn product(row: Vec<f64>, col: Vec<f64>) -> Result<Self> {
        for (name, m) in [("row", &row), ("col", &col)] {
            let s: f64 = m.iter().sum();
            if m.iter().any(|&w| !(w >= 0.0)) || (s - 1.0).abs() > MASS_TOL {
                return Err(Error::InvalidArgument(format!("{name} marginal is not a distribution")));
            }
        }
        let weights = row.iter().flat_map(|&a| col.iter().map(move |&b| a * b)).collect();
        Ok(Self { rows: row.len(), cols: col.len(), weights, kind: DistKind::Product { row, col } })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn kind(&self) -> &DistKind {
        &self.kind
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.cols + j]
    }

    pub fn matches(&self, m: &CommMatrix) -> Result<()> {
        if self.rows != m.rows() || self.cols != m.cols() {
            return Err(Error::Dimension(format!(
                "distribution is {}x{}, matrix is {}x{}",
                self.rows,
                self.cols,
                m.rows(),
                m.cols()
            )));
        }
        Ok(())
    }

    /// `μ(R)`.
    pub fn mass(&self, r: &Rectangle) -> f64 {
        r.cells().map(|(i, j)| self.at(i, j)).sum()
    }

    /// `μ(R ∩ f⁻¹(z))` for the Boolean view of `m`.
    pub fn mass_of_value(&self, m: &CommMatrix, r: &Rectangle, z: bool) -> f64 {
        r.cells().filter(|&(i, j)| m.bit(i, j) == z).map(|(i, j)| self.at(i, j)).sum()
    }

    /// `μ(f⁻¹(z))`.
    pub fn fiber_mass(&self, m: &CommMatrix, z: bool) -> f64 {
        let mut s = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if m.bit(i, j) == z {
                    s += self.at(i, j);
                }
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_weights_factor() {
        let d = Distribution::product(vec![0.25, 0.75], vec![0.5, 0.5]).unwrap();
        assert!((d.at(1, 0) - 0.375).abs() < 1e-15);
        assert!((d.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_mass() {
        assert!(Distribution::new(1, 2, vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(1, 2, vec![-0.1, 1.1]).is_err());
        assert!(Distribution::normalized(1, 2, vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn normalization_rescales() {
        let d = Distribution::normalized(3, 7, vec![1.0; 21]).unwrap();
        assert!((d.at(2, 6) - 1.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn rectangle_masses() {
        let m = CommMatrix::from_bool_fn(2, 2, |i, j| i == j).unwrap();
        let u = Distribution::uniform(2, 2);
        let full = Rectangle::full(2, 2);
        assert!((u.mass(&full) - 1.0).abs() < 1e-15);
        assert!((u.mass_of_value(&m, &full, true) - 0.5).abs() < 1e-15);
        assert!((u.fiber_mass(&m, false) - 0.5).abs() < 1e-15);
    }
}
