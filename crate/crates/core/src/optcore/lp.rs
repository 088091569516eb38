use crate::scalar::Field;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub rel: Relation,
    pub rhs: T,
}

/// Dense linear program. Variables default to `x ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram<T> {
    pub sense: Sense,
    pub objective: Vec<T>,
    pub lower: Vec<Option<T>>,
    pub upper: Vec<Option<T>>,
    pub constraints: Vec<Constraint<T>>,
    pub names: Vec<String>,
}

impl<T: Field> LinearProgram<T> {
    pub fn new(sense: Sense, num_vars: usize) -> Self {
        Self {
            sense,
            objective: vec![T::zero(); num_vars],
            lower: vec![Some(T::zero()); num_vars],
            upper: vec![None; num_vars],
            constraints: Vec::new(),
            names: (0..num_vars).map(|j| format!("x{j}")).collect(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn set_objective(&mut self, j: usize, c: T) {
        self.objective[j] = c;
    }

    pub fn set_bounds(&mut self, j: usize, lower: Option<T>, upper: Option<T>) {
        self.lower[j] = lower;
        self.upper[j] = upper;
    }

    pub fn set_free(&mut self, j: usize) {
        self.set_bounds(j, None, None);
    }

    pub fn set_name(&mut self, j: usize, name: impl Into<String>) {
        self.names[j] = name.into();
    }

    /// Adds a dense row; returns its index.
    pub fn add_constraint(&mut self, coeffs: Vec<T>, rel: Relation, rhs: T) -> usize {
        assert_eq!(coeffs.len(), self.num_vars(), "constraint width must equal variable count");
        self.constraints.push(Constraint { coeffs, rel, rhs });
        self.constraints.len() - 1
    }

    /// Adds a row given as `(index, coefficient)` pairs.
    pub fn add_sparse(&mut self, terms: &[(usize, T)], rel: Relation, rhs: T) -> usize {
        let mut coeffs = vec![T::zero(); self.num_vars()];
        for (j, c) in terms {
            coeffs[*j] = coeffs[*j].clone() + c.clone();
        }
        self.add_constraint(coeffs, rel, rhs)
    }

    pub fn objective_value(&self, x: &[T]) -> T {
        self.objective.iter().zip(x).fold(T::zero(), |a, (c, v)| a + c.clone() * v.clone())
    }

    /// Largest violation of any row or bound at `x`, in `f64`.
    pub fn max_violation(&self, x: &[T]) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.num_vars() {
            let v = x[j].to_f64();
            if let Some(l) = &self.lower[j] {
                worst = worst.max(l.to_f64() - v);
            }
            if let Some(u) = &self.upper[j] {
                worst = worst.max(v - u.to_f64());
            }
        }
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, v)| a.to_f64() * v.to_f64()).sum();
            let r = c.rhs.to_f64();
            let viol = match c.rel {
                Relation::Le => lhs - r,
                Relation::Ge => r - lhs,
                Relation::Eq => (lhs - r).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    /// Converts every coefficient to another field.
    pub fn convert<U: Field>(&self) -> LinearProgram<U> {
        let cv = |t: &T| U::from_rational(&t.to_rational());
        LinearProgram {
            sense: self.sense,
            objective: self.objective.iter().map(cv).collect(),
            lower: self.lower.iter().map(|b| b.as_ref().map(cv)).collect(),
            upper: self.upper.iter().map(|b| b.as_ref().map(cv)).collect(),
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint { coeffs: c.coeffs.iter().map(cv).collect(), rel: c.rel, rhs: cv(&c.rhs) })
                .collect(),
            names: self.names.clone(),
        }
    }

    pub fn is_finite(&self) -> bool {
        let fin = |t: &T| t.to_f64().is_finite();
        self.objective.iter().all(fin)
            && self.constraints.iter().all(|c| fin(&c.rhs) && c.coeffs.iter().all(fin))
            && self.lower.iter().chain(&self.upper).flatten().all(fin)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterLimit,
}

/// Result of a solve. `duals[i]` is the sensitivity `∂objective/∂rhs_i`.
#[derive(Clone, Debug)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    pub x: Vec<T>,
    pub duals: Vec<T>,
    pub objective: T,
    /// Lagrangian dual bound built from `duals` and the variable bounds.
    pub dual_objective: T,
    /// `|objective − dual_objective|`.
    pub gap: f64,
    /// Largest primal violation at `x`.
    pub residual: f64,
    /// Largest dual sign violation of the reduced costs.
    pub dual_residual: f64,
    pub iterations: usize,
    /// True when an `f64` solve failed its checks and was redone in exact arithmetic.
    pub exact_resolve: bool,
    /// True when the checks failed and no exact re-solve was possible.
    pub unstable: bool,
}

impl<T: Field> LpSolution<T> {
    pub fn value(&self) -> f64 {
        self.objective.to_f64()
    }

    /// Duality-gap check `|primal − dual| ≤ 1e-6·(1 + |objective|)`.
    pub fn gap_ok(&self) -> bool {
        self.gap <= 1e-6 * (1.0 + self.objective.to_f64().abs())
    }

    /// Full integrity check for optimal solutions.
    pub fn certified(&self) -> bool {
        self.status == LpStatus::Optimal && self.residual <= 1e-7 && self.gap_ok() && self.dual_residual <= 1e-7
    }
}
