use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::matrices::CommMatrix;

/// Size and effort caps for the exact searches. Exceeding any cap is an error,
/// never a silently degraded answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_rows: usize,
    pub max_cols: usize,
    pub max_states: usize,
    pub time_limit_ms: u64,
}

impl SearchBudget {
    pub fn new(max_rows: usize, max_cols: usize) -> Self {
        Self { max_rows, max_cols, max_states: 200_000_000, time_limit_ms: 600_000 }
    }

    /// Caps for protocol-tree search.
    pub fn protocol() -> Self {
        Self::new(10, 10)
    }

    /// Caps for cover numbers.
    pub fn cover() -> Self {
        Self::new(8, 8)
    }

    /// Caps for partition numbers.
    pub fn partition() -> Self {
        Self::new(6, 6)
    }

    /// Caps for the two-dimensional sign-rank decision (distinct rows).
    pub fn signrank() -> Self {
        Self::new(9, 4096)
    }

    pub fn with_states(mut self, max_states: usize) -> Self {
        self.max_states = max_states;
        self
    }

    pub fn with_time_limit_ms(mut self, ms: u64) -> Self {
        self.time_limit_ms = ms;
        self
    }

    pub fn check_dims(&self, m: &CommMatrix, op: &str) -> Result<()> {
        if m.rows() > self.max_rows || m.cols() > self.max_cols {
            return Err(Error::SizeLimit(format!(
                "{op}: {}x{} exceeds cap {}x{}",
                m.rows(),
                m.cols(),
                self.max_rows,
                self.max_cols
            )));
        }
        Ok(())
    }

    pub fn meter(&self, op: &'static str) -> Meter {
        Meter {
            op,
            states: 0,
            max_states: self.max_states,
            start: Instant::now(),
            limit: Duration::from_millis(self.time_limit_ms),
        }
    }
}

/// Counts visited states and enforces the time limit.
#[derive(Debug)]
pub struct Meter {
    op: &'static str,
    states: usize,
    max_states: usize,
    start: Instant,
    limit: Duration,
}

impl Meter {
    #[inline]
    pub fn tick(&mut self) -> Result<()> {
        self.states += 1;
        if self.states > self.max_states {
            return Err(Error::BudgetExceeded(format!("{}: more than {} states", self.op, self.max_states)));
        }
        if self.states & 0xfff == 0 && self.start.elapsed() > self.limit {
            return Err(Error::BudgetExceeded(format!("{}: time limit {:?} reached", self.op, self.limit)));
        }
        Ok(())
    }

    pub fn states(&self) -> usize {
        self.states
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::gen_equality;

    #[test]
    fn dims_and_states_enforced() {
        let m = gen_equality(4).unwrap();
        assert!(SearchBudget::protocol().check_dims(&m, "D").is_err());
        let mut meter = SearchBudget::new(1, 1).with_states(2).meter("t");
        assert!(meter.tick().is_ok());
        assert!(meter.tick().is_ok());
        assert!(matches!(meter.tick(), Err(Error::BudgetExceeded(_))));
    }
}
