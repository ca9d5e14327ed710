//! Compute budgets shared by every solver.
//!
//! A budget is either wall-clock seconds or a count of abstract quanta. Each
//! solver defines what one quantum is (an objective evaluation, a local DMRG
//! update, a walker step) and checks the meter only at its own checkpoints,
//! so quanta-mode runs are fully deterministic.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grace fraction tolerated past a wall-time limit before a candidate is
/// abandoned outright.
pub const WALL_TIME_GRACE: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    WallTime(f64),
    Quanta(u64),
}

impl Budget {
    pub fn seconds(s: f64) -> Self {
        Budget::WallTime(s)
    }

    pub fn quanta(n: u64) -> Self {
        Budget::Quanta(n)
    }

    /// True for a zero quanta count or a non-positive time limit.
    pub fn is_zero(&self) -> bool {
        match *self {
            Budget::WallTime(s) => !(s > 0.0),
            Budget::Quanta(n) => n == 0,
        }
    }

    pub fn is_quanta(&self) -> bool {
        matches!(self, Budget::Quanta(_))
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Budget::WallTime(s) if s.is_nan() || s <= 0.0 => Err(Error::BudgetZero),
            Budget::WallTime(s) if !s.is_finite() => {
                Err(Error::invalid("wall-time budget must be finite"))
            }
            _ => Ok(()),
        }
    }

    pub fn start(&self) -> BudgetMeter {
        BudgetMeter { budget: *self, started: Instant::now(), used: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct BudgetMeter {
    budget: Budget,
    started: Instant,
    used: u64,
}

impl BudgetMeter {
    /// Claims `n` quanta. Returns false (and claims nothing) when the budget
    /// cannot cover them. In wall-time mode the claim succeeds while the
    /// limit has not yet passed.
    pub fn try_consume(&mut self, n: u64) -> bool {
        match self.budget {
            Budget::Quanta(limit) => {
                if self.used.saturating_add(n) > limit {
                    false
                } else {
                    self.used += n;
                    true
                }
            }
            Budget::WallTime(limit) => {
                if self.elapsed().as_secs_f64() >= limit {
                    false
                } else {
                    self.used = self.used.saturating_add(n);
                    true
                }
            }
        }
    }

    pub fn exhausted(&self) -> bool {
        match self.budget {
            Budget::Quanta(limit) => self.used >= limit,
            Budget::WallTime(limit) => self.elapsed().as_secs_f64() >= limit,
        }
    }

    /// Past the limit plus grace; only meaningful in wall-time mode.
    pub fn overrun(&self) -> bool {
        match self.budget {
            Budget::Quanta(_) => false,
            Budget::WallTime(limit) => {
                self.elapsed().as_secs_f64() > limit * (1.0 + WALL_TIME_GRACE)
            }
        }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn remaining_quanta(&self) -> Option<u64> {
        match self.budget {
            Budget::Quanta(limit) => Some(limit.saturating_sub(self.used)),
            Budget::WallTime(_) => None,
        }
    }

    pub fn elapsed(&self) -> Duration {
        self.started.elapsed()
    }

    pub fn budget(&self) -> Budget {
        self.budget
    }
}
