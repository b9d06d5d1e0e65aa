//! Resource limits shared by the enumerators and searches.
//!
//! Exceeding a limit is reported as [`Error::BudgetExceeded`]; nothing is
//! silently truncated.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Full group enumeration is allowed while `L^2 · log2(p)` stays below this.
    pub enum_bits: u32,
    /// Maximum number of candidate receiver subsets examined by generators.
    pub subset_cap: u64,
    /// Maximum number of product choices for the condition checkers.
    pub product_cap: u64,
    /// Maximum number of search nodes for the scalar brute force.
    pub scalar_nodes: u64,
    /// Wall-clock cap for a single search phase, in milliseconds.
    pub time_ms: Option<u64>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            enum_bits: 25,
            subset_cap: 10_000_000,
            product_cap: 1 << 24,
            scalar_nodes: 200_000_000,
            time_ms: None,
        }
    }
}

impl Budget {
    /// Defaults, with `time_ms` taken from `LNC_BUDGET_MS` when set.
    pub fn from_env() -> Self {
        let time_ms = std::env::var("LNC_BUDGET_MS").ok().and_then(|v| v.parse().ok());
        Budget {
            time_ms,
            ..Budget::default()
        }
    }

    pub fn deadline(&self) -> Deadline {
        Deadline {
            at: self.time_ms.map(|ms| Instant::now() + Duration::from_millis(ms)),
            limit_ms: self.time_ms.unwrap_or(0),
        }
    }

    pub fn check_enum(&self, what: &str, l: usize, p: u32) -> Result<()> {
        let bits = (l * l) as f64 * (p as f64).log2();
        if bits > self.enum_bits as f64 + 1e-9 {
            return Err(Error::budget(what, bits.ceil() as u64, self.enum_bits as u64));
        }
        Ok(())
    }
}

/// A phase deadline derived from [`Budget::time_ms`].
#[derive(Clone, Copy, Debug)]
pub struct Deadline {
    at: Option<Instant>,
    limit_ms: u64,
}

impl Deadline {
    pub fn none() -> Self {
        Deadline { at: None, limit_ms: 0 }
    }

    pub fn expired(&self) -> bool {
        self.at.is_some_and(|t| Instant::now() >= t)
    }

    pub fn check(&self, what: &str) -> Result<()> {
        if self.expired() {
            return Err(Error::budget(what, self.limit_ms + 1, self.limit_ms));
        }
        Ok(())
    }
}
