//! Crate-wide error type.
//!
//! Errors fall into four rough categories that callers (in particular the
//! CLI) care about: contract violations (bad arguments to an operation),
//! configuration errors (unsupported or malformed setup), domain errors
//! (arguments outside an operation's mathematical domain), and resource
//! errors (an exhaustive computation whose estimated cost exceeds the
//! configured budget). Resource errors always carry the estimate so that a
//! failed run can report how far over budget the request was.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unsupported field width {0} (supported: 1..=16, 32, 64)")]
    UnsupportedWidth(u32),

    #[error("width mismatch: {left} vs {right}")]
    WidthMismatch { left: u32, right: u32 },

    #[error("value {value:#x} does not fit in {width} bits")]
    ValueTooWide { value: u64, width: u32 },

    #[error("zero has no multiplicative inverse")]
    ZeroInverse,

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("estimated cost {estimated} exceeds budget {budget}")]
    Budget { estimated: u128, budget: u128 },
}

impl Error {
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors that should map to the CLI's resource exit code.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget { .. })
    }
}

/// Evaluation budget for exhaustive operations, counted in elementary
/// evaluations (function-table lookups, support points visited, and the
/// like). The default is 2^28.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget(pub u128);

pub const DEFAULT_BUDGET: u128 = 1 << 28;

impl Default for Budget {
    fn default() -> Self {
        Budget(DEFAULT_BUDGET)
    }
}

impl Budget {
    /// Checks an up-front cost estimate against the budget.
    pub fn admit(&self, estimated: u128) -> Result<()> {
        if estimated > self.0 {
            Err(Error::Budget {
                estimated,
                budget: self.0,
            })
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_admits_up_to_limit() {
        let b = Budget(100);
        assert!(b.admit(100).is_ok());
        let err = b.admit(101).unwrap_err();
        assert!(err.is_budget());
        assert_eq!(
            err,
            Error::Budget {
                estimated: 101,
                budget: 100
            }
        );
    }

    #[test]
    fn default_budget_is_2_pow_28() {
        assert_eq!(Budget::default().0, 268_435_456);
    }
}
