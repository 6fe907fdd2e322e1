//! Cost guards for operations whose running time can explode.

use crate::error::{Error, Result};

/// Fields above this size are refused by operations quadratic in `p`.
pub const MAX_QUADRATIC_FIELD: u64 = 1 << 20;
/// Triple loops over `A x B x C`.
pub const MAX_TRIPLES: u128 = 1_000_000_000;
/// Quadruple loops over `A^4`.
pub const MAX_QUADRUPLES: u128 = 1_000_000_000;
/// Largest multiplication table side.
pub const MAX_MULT_TABLE: u64 = 100_000;

/// Whether the cost limits above are enforced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Budget {
    pub override_limits: bool,
}

impl Budget {
    pub const ENFORCED: Budget = Budget {
        override_limits: false,
    };
    pub const UNLIMITED: Budget = Budget {
        override_limits: true,
    };

    pub fn check(&self, what: &str, cost: u128, limit: u128) -> Result<()> {
        if self.override_limits || cost <= limit {
            Ok(())
        } else {
            Err(Error::BudgetExceeded {
                what: what.to_string(),
                cost,
                limit,
            })
        }
    }

    pub fn check_quadratic_field(&self, what: &str, p: u64) -> Result<()> {
        self.check(what, p as u128, MAX_QUADRATIC_FIELD as u128)
    }
}
