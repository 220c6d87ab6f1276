//! Bound values that may carry a square root, and the reports produced
//! when an inequality instance is checked.

use num_traits::Signed;

use crate::error::Error;
use crate::numerics::{decimal_string, leq_sqrt_ratio, rat, Rational};

/// Right-hand side of a checked inequality. Square-root forms stay
/// symbolic so comparisons against them can be decided exactly.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundValue {
    /// A plain rational value.
    Exact(Rational),
    /// sqrt(2) / (c * sqrt(m)).
    SqrtRatio { c: Rational, m: u64 },
    /// sqrt(2) / (c * sqrt(m)) + extra.
    SqrtRatioPlus { c: Rational, m: u64, extra: Rational },
}

impl BoundValue {
    /// Decide `lhs <= bound` exactly (lhs must be nonnegative).
    pub fn dominates(&self, lhs: &Rational) -> bool {
        assert!(!lhs.is_negative(), "bound comparisons expect lhs >= 0");
        match self {
            BoundValue::Exact(r) => lhs <= r,
            BoundValue::SqrtRatio { c, m } => leq_sqrt_ratio(lhs, c, *m),
            BoundValue::SqrtRatioPlus { c, m, extra } => {
                assert!(!extra.is_negative());
                if lhs <= extra {
                    true
                } else {
                    leq_sqrt_ratio(&(lhs - extra), c, *m)
                }
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            BoundValue::Exact(_) => "exact",
            BoundValue::SqrtRatio { .. } => "sqrt-ratio",
            BoundValue::SqrtRatioPlus { .. } => "sqrt-ratio-plus",
        }
    }

    /// Parameter rendering for CSV cells, e.g. `value=3/100` or
    /// `c=1/12;m=576`.
    pub fn params(&self) -> String {
        match self {
            BoundValue::Exact(r) => format!("value={r}"),
            BoundValue::SqrtRatio { c, m } => format!("c={c};m={m}"),
            BoundValue::SqrtRatioPlus { c, m, extra } => format!("c={c};m={m};extra={extra}"),
        }
    }
}

/// Outcome of checking one inequality instance: exact left side, an
/// exactly comparable right side, and the verdict.
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub n: u64,
    pub lhs: Rational,
    pub bound: BoundValue,
    pub holds: bool,
    pub context: &'static str,
}

impl BoundReport {
    pub fn check(n: u64, lhs: Rational, bound: BoundValue, context: &'static str) -> Self {
        let holds = bound.dominates(&lhs);
        Self { n, lhs, bound, holds, context }
    }

    pub fn csv_header() -> [&'static str; 7] {
        ["n", "lhs_num", "lhs_den", "lhs_decimal", "bound_kind", "bound_params", "holds"]
    }

    pub fn csv_record(&self, precision: usize) -> [String; 7] {
        [
            self.n.to_string(),
            self.lhs.numer().to_string(),
            self.lhs.denom().to_string(),
            decimal_string(&self.lhs, precision),
            self.bound.kind().to_string(),
            self.bound.params(),
            self.holds.to_string(),
        ]
    }
}

/// The proof hypotheses only cover eps in (0, 1/12]; larger values are
/// refused rather than extrapolated.
pub fn validate_epsilon(eps: &Rational) -> Result<(), Error> {
    if eps.is_positive() && *eps <= rat(1, 12) {
        Ok(())
    } else {
        Err(Error::EpsilonOutOfRange(eps.to_string()))
    }
}
