use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate support point: {0}")]
    DuplicatePoint(String),

    #[error("level {n} exceeds the enumeration cap {cap}")]
    EnumerationCap { n: u64, cap: u32 },

    #[error("epsilon must lie in (0, 1/12], got {0}")]
    EpsilonOutOfRange(String),

    #[error("{what} = {size} out of range (max {max})")]
    SizeOutOfRange {
        what: &'static str,
        size: String,
        max: String,
    },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("exhaustive search limited to n <= {max}, got n = {n}")]
    OracleLimit { n: u64, max: u64 },

    #[error("push-forward collision: two support points map to {0}")]
    PushforwardCollision(String),

    #[error("not a rational (write p/q with q > 0; decimals are not accepted): {0}")]
    ParseRational(String),

    #[error("not a sign vector (expected a nonempty string over +/-): {0}")]
    ParseSignVector(String),

    #[error("not a sigma point (expected i@n with i < n): {0}")]
    ParseSigmaPoint(String),

    #[error("invalid rectangle spec: {0}")]
    InvalidSpec(String),

    #[error("unknown test function {0} (expected one of {1})")]
    UnknownFunction(String, &'static str),

    #[error("unknown model space {0} (expected one of {1})")]
    UnknownModel(String, &'static str),

    #[error("internal integrity failure: {0}")]
    Integrity(String),
}
