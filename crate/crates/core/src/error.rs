use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vectors and operators must have dimension at least 1")]
    EmptyDimension,

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("operator is not positive: entry ({row}, {col}) = {value} < 0")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("weights must be strictly positive (index {0})")]
    InvalidWeight(usize),

    #[error("invalid norm exponent p = {0} (need 1 ≤ p < ∞)")]
    InvalidExponent(f64),

    #[error("norm family {0} cannot be evaluated exactly; use a floating-point scalar")]
    InexactNorm(String),

    #[error("dimension too large for exact norm: n = {n} exceeds n_max = {max}")]
    DimensionTooLarge { n: usize, max: usize },

    #[error("epsilon must lie in (0, 1), got {0}")]
    EpsilonOutOfRange(f64),

    #[error("modulus too weak: no admissible eta > 1e-12 for epsilon = {epsilon}")]
    ModulusTooWeak { epsilon: f64 },

    #[error("modulus has form {found}, expected {expected}")]
    WrongForm {
        expected: &'static str,
        found: &'static str,
    },

    #[error("norm family {0} has no modulus of uniform monotonicity")]
    NoModulus(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("point not near-attaining for this budget: deficit {deficit:e} ≥ allowed {allowed:e}")]
    NotNearAttaining { deficit: f64, allowed: f64 },

    #[error("point must lie on the unit sphere of the sup norm, got ‖x₀‖ = {0}")]
    NotUnitPoint(f64),

    #[error("check `{check}` failed: {lhs:e} vs {rhs:e}")]
    LedgerViolation { check: String, lhs: f64, rhs: f64 },

    #[error("degenerate construction: {0}")]
    Degenerate(&'static str),
}
