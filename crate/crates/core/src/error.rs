//! Crate-wide error type.

use thiserror::Error;

/// Alias for `std::result::Result` with the crate error type.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The local dimension must be an odd integer >= 3 and the number of
    /// qudits must be >= 1.
    #[error("invalid modulus: d = {d} must be odd and >= 3, n = {n} must be >= 1")]
    InvalidModulus { d: u64, n: usize },

    /// Tuple or table length does not match the expected dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Two values built over different moduli were combined.
    #[error("modulus mismatch: (d={d1}, n={n1}) vs (d={d2}, n={n2})")]
    ModulusMismatch { d1: u64, n1: usize, d2: u64, n2: usize },

    /// A context requires pairwise commuting operators.
    #[error("generators at positions {i} and {j} do not commute (symplectic product {product})")]
    NotIsotropic { i: usize, j: usize, product: u64 },

    /// The requested outcome tuple does not extend to a well-defined linear
    /// form on the generated submodule.
    #[error("inconsistent outcome: element {element:?} receives values {first} and {second}")]
    InconsistentOutcome {
        element: Vec<u64>,
        first: u64,
        second: u64,
    },

    /// A matrix is not a valid density operator.
    #[error("state validation failed: {reason}")]
    StateValidation { reason: String },

    /// A matrix is not a valid POVM element.
    #[error("effect validation failed: {reason}")]
    EffectValidation { reason: String },

    /// Dense materialization of a `d^n`-dimensional operator was refused.
    #[error("capacity exceeded: dense dimension {required} is above the cap {cap}")]
    CapacityExceeded { required: usize, cap: usize },

    /// A postprocessing map or implementation failed validation.
    #[error("invalid implementation: {reason}")]
    ImplementationInvalid { reason: String },

    /// A value-assignment model failed validation.
    #[error("invalid model: {reason}")]
    ModelInvalid { reason: String },

    /// A map over phase space is not a value assignment; the pair witnesses
    /// the broken additivity constraint.
    #[error("not a value assignment: additivity fails on the commuting pair {u:?}, {v:?}")]
    AssignmentViolation { u: Vec<u64>, v: Vec<u64> },

    /// The Wigner function has a strictly negative value, so no
    /// non-contextual model exists; the point is the contextuality witness.
    #[error("negative Wigner value {value} at phase point {point:?}: no non-contextual model exists")]
    Negativity { point: Vec<u64>, value: f64 },

    /// Failure to parse a serialized object.
    #[error("parse error: {reason}")]
    Parse { reason: String },
}
