//! Crate-wide error type.

use thiserror::Error;

use crate::spectrum::{GapKind, Protocol};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A spectrum needs at least two levels.
    #[error("spectrum needs at least 2 levels, got {count}")]
    TooFewLevels { count: usize },

    /// Levels must be strictly increasing.
    #[error("levels must be strictly increasing: violation at index {index}")]
    NonIncreasingLevels { index: usize },

    /// The gap structure does not support the requested drive protocol.
    #[error("gap classification {kind:?} does not support protocol {protocol:?}")]
    IncompatibleProtocol { kind: GapKind, protocol: Protocol },

    /// A level or cycle index fell outside the valid range.
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    /// Free evolution and pulse durations cannot be negative.
    #[error("duration must be non-negative, got {value}")]
    NegativeDuration { value: f64 },

    /// A schedule is inconsistent with the spectrum's transition table.
    #[error("schedule mismatch: {0}")]
    ScheduleMismatch(String),

    /// A state vector failed the normalization check.
    #[error("state is not normalized: |amplitudes|^2 sums to {norm_sqr}")]
    UnnormalizedInput { norm_sqr: f64 },

    /// Two states or documents have inconsistent dimensions.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The requested moduli cannot be produced by any pulse-angle chain.
    #[error("infeasible moduli: {0}")]
    InfeasibleModuli(String),

    /// Every amplitude of the target is below the zero threshold.
    #[error("no reference slot: all target amplitudes are below the zero threshold")]
    NoReferenceSlot,

    /// The integrator was configured with too few steps per drive period.
    #[error("steps_per_drive_period must be at least 20, got {steps}")]
    StepTooLarge { steps: u32 },

    /// The integrator's norm drift exceeded the configured tolerance.
    #[error("norm drift {drift:.3e} exceeds tolerance {tolerance:.3e}")]
    NormDriftExceeded { drift: f64, tolerance: f64 },

    /// The matrix exponential oracle requires a Hermitian input.
    #[error("matrix is not Hermitian: max deviation {deviation:.3e}")]
    NonHermitianInput { deviation: f64 },

    /// The Lie-closure loop exceeded its commutator-evaluation budget.
    #[error("closure exceeded its budget of {budget} commutator evaluations")]
    ClosureBudgetExceeded { budget: usize },

    /// A synthesized schedule failed its own forward verification.
    #[error("synthesis verification failed: round-trip fidelity {fidelity}")]
    SynthesisVerification { fidelity: f64 },

    /// A configuration value was rejected.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
