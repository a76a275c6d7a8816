//! Analytic control of driven N-level quantum systems.
//!
//! Two families of spectra admit an exact pulse protocol: one with a single
//! distinct first gap and all later gaps equal (each cycle couples the ground
//! level to one excited level) and one with all gaps pairwise distinct (each
//! cycle couples adjacent levels). For both, N-1 resonant rectangular cosine
//! pulses interleaved with field-free dwells drive the ground state to any
//! target state, and the pulse and dwell durations follow from the target's
//! moduli and phases in closed form.
//!
//! The crate provides:
//! - [`spectrum`]: level validation, gap classification, transition tables;
//! - [`propagator`]: rotating-wave cycle unitaries, schedule propagation,
//!   and the closed-form amplitude evaluator;
//! - [`synthesis`]: the inverse solve from a target state to a schedule;
//! - [`verifier`]: exact lab-frame integration quantifying the
//!   rotating-wave error;
//! - [`controllability`]: Lie-algebra closure and the su(N) decision;
//! - [`testkit`]: seeded random targets and independent dense oracles.

pub mod controllability;
pub mod error;
pub mod propagator;
pub mod spectrum;
pub mod synthesis;
pub mod testkit;
pub mod verifier;

pub use controllability::{
    build_generators, build_restricted_generators, check_controllability, lie_closure_dimension,
    ClosureReport, GeneratorSet, RANK_TOLERANCE,
};
pub use error::{Error, Result};
pub use propagator::{
    closed_form_amplitudes, closed_form_from_angles, cycle_unitary, free_evolution, run_schedule,
    AmplitudeTrace, CycleControl, PulseSchedule, QuantumState, NORM_TOLERANCE,
};
pub use spectrum::{
    classify_gaps, transition_table, validate_spectrum, EnergySpectrum, GapClassification, GapKind,
    Protocol, TransitionTable, GAP_TOLERANCE,
};
pub use synthesis::{
    amplitude_decompose, fidelity, solve_dwell_times, solve_pulse_angles, synthesize,
    synthesize_with_decomposition, SynthesisConfig, SynthesisDecomposition,
};
pub use testkit::{
    dense_schedule_oracle, dense_schedule_oracle_from, matrix_exponential_oracle, random_target,
};
pub use verifier::{
    integrate_full, rwa_report, CycleFidelity, FieldClock, IntegratorConfig, RwaReport,
};
