//! Independent oracles: seeded random targets, a series matrix exponential,
//! and a dense re-implementation of the schedule propagator.
//!
//! These ship with the library (not only in test code) so the CLI can
//! cross-check the analytic propagator on demand.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::propagator::{validate_schedule, PulseSchedule, QuantumState};
use crate::spectrum::{coupled_pair, EnergySpectrum};

/// Scaled matrices are pushed below this 1-norm before the series is summed.
const SCALING_THRESHOLD: f64 = 0.5;
/// The series stops once a term falls below this entrywise magnitude.
const SERIES_TOLERANCE: f64 = 1e-16;

/// Draw a normalized state with standard complex normal components.
///
/// Deterministic per seed: the same `(dim, seed)` always yields the same
/// state.
pub fn random_target(dim: usize, seed: u64) -> QuantumState {
    assert!(dim >= 2, "random targets need at least 2 levels");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amplitudes: Vec<C64> = (0..dim)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(re, im)
        })
        .collect();
    QuantumState::normalized(amplitudes).expect("normal samples have nonzero norm almost surely")
}

fn max_abs(m: &Array2<C64>) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn one_norm(m: &Array2<C64>) -> f64 {
    let (rows, cols) = m.dim();
    (0..cols)
        .map(|j| (0..rows).map(|i| m[[i, j]].norm()).sum())
        .fold(0.0, f64::max)
}

fn identity(dim: usize) -> Array2<C64> {
    let mut eye = Array2::<C64>::zeros((dim, dim));
    for k in 0..dim {
        eye[[k, k]] = C64::new(1.0, 0.0);
    }
    eye
}

/// Compute e^{-i H t/ħ} for Hermitian `h` by a scaled-and-squared Taylor
/// series.
pub fn matrix_exponential_oracle(h: &Array2<C64>, t: f64, hbar: f64) -> Result<Array2<C64>> {
    let (rows, cols) = h.dim();
    if rows != cols {
        return Err(Error::DimensionMismatch {
            expected: rows,
            got: cols,
        });
    }
    if !hbar.is_finite() || hbar <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "hbar must be positive, got {hbar}"
        )));
    }
    let scale = 1.0 + max_abs(h);
    let deviation = (0..rows)
        .flat_map(|i| (0..cols).map(move |j| (i, j)))
        .map(|(i, j)| (h[[i, j]] - h[[j, i]].conj()).norm())
        .fold(0.0, f64::max);
    if deviation > 1e-12 * scale {
        return Err(Error::NonHermitianInput { deviation });
    }
    let generator = h.mapv(|x| x * C64::new(0.0, -t / hbar));
    Ok(expm_series(&generator))
}

/// Plain series exponential with scaling and squaring; input is the full
/// generator (exponent), not a Hamiltonian.
fn expm_series(a: &Array2<C64>) -> Array2<C64> {
    let dim = a.dim().0;
    let norm = one_norm(a);
    let squarings = if norm > SCALING_THRESHOLD {
        (norm / SCALING_THRESHOLD).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.mapv(|x| x / 2f64.powi(squarings as i32));

    let mut sum = identity(dim);
    let mut term = identity(dim);
    for k in 1..=64 {
        term = term.dot(&scaled).mapv(|x| x / k as f64);
        sum += &term;
        if max_abs(&term) < SERIES_TOLERANCE {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.dot(&sum);
    }
    sum
}

/// Re-run a schedule from the ground state with dense matrix products,
/// using the series exponential for every pulse and dwell window.
pub fn dense_schedule_oracle(
    spectrum: &EnergySpectrum,
    schedule: &PulseSchedule,
) -> Result<QuantumState> {
    dense_schedule_oracle_from(spectrum, schedule, &QuantumState::ground(spectrum.dim()))
}

/// Same as [`dense_schedule_oracle`] but from an arbitrary initial state.
pub fn dense_schedule_oracle_from(
    spectrum: &EnergySpectrum,
    schedule: &PulseSchedule,
    initial: &QuantumState,
) -> Result<QuantumState> {
    validate_schedule(spectrum, schedule)?;
    if initial.dim() != spectrum.dim() {
        return Err(Error::DimensionMismatch {
            expected: spectrum.dim(),
            got: initial.dim(),
        });
    }
    let n = spectrum.dim();
    let hbar = spectrum.hbar();
    let mut h0 = Array2::<C64>::zeros((n, n));
    for (k, &e) in spectrum.levels().iter().enumerate() {
        h0[[k, k]] = C64::new(e, 0.0);
    }
    let mut psi = Array1::from_vec(initial.amplitudes().to_vec());
    for cycle in schedule.cycles() {
        let (a, b) = coupled_pair(schedule.protocol(), cycle.index);
        let mut interaction = Array2::<C64>::zeros((n, n));
        interaction[[a, b]] = C64::new(cycle.rabi / 2.0, 0.0);
        interaction[[b, a]] = C64::new(cycle.rabi / 2.0, 0.0);
        let pulse = matrix_exponential_oracle(&interaction, cycle.tau, hbar)?;
        let free = matrix_exponential_oracle(&h0, cycle.total(), hbar)?;
        psi = free.dot(&pulse.dot(&psi));
    }
    QuantumState::new(psi.to_vec())
}
