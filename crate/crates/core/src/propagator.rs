//! Analytic forward dynamics under the rotating-wave approximation.
//!
//! Each control cycle applies a resonant rectangular pulse followed by a
//! field-free dwell. In the interaction picture (with the clock restarted at
//! every cycle start) the pulse acts as a two-level rotation by the pulse
//! angle θ_m = Ω'_m τ_m on the cycle's coupled pair, so the Schrödinger-picture
//! map of cycle m is U_0(τ'_m) · U_0(τ_m) · V_m(θ_m). [`run_schedule`] applies
//! that map as O(N) block updates, and [`closed_form_amplitudes`] evaluates the
//! resulting ground-state amplitudes directly as products of sines, cosines,
//! and accumulated phases.

use num_complex::Complex64 as C64;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::spectrum::{coupled_pair, transition_table, EnergySpectrum, Protocol, TransitionTable};

/// Tolerance on |Σ|a_k|² - 1| for a state to count as normalized.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Relative tolerance when matching schedule frequencies against the table.
const FREQUENCY_TOLERANCE: f64 = 1e-9;

const I: C64 = C64::new(0.0, 1.0);

fn phase(angle: f64) -> C64 {
    C64::from_polar(1.0, angle)
}

/// Normalized complex amplitude vector over the energy eigenbasis.
///
/// Basis states are indexed 0-based internally; level n of the physical
/// system is amplitude index n-1.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: Vec<C64>,
}

impl QuantumState {
    /// Wrap an amplitude vector, requiring normalization within
    /// [`NORM_TOLERANCE`].
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::UnnormalizedInput { norm_sqr });
        }
        Ok(Self { amplitudes })
    }

    /// Wrap an amplitude vector, rescaling it to unit norm first.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm_sqr <= 0.0 || !norm_sqr.is_finite() {
            return Err(Error::UnnormalizedInput { norm_sqr });
        }
        let scale = norm_sqr.sqrt().recip();
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|a| a * scale).collect(),
        })
    }

    /// The ground state |1⟩ of a `dim`-level system.
    pub fn ground(dim: usize) -> Self {
        assert!(dim >= 1, "state dimension must be at least 1");
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[0] = C64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// Amplitude of the 0-based basis index `k`.
    pub fn amplitude(&self, k: usize) -> C64 {
        self.amplitudes[k]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Inner product ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Largest componentwise distance to `other`.
    pub fn max_distance(&self, other: &Self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Control record of one cycle: pulse parameters and dwell duration.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleControl {
    /// 1-based cycle number m.
    pub index: usize,
    /// Rabi rate Ω_m (energy units).
    pub rabi: f64,
    /// Ω'_m = Ω_m / 2ħ (angular frequency), the effective rotation rate.
    pub half_rabi: f64,
    /// Resonant drive frequency ν_m.
    pub drive_frequency: f64,
    /// Pulse duration τ_m.
    pub tau: f64,
    /// Dwell duration τ'_m.
    pub tau_prime: f64,
}

impl CycleControl {
    pub fn new(
        index: usize,
        rabi: f64,
        drive_frequency: f64,
        tau: f64,
        tau_prime: f64,
        hbar: f64,
    ) -> Result<Self> {
        if !rabi.is_finite() || rabi < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "cycle {index}: rabi rate must be non-negative, got {rabi}"
            )));
        }
        if !hbar.is_finite() || hbar <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "cycle {index}: hbar must be positive, got {hbar}"
            )));
        }
        for value in [tau, tau_prime] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::NegativeDuration { value });
            }
        }
        Ok(Self {
            index,
            rabi,
            half_rabi: rabi / (2.0 * hbar),
            drive_frequency,
            tau,
            tau_prime,
        })
    }

    /// Pulse angle θ_m = Ω'_m τ_m.
    pub fn pulse_angle(&self) -> f64 {
        self.half_rabi * self.tau
    }

    /// Total cycle time T_m = τ_m + τ'_m.
    pub fn total(&self) -> f64 {
        self.tau + self.tau_prime
    }
}

/// Ordered list of the N-1 cycle controls of one protocol run.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    protocol: Protocol,
    cycles: Vec<CycleControl>,
}

impl PulseSchedule {
    /// Build a schedule, requiring cycle indices 1..=M in order.
    pub fn new(protocol: Protocol, cycles: Vec<CycleControl>) -> Result<Self> {
        for (pos, cycle) in cycles.iter().enumerate() {
            if cycle.index != pos + 1 {
                return Err(Error::ScheduleMismatch(format!(
                    "cycle at position {} has index {}, expected {}",
                    pos,
                    cycle.index,
                    pos + 1
                )));
            }
        }
        Ok(Self { protocol, cycles })
    }

    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    pub fn cycles(&self) -> &[CycleControl] {
        &self.cycles
    }

    pub fn cycle_count(&self) -> usize {
        self.cycles.len()
    }

    /// Cycle boundaries t_m = Σ_{k≤m} (τ_k + τ'_k).
    pub fn cycle_boundaries(&self) -> Vec<f64> {
        self.cycles
            .iter()
            .scan(0.0, |acc, c| {
                *acc += c.total();
                Some(*acc)
            })
            .collect()
    }

    pub fn total_duration(&self) -> f64 {
        self.cycles.iter().map(CycleControl::total).sum()
    }

    /// Pulse angles θ_m of all cycles.
    pub fn pulse_angles(&self) -> Vec<f64> {
        self.cycles.iter().map(CycleControl::pulse_angle).collect()
    }

    /// Total cycle times T_m of all cycles.
    pub fn cycle_times(&self) -> Vec<f64> {
        self.cycles.iter().map(CycleControl::total).collect()
    }
}

/// Schrödinger-picture snapshots taken after each cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrace {
    states: Vec<QuantumState>,
}

impl AmplitudeTrace {
    pub fn states(&self) -> &[QuantumState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Snapshot after cycle `m` (1-based).
    pub fn after_cycle(&self, m: usize) -> &QuantumState {
        &self.states[m - 1]
    }
}

/// Interaction-picture unitary of cycle `m` at pulse angle θ, as a dense
/// matrix: identity except for a two-level rotation block
/// [[cos θ, -i sin θ], [-i sin θ, cos θ]] on the coupled pair.
pub fn cycle_unitary(protocol: Protocol, dim: usize, m: usize, angle: f64) -> Result<Array2<C64>> {
    if dim < 2 || m < 1 || m > dim - 1 {
        return Err(Error::IndexOutOfRange {
            index: m,
            limit: dim.saturating_sub(1),
        });
    }
    let (a, b) = coupled_pair(protocol, m);
    let (sin, cos) = angle.sin_cos();
    let mut u = Array2::<C64>::zeros((dim, dim));
    for k in 0..dim {
        u[[k, k]] = C64::new(1.0, 0.0);
    }
    u[[a, a]] = C64::new(cos, 0.0);
    u[[b, b]] = C64::new(cos, 0.0);
    u[[a, b]] = -I * sin;
    u[[b, a]] = -I * sin;
    Ok(u)
}

/// Free evolution under H_0: a_k ← e^{-i E_k t/ħ} a_k.
pub fn free_evolution(
    state: &QuantumState,
    spectrum: &EnergySpectrum,
    duration: f64,
) -> Result<QuantumState> {
    if !duration.is_finite() || duration < 0.0 {
        return Err(Error::NegativeDuration { value: duration });
    }
    if state.dim() != spectrum.dim() {
        return Err(Error::DimensionMismatch {
            expected: spectrum.dim(),
            got: state.dim(),
        });
    }
    let hbar = spectrum.hbar();
    let amplitudes = state
        .amplitudes()
        .iter()
        .zip(spectrum.levels())
        .map(|(a, e)| a * phase(-e * duration / hbar))
        .collect();
    QuantumState::new(amplitudes)
}

/// Check a schedule against the spectrum's transition table and return the
/// table. Cycle count and drive frequencies must match.
pub(crate) fn validate_schedule(
    spectrum: &EnergySpectrum,
    schedule: &PulseSchedule,
) -> Result<TransitionTable> {
    let table = transition_table(spectrum, schedule.protocol()).map_err(|e| match e {
        Error::IncompatibleProtocol { kind, protocol } => Error::ScheduleMismatch(format!(
            "spectrum classified {kind:?} does not support schedule protocol {protocol:?}"
        )),
        other => other,
    })?;
    if schedule.cycle_count() != spectrum.dim() - 1 {
        return Err(Error::ScheduleMismatch(format!(
            "schedule has {} cycles, spectrum needs {}",
            schedule.cycle_count(),
            spectrum.dim() - 1
        )));
    }
    for (cycle, &nu) in schedule.cycles().iter().zip(&table.frequencies) {
        if (cycle.drive_frequency - nu).abs() > FREQUENCY_TOLERANCE * nu.abs() {
            return Err(Error::ScheduleMismatch(format!(
                "cycle {} drives at {} but the transition frequency is {}",
                cycle.index, cycle.drive_frequency, nu
            )));
        }
    }
    Ok(table)
}

/// Propagate `initial` through the schedule, one cycle at a time, returning
/// the final state and the per-cycle trace.
pub fn run_schedule(
    spectrum: &EnergySpectrum,
    schedule: &PulseSchedule,
    initial: &QuantumState,
) -> Result<(QuantumState, AmplitudeTrace)> {
    validate_schedule(spectrum, schedule)?;
    if initial.dim() != spectrum.dim() {
        return Err(Error::DimensionMismatch {
            expected: spectrum.dim(),
            got: initial.dim(),
        });
    }
    let hbar = spectrum.hbar();
    let mut amplitudes = initial.amplitudes().to_vec();
    let mut states = Vec::with_capacity(schedule.cycle_count());
    for cycle in schedule.cycles() {
        let (a, b) = coupled_pair(schedule.protocol(), cycle.index);
        let (sin, cos) = cycle.pulse_angle().sin_cos();
        let (xa, xb) = (amplitudes[a], amplitudes[b]);
        amplitudes[a] = cos * xa - I * sin * xb;
        amplitudes[b] = cos * xb - I * sin * xa;
        let total = cycle.total();
        for (amp, &energy) in amplitudes.iter_mut().zip(spectrum.levels()) {
            *amp *= phase(-energy * total / hbar);
        }
        states.push(QuantumState::new(amplitudes.clone())?);
    }
    let final_state = QuantumState::new(amplitudes)?;
    Ok((final_state, AmplitudeTrace { states }))
}

/// Closed-form final amplitudes for a ground-state start, evaluated directly
/// from the schedule's pulse angles and cycle times.
///
/// Agrees with `run_schedule(spectrum, schedule, |1⟩)` componentwise.
pub fn closed_form_amplitudes(
    spectrum: &EnergySpectrum,
    schedule: &PulseSchedule,
) -> Result<QuantumState> {
    validate_schedule(spectrum, schedule)?;
    closed_form_from_angles(
        spectrum,
        schedule.protocol(),
        &schedule.pulse_angles(),
        &schedule.cycle_times(),
    )
}

/// Closed-form final amplitudes from explicit pulse angles θ_m and cycle
/// times T_m (ground-state start).
pub fn closed_form_from_angles(
    spectrum: &EnergySpectrum,
    protocol: Protocol,
    angles: &[f64],
    cycle_times: &[f64],
) -> Result<QuantumState> {
    let n = spectrum.dim();
    if angles.len() != n - 1 || cycle_times.len() != n - 1 {
        return Err(Error::ScheduleMismatch(format!(
            "expected {} pulse angles and cycle times, got {} and {}",
            n - 1,
            angles.len(),
            cycle_times.len()
        )));
    }
    let hbar = spectrum.hbar();
    let levels = spectrum.levels();

    // Tail sums R_m = Σ_{i≥m} T_i, 0-based: tail[k] = R_{k+1}, tail[n-1] = 0.
    let mut tail = vec![0.0; n];
    for k in (0..n - 1).rev() {
        tail[k] = tail[k + 1] + cycle_times[k];
    }

    let mut amplitudes = vec![C64::new(0.0, 0.0); n];
    match protocol {
        Protocol::SystemI => {
            // Slot 1: e^{-i E_1 R_1/ħ} Π cos θ_i.
            let cos_all: f64 = angles.iter().map(|t| t.cos()).product();
            amplitudes[0] = phase(-levels[0] * tail[0] / hbar) * cos_all;
            // Slot 2: -i e^{-i E_2 R_1/ħ} sin θ_1.
            amplitudes[1] = -I * phase(-levels[1] * tail[0] / hbar) * angles[0].sin();
            // Slot k ≥ 3: -i e^{-i [E_k R_{k-1} + E_1 (R_1 - R_{k-1})]/ħ}
            //             sin θ_{k-1} Π_{i≤k-2} cos θ_i.
            let mut cos_prefix = 1.0;
            for k in 3..=n {
                cos_prefix *= angles[k - 3].cos();
                let arg =
                    -(levels[k - 1] * tail[k - 2] + levels[0] * (tail[0] - tail[k - 2])) / hbar;
                amplitudes[k - 1] = -I * phase(arg) * angles[k - 2].sin() * cos_prefix;
            }
        }
        Protocol::SystemII => {
            // Prefix sums Σ_{i<m} E_{i+1} T_i and Π_{i<m} sin θ_i.
            amplitudes[0] = phase(-levels[0] * tail[0] / hbar) * angles[0].cos();
            let mut energy_sum = 0.0;
            let mut sin_prefix = 1.0;
            for m in 2..=n - 1 {
                energy_sum += levels[m - 1] * cycle_times[m - 2];
                sin_prefix *= angles[m - 2].sin();
                let arg = -(levels[m - 1] * tail[m - 1] + energy_sum) / hbar
                    - std::f64::consts::FRAC_PI_2 * (m - 1) as f64;
                amplitudes[m - 1] = phase(arg) * angles[m - 1].cos() * sin_prefix;
            }
            energy_sum += levels[n - 1] * cycle_times[n - 2];
            sin_prefix *= angles[n - 2].sin();
            let arg = -energy_sum / hbar - std::f64::consts::FRAC_PI_2 * (n - 1) as f64;
            amplitudes[n - 1] = phase(arg) * sin_prefix;
        }
    }
    QuantumState::new(amplitudes)
}
