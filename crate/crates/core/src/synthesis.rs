//! The inverse problem: from a normalized target state to a pulse schedule.
//!
//! Moduli are matched first: the target's |a_n| form a point on the unit
//! sphere, and the cycle pulse angles θ_m are the hyperspherical angles of
//! that point for the protocol's sine/cosine chain, so each θ_m is read off
//! one modulus at a time with θ_m ∈ [0, π/2]. Phases are matched second:
//! every target phase constrains the tail sums R_m = Σ_{i≥m} T_i of the
//! total cycle times through a linear congruence mod 2π, and representatives
//! are chosen from the last cycle downward, bumping by each congruence's own
//! period until T_m ≥ τ_m so that every dwell time comes out non-negative.
//! Slots whose modulus is below the zero threshold carry no phase
//! information and take the minimal feasible tail sum.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{Error, Result};
use crate::propagator::{
    closed_form_from_angles, run_schedule, CycleControl, PulseSchedule, QuantumState,
};
use crate::spectrum::{transition_table, EnergySpectrum, Protocol};

/// Amplitudes below this threshold count as zero (masked) by default.
pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-10;
/// Default tolerance for the phase-equation verification of a synthesis.
pub const DEFAULT_PHASE_TOLERANCE: f64 = 1e-8;
/// A synthesized schedule must reach this round-trip fidelity.
pub const FIDELITY_FLOOR: f64 = 1.0 - 1e-9;

/// How far Σ C_n² may deviate from 1.
const MODULI_NORM_TOLERANCE: f64 = 1e-10;
/// How far a chain ratio may exceed 1 before the moduli are infeasible.
const RATIO_TOLERANCE: f64 = 1e-6;
/// Allowed defect on the leftover slot of the chain, in squared moduli.
/// (Near-zero leftovers amplify float noise under a square root, so the
/// check lives in the probability domain where errors stay linear.)
const LEFTOVER_TOLERANCE: f64 = 1e-9;

/// Per-cycle Rabi rates and solver thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisConfig {
    rabi: Vec<f64>,
    pub zero_threshold: f64,
    pub phase_tolerance: f64,
}

impl SynthesisConfig {
    /// One Rabi rate broadcast over all `cycles` cycles.
    pub fn uniform(rabi: f64, cycles: usize) -> Result<Self> {
        Self::per_cycle(vec![rabi; cycles])
    }

    pub fn per_cycle(rabi: Vec<f64>) -> Result<Self> {
        if rabi.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one Rabi rate is required".into(),
            ));
        }
        if let Some(&bad) = rabi.iter().find(|r| !r.is_finite() || **r <= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "Rabi rates must be positive, got {bad}"
            )));
        }
        Ok(Self {
            rabi,
            zero_threshold: DEFAULT_ZERO_THRESHOLD,
            phase_tolerance: DEFAULT_PHASE_TOLERANCE,
        })
    }

    pub fn rabi(&self) -> &[f64] {
        &self.rabi
    }
}

/// A target split into moduli, phases, solved pulse angles, and cycle times.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisDecomposition {
    /// Non-negative moduli C_n, one per level.
    pub moduli: Vec<f64>,
    /// Phases β_n in [0, 2π); entries under the zero mask are meaningless.
    pub phases: Vec<f64>,
    /// True where the modulus is below the zero threshold.
    pub zero_mask: Vec<bool>,
    /// Pulse angles θ_m in [0, π/2], one per cycle.
    pub pulse_angles: Vec<f64>,
    /// Total cycle times T_m = τ_m + τ'_m.
    pub cycle_times: Vec<f64>,
    /// Global phase α: the synthesized state is e^{iα} times the target.
    pub global_phase: f64,
}

/// Wrap an angle into [0, 2π).
fn wrap(angle: f64) -> f64 {
    let wrapped = angle.rem_euclid(TAU);
    if wrapped >= TAU {
        0.0
    } else {
        wrapped
    }
}

/// Signed distance between two angles, in (-π, π].
fn angle_distance(a: f64, b: f64) -> f64 {
    let delta = (a - b).rem_euclid(TAU);
    if delta > PI {
        delta - TAU
    } else {
        delta
    }
}

/// Split a normalized target into moduli C_n = |a_n| and phases
/// β_n = arg(a_n) ∈ [0, 2π), masking slots with C_n ≤ `zero_threshold`.
pub fn amplitude_decompose(
    target: &QuantumState,
    zero_threshold: f64,
) -> (Vec<f64>, Vec<f64>, Vec<bool>) {
    let mut moduli = Vec::with_capacity(target.dim());
    let mut phases = Vec::with_capacity(target.dim());
    let mut zero_mask = Vec::with_capacity(target.dim());
    for amp in target.amplitudes() {
        let modulus = amp.norm();
        let masked = modulus <= zero_threshold;
        moduli.push(modulus);
        phases.push(if masked { 0.0 } else { wrap(amp.arg()) });
        zero_mask.push(masked);
    }
    (moduli, phases, zero_mask)
}

/// Solve the pulse angles θ_m ∈ [0, π/2] from the moduli chain.
///
/// System I consumes C_2..C_N through arcsines against a running cosine
/// product and leaves C_1 as the consistency check; system II consumes
/// C_1..C_{N-1} through arccosines against a running sine product and leaves
/// C_N. A vanishing denominator forces the corresponding modulus to vanish
/// too (the angle is then 0), and any ratio above 1 beyond tolerance means
/// the moduli are not normalized consistently.
pub fn solve_pulse_angles(
    moduli: &[f64],
    protocol: Protocol,
    zero_threshold: f64,
) -> Result<Vec<f64>> {
    let n = moduli.len();
    if n < 2 {
        return Err(Error::TooFewLevels { count: n });
    }
    if let Some(&bad) = moduli.iter().find(|c| !c.is_finite() || **c < 0.0) {
        return Err(Error::InfeasibleModuli(format!(
            "moduli must be non-negative, got {bad}"
        )));
    }
    let norm_sqr: f64 = moduli.iter().map(|c| c * c).sum();
    if (norm_sqr - 1.0).abs() > MODULI_NORM_TOLERANCE {
        return Err(Error::UnnormalizedInput { norm_sqr });
    }

    let mut angles = Vec::with_capacity(n - 1);
    let mut denominator = 1.0;
    // Moduli consumed in chain order; the leftover slot is checked at the end.
    let (consumed, leftover): (Vec<f64>, f64) = match protocol {
        Protocol::SystemI => (moduli[1..].to_vec(), moduli[0]),
        Protocol::SystemII => (moduli[..n - 1].to_vec(), moduli[n - 1]),
    };
    for (k, &numerator) in consumed.iter().enumerate() {
        if denominator <= zero_threshold {
            if numerator > zero_threshold {
                return Err(Error::InfeasibleModuli(format!(
                    "chain slot {k}: modulus {numerator} requires weight but none remains"
                )));
            }
            angles.push(0.0);
            continue;
        }
        let ratio = numerator / denominator;
        if ratio > 1.0 + RATIO_TOLERANCE {
            return Err(Error::InfeasibleModuli(format!(
                "chain slot {k}: ratio {ratio} exceeds 1"
            )));
        }
        let ratio = ratio.clamp(0.0, 1.0);
        let angle = match protocol {
            Protocol::SystemI => ratio.asin(),
            Protocol::SystemII => ratio.acos(),
        };
        angles.push(angle);
        denominator *= match protocol {
            Protocol::SystemI => angle.cos(),
            Protocol::SystemII => angle.sin(),
        };
    }
    // After the loop `denominator` is the full product, i.e. the value the
    // chain assigns to the leftover slot.
    if (denominator * denominator - leftover * leftover).abs() > LEFTOVER_TOLERANCE {
        return Err(Error::InfeasibleModuli(format!(
            "leftover slot reconstructs to {denominator}, target has {leftover}"
        )));
    }
    Ok(angles)
}

/// Smallest x ≥ `lower` with `omega`·x ≡ `target_phase` (mod 2π).
fn congruence_representative(target_phase: f64, omega: f64, lower: f64) -> f64 {
    let period = TAU / omega;
    let base = wrap(target_phase) / omega;
    let mut k = ((lower - base) / period).ceil();
    if k < 0.0 {
        k = 0.0;
    }
    let mut x = base + k * period;
    if x < lower {
        x += period;
    }
    x
}

/// Solve the total cycle times T_m and the global phase α from the target
/// phases.
///
/// Returns `(cycle_times, alpha)`. The phase-matching conditions reduce to
/// one congruence per unmasked slot on a single tail sum R_m (system I) or
/// on consecutive differences of tail sums (system II); both are solved from
/// the last cycle downward so every representative can respect
/// R_m ≥ R_{m+1} + τ_m, which makes all dwell times non-negative.
pub fn solve_dwell_times(
    phases: &[f64],
    zero_mask: &[bool],
    pulse_angles: &[f64],
    spectrum: &EnergySpectrum,
    protocol: Protocol,
    config: &SynthesisConfig,
) -> Result<(Vec<f64>, f64)> {
    let n = spectrum.dim();
    let cycles = n - 1;
    if phases.len() != n || zero_mask.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: phases.len().min(zero_mask.len()),
        });
    }
    if pulse_angles.len() != cycles || config.rabi().len() != cycles {
        return Err(Error::DimensionMismatch {
            expected: cycles,
            got: pulse_angles.len().min(config.rabi().len()),
        });
    }
    let hbar = spectrum.hbar();
    let levels = spectrum.levels();
    // Pulse durations τ_m = θ_m / Ω'_m.
    let taus: Vec<f64> = pulse_angles
        .iter()
        .zip(config.rabi())
        .map(|(theta, omega)| theta / (omega / (2.0 * hbar)))
        .collect();
    let reference = zero_mask
        .iter()
        .position(|masked| !masked)
        .ok_or(Error::NoReferenceSlot)?;

    // tail[k] holds R_{k+1}; tails are filled from the last cycle downward.
    let mut tail = vec![0.0; cycles];
    let alpha_prime;
    match protocol {
        Protocol::SystemI => {
            // Slot k+1 (k ≥ 1) constrains only R_k:
            //   ω̃_k R_k ≡ -β_{k+1} - α' - π/2 (mod 2π),
            // with α' = α + E_1 R_1/ħ read off the reference slot.
            alpha_prime = if reference == 0 {
                wrap(-phases[0])
            } else {
                wrap(-phases[reference] - FRAC_PI_2)
            };
            let mut next = 0.0;
            for m in (0..cycles).rev() {
                let lower = next + taus[m];
                tail[m] = if zero_mask[m + 1] {
                    lower
                } else {
                    let omega = (levels[m + 1] - levels[0]) / hbar;
                    let target = -phases[m + 1] - alpha_prime - FRAC_PI_2;
                    congruence_representative(target, omega, lower)
                };
                next = tail[m];
            }
        }
        Protocol::SystemII => {
            // With ψ_n = -β_n - π(n-1)/2, slot n requires
            //   Σ_{i<n} ω_i R_i ≡ ψ_n - α' (mod 2π),
            // so between consecutive unmasked slots u < v the difference
            //   Σ_{i=u..v-1} ω_i R_i ≡ ψ_v - ψ_u (mod 2π)
            // pins exactly one tail sum (the lowest, R_u) once the interior
            // ones take their minimal feasible values.
            let omegas: Vec<f64> = (1..n).map(|k| (levels[k] - levels[k - 1]) / hbar).collect();
            let psi = |slot: usize| -phases[slot] - FRAC_PI_2 * slot as f64;
            let unmasked: Vec<usize> = (0..n).filter(|&s| !zero_mask[s]).collect();
            let top = *unmasked.last().expect("reference slot exists");

            let mut next = 0.0;
            // Above the highest unmasked slot: unconstrained, minimal.
            for m in (top..cycles).rev() {
                tail[m] = next + taus[m];
                next = tail[m];
            }
            // Consecutive unmasked pairs, highest first.
            for window in unmasked.windows(2).rev() {
                let (low, high) = (window[0], window[1]);
                let mut accumulated = 0.0;
                for m in (low + 1..high).rev() {
                    tail[m] = next + taus[m];
                    accumulated += omegas[m] * tail[m];
                    next = tail[m];
                }
                let target = psi(high) - psi(low) - accumulated;
                let lower = next + taus[low];
                tail[low] = congruence_representative(target, omegas[low], lower);
                next = tail[low];
            }
            // Below the reference slot: masked by construction, minimal.
            for m in (0..reference).rev() {
                tail[m] = next + taus[m];
                next = tail[m];
            }
            let prefix: f64 = (0..reference).map(|i| omegas[i] * tail[i]).sum();
            alpha_prime = wrap(psi(reference) - prefix);
        }
    }

    let mut cycle_times = Vec::with_capacity(cycles);
    for m in 0..cycles {
        let next = if m + 1 < cycles { tail[m + 1] } else { 0.0 };
        cycle_times.push(tail[m] - next);
    }
    let alpha = wrap(alpha_prime - levels[0] * tail[0] / hbar);
    Ok((cycle_times, alpha))
}

/// Synthesize the pulse schedule that drives |1⟩ to `target`, up to a global
/// phase. The result is forward-verified before being returned.
pub fn synthesize(
    spectrum: &EnergySpectrum,
    protocol: Protocol,
    target: &QuantumState,
    config: &SynthesisConfig,
) -> Result<PulseSchedule> {
    synthesize_with_decomposition(spectrum, protocol, target, config).map(|(s, _)| s)
}

/// Like [`synthesize`], also returning the solved decomposition.
pub fn synthesize_with_decomposition(
    spectrum: &EnergySpectrum,
    protocol: Protocol,
    target: &QuantumState,
    config: &SynthesisConfig,
) -> Result<(PulseSchedule, SynthesisDecomposition)> {
    let table = transition_table(spectrum, protocol)?;
    let n = spectrum.dim();
    if target.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: target.dim(),
        });
    }
    if config.rabi().len() != n - 1 {
        return Err(Error::InvalidConfig(format!(
            "expected {} Rabi rates, got {}",
            n - 1,
            config.rabi().len()
        )));
    }

    let (moduli, phases, zero_mask) = amplitude_decompose(target, config.zero_threshold);
    let pulse_angles = solve_pulse_angles(&moduli, protocol, config.zero_threshold)?;
    let (cycle_times, global_phase) = solve_dwell_times(
        &phases,
        &zero_mask,
        &pulse_angles,
        spectrum,
        protocol,
        config,
    )?;

    let hbar = spectrum.hbar();
    let cycle_controls = (0..n - 1)
        .map(|m| {
            let rabi = config.rabi()[m];
            let tau = pulse_angles[m] / (rabi / (2.0 * hbar));
            let tau_prime = (cycle_times[m] - tau).max(0.0);
            CycleControl::new(m + 1, rabi, table.frequencies[m], tau, tau_prime, hbar)
        })
        .collect::<Result<Vec<_>>>()?;
    let schedule = PulseSchedule::new(protocol, cycle_controls)?;

    // Forward verification: fidelity floor, then the per-slot phase
    // equations on the closed-form amplitudes.
    let (final_state, _) = run_schedule(spectrum, &schedule, &QuantumState::ground(n))?;
    let round_trip = fidelity(&final_state, target)?;
    if round_trip < FIDELITY_FLOOR {
        return Err(Error::SynthesisVerification {
            fidelity: round_trip,
        });
    }
    let closed = closed_form_from_angles(spectrum, protocol, &pulse_angles, &cycle_times)?;
    for (slot, masked) in zero_mask.iter().enumerate() {
        if *masked {
            continue;
        }
        let delta = angle_distance(closed.amplitude(slot).arg(), phases[slot] + global_phase);
        if delta.abs() > config.phase_tolerance {
            return Err(Error::SynthesisVerification {
                fidelity: round_trip,
            });
        }
    }

    let decomposition = SynthesisDecomposition {
        moduli,
        phases,
        zero_mask,
        pulse_angles,
        cycle_times,
        global_phase,
    };
    Ok((schedule, decomposition))
}

/// Global-phase-invariant overlap |⟨a|b⟩|².
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(a.inner(b).norm_sqr().min(1.0))
}
