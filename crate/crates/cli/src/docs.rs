//! JSON interchange documents and file IO.
//!
//! Complex numbers are serialized as `[re, im]` pairs and level/cycle
//! indices are 1-based throughout. Floats rely on serde_json's
//! shortest-round-trip encoding, so documents round-trip bit-for-bit.

use std::path::Path;

use num_complex::Complex64 as C64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use qcontrol::{
    CycleControl, EnergySpectrum, Protocol, PulseSchedule, QuantumState, RwaReport, TransitionTable,
};

use crate::CliError;

/// Input description of the uncontrolled system.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDocument {
    pub levels: Vec<f64>,
    #[serde(default)]
    pub hbar: Option<f64>,
    #[serde(default)]
    pub protocol: Option<ProtocolChoice>,
    #[serde(default)]
    pub rabi: Option<RabiSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolChoice {
    Auto,
    #[serde(rename = "system-i")]
    SystemI,
    #[serde(rename = "system-ii")]
    SystemII,
}

/// One Rabi rate broadcast over all cycles, or one per cycle.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum RabiSpec {
    Scalar(f64),
    PerCycle(Vec<f64>),
}

/// Target or initial state: amplitudes as `[re, im]` pairs.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDocument {
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateDocument {
    pub fn to_complex(&self) -> Vec<C64> {
        self.amplitudes
            .iter()
            .map(|[re, im]| C64::new(*re, *im))
            .collect()
    }
}

/// Solved pulse schedule, the primary synthesize output.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleDocument {
    pub protocol: Protocol,
    pub cycles: Vec<ScheduleCycle>,
    pub metadata: ScheduleMetadata,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleCycle {
    pub m: usize,
    pub rabi: f64,
    pub frequency: f64,
    pub tau: f64,
    pub tau_prime: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleMetadata {
    pub solver_version: String,
    pub target_hash: String,
    pub global_phase: f64,
}

impl ScheduleDocument {
    pub fn from_schedule(schedule: &PulseSchedule, target_hash: String, global_phase: f64) -> Self {
        Self {
            protocol: schedule.protocol(),
            cycles: schedule
                .cycles()
                .iter()
                .map(|c| ScheduleCycle {
                    m: c.index,
                    rabi: c.rabi,
                    frequency: c.drive_frequency,
                    tau: c.tau,
                    tau_prime: c.tau_prime,
                })
                .collect(),
            metadata: ScheduleMetadata {
                solver_version: env!("CARGO_PKG_VERSION").to_string(),
                target_hash,
                global_phase,
            },
        }
    }

    pub fn to_schedule(&self, spectrum: &EnergySpectrum) -> Result<PulseSchedule, CliError> {
        let cycles = self
            .cycles
            .iter()
            .map(|c| {
                CycleControl::new(
                    c.m,
                    c.rabi,
                    c.frequency,
                    c.tau,
                    c.tau_prime,
                    spectrum.hbar(),
                )
            })
            .collect::<qcontrol::Result<Vec<_>>>()?;
        Ok(PulseSchedule::new(self.protocol, cycles)?)
    }
}

/// Output of `classify`.
#[derive(Debug, Serialize)]
pub struct ClassifyDocument {
    pub kind: qcontrol::GapKind,
    pub gaps: Vec<f64>,
    pub cumulative_gaps: Vec<f64>,
    /// One transition table per supported protocol.
    pub transitions: Vec<TransitionTable>,
}

/// Output of `simulate`.
#[derive(Debug, Serialize)]
pub struct SimulationDocument {
    pub final_state: Vec<[f64; 2]>,
    /// Snapshot after each cycle.
    pub trace: Vec<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rwa_report: Option<RwaReport>,
}

#[derive(Debug, Serialize)]
pub struct OracleSection {
    pub amplitudes: Vec<[f64; 2]>,
    pub max_deviation_vs_analytic: f64,
}

/// Output of `controllability`.
#[derive(Debug, Serialize)]
pub struct ControllabilityDocument {
    pub protocol: Protocol,
    pub dimension: usize,
    pub su_dimension: usize,
    pub is_fully_controllable: bool,
    pub iterations: usize,
    pub rank_tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restricted_to: Option<Vec<usize>>,
}

pub fn amplitudes_to_pairs(state: &QuantumState) -> Vec<[f64; 2]> {
    state.amplitudes().iter().map(|a| [a.re, a.im]).collect()
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        message: source.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        message: source.to_string(),
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable document");
    text.push('\n');
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        message: source.to_string(),
    })
}

pub fn render_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable document")
}

/// FNV-1a over the amplitude bit patterns; stable across runs and platforms.
pub fn target_hash(amplitudes: &[C64]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |bits: u64| {
        for byte in bits.to_le_bytes() {
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    for amp in amplitudes {
        eat(amp.re.to_bits());
        eat(amp.im.to_bits());
    }
    format!("{hash:016x}")
}
