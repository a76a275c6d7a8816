//! `qcontrol`: synthesize and simulate analytic control-pulse schedules for
//! N-level systems.
//!
//! Subcommands read and write small JSON documents (see the repository
//! README for the schemas). Human-readable summaries go to stdout, the
//! primary JSON document is printed last (or written with `--out`), and
//! fatal errors are emitted as one JSON object on stderr. Verbosity is
//! controlled by the `QCONTROL_VERBOSITY` environment variable
//! (0 = documents only, 1 = default, 2 = chatty).
//!
//! Exit codes: 0 success, 2 input validation, 3 infeasible synthesis,
//! 4 numerical guard tripped.

mod docs;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use qcontrol::{
    build_generators, build_restricted_generators, classify_gaps, dense_schedule_oracle_from,
    fidelity, lie_closure_dimension, run_schedule, rwa_report, synthesize_with_decomposition,
    transition_table, EnergySpectrum, Error as CoreError, FieldClock, GapKind, IntegratorConfig,
    Protocol, QuantumState, SynthesisConfig, GAP_TOLERANCE, RANK_TOLERANCE,
};

use docs::{
    amplitudes_to_pairs, load_json, render_json, target_hash, write_json, ClassifyDocument,
    ControllabilityDocument, OracleSection, ProtocolChoice, RabiSpec, ScheduleDocument,
    SimulationDocument, StateDocument, SystemDocument,
};

#[derive(Debug)]
pub enum CliError {
    Core(CoreError),
    Io { path: String, message: String },
    Parse { path: String, message: String },
    Usage(String),
    DriftFlagged { drift: f64, tolerance: f64 },
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "Io",
            CliError::Parse { .. } => "ParseJson",
            CliError::Usage(_) => "Usage",
            CliError::DriftFlagged { .. } => "NormDriftExceeded",
            CliError::Core(e) => match e {
                CoreError::TooFewLevels { .. } => "TooFewLevels",
                CoreError::NonIncreasingLevels { .. } => "NonIncreasingLevels",
                CoreError::IncompatibleProtocol { .. } => "IncompatibleProtocol",
                CoreError::IndexOutOfRange { .. } => "IndexOutOfRange",
                CoreError::NegativeDuration { .. } => "NegativeDuration",
                CoreError::ScheduleMismatch(_) => "ScheduleMismatch",
                CoreError::UnnormalizedInput { .. } => "UnnormalizedInput",
                CoreError::DimensionMismatch { .. } => "DimensionMismatch",
                CoreError::InfeasibleModuli(_) => "InfeasibleModuli",
                CoreError::NoReferenceSlot => "NoReferenceSlot",
                CoreError::StepTooLarge { .. } => "StepTooLarge",
                CoreError::NormDriftExceeded { .. } => "NormDriftExceeded",
                CoreError::NonHermitianInput { .. } => "NonHermitianInput",
                CoreError::ClosureBudgetExceeded { .. } => "ClosureBudgetExceeded",
                CoreError::SynthesisVerification { .. } => "SynthesisVerification",
                CoreError::InvalidConfig(_) => "InvalidConfig",
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Core(e) => e.to_string(),
            CliError::Io { path, message } => format!("{path}: {message}"),
            CliError::Parse { path, message } => format!("{path}: {message}"),
            CliError::Usage(message) => message.clone(),
            CliError::DriftFlagged { drift, tolerance } => {
                format!("norm drift {drift:.3e} exceeds tolerance {tolerance:.3e}")
            }
        }
    }

    fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(CoreError::InfeasibleModuli(_))
            | CliError::Core(CoreError::NoReferenceSlot) => 3,
            CliError::Core(CoreError::NormDriftExceeded { .. })
            | CliError::Core(CoreError::ClosureBudgetExceeded { .. })
            | CliError::Core(CoreError::SynthesisVerification { .. })
            | CliError::DriftFlagged { .. } => 4,
            _ => 2,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "qcontrol",
    version,
    about = "Analytic pulse-schedule synthesis and simulation for N-level systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ProtocolArg {
    Auto,
    SystemI,
    SystemII,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FieldClockArg {
    Local,
    Global,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a system file and report its gap classification.
    Classify {
        /// System JSON file.
        system: PathBuf,
        /// Relative tolerance for gap comparisons.
        #[arg(long, default_value_t = GAP_TOLERANCE)]
        tolerance: f64,
        /// Also write the classification JSON to a file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the pulse schedule that drives the ground state to a target.
    Synthesize {
        /// System JSON file.
        system: PathBuf,
        /// Target state JSON file.
        target: PathBuf,
        /// Output schedule JSON file.
        out: PathBuf,
        /// Rabi rate(s): one value broadcast, or one per cycle.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        rabi: Option<Vec<f64>>,
        /// Drive protocol; defaults to the system file, then to auto.
        #[arg(long, value_enum)]
        protocol: Option<ProtocolArg>,
    },
    /// Propagate a state through a schedule (analytically, with optional
    /// exact integration and oracle cross-checks).
    Simulate {
        /// System JSON file.
        system: PathBuf,
        /// Schedule JSON file.
        schedule: PathBuf,
        /// Initial state file (default: ground state).
        #[arg(long)]
        initial: Option<PathBuf>,
        /// Also integrate the exact lab-frame dynamics and report the
        /// rotating-wave error.
        #[arg(long)]
        full_ode: bool,
        /// Reference target for the --full-ode report (default: the
        /// analytic final state).
        #[arg(long)]
        target: Option<PathBuf>,
        /// Cross-check with the dense matrix-exponential oracle.
        #[arg(long)]
        oracle: bool,
        /// Integrator steps per period of the fastest frequency.
        #[arg(long, default_value_t = 200)]
        steps_per_period: u32,
        /// Norm-drift tolerance of the integrator.
        #[arg(long, default_value_t = 1e-8)]
        drift_tolerance: f64,
        /// Clock convention of the cosine drive.
        #[arg(long, value_enum, default_value_t = FieldClockArg::Local)]
        field_clock: FieldClockArg,
        /// Write the result JSON to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the drift/control generators and compute the Lie closure.
    Controllability {
        /// System JSON file.
        system: PathBuf,
        /// Drive protocol; defaults to the system file, then to auto.
        #[arg(long, value_enum)]
        protocol: Option<ProtocolArg>,
        /// Keep only these control cycles (1-based, comma separated).
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        restrict: Option<Vec<usize>>,
        /// Write the report JSON to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn verbosity() -> u8 {
    std::env::var("QCONTROL_VERBOSITY")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(1)
}

struct Printer {
    level: u8,
}

impl Printer {
    fn say(&self, min_level: u8, text: &str) {
        if self.level >= min_level {
            println!("{text}");
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let printer = Printer { level: verbosity() };
    if let Err(error) = run(cli, &printer) {
        let payload = json!({
            "error": { "kind": error.kind(), "message": error.message() }
        });
        eprintln!("{payload}");
        std::process::exit(error.exit_code());
    }
}

fn load_spectrum(doc: &SystemDocument, tolerance: f64) -> Result<EnergySpectrum, CliError> {
    let spectrum = EnergySpectrum::new(&doc.levels, tolerance)?;
    match doc.hbar {
        Some(hbar) => Ok(spectrum.with_hbar(hbar)?),
        None => Ok(spectrum),
    }
}

/// Pick the protocol: command-line flag, then system file, then auto.
fn resolve_protocol(
    flag: Option<ProtocolArg>,
    doc: &SystemDocument,
    spectrum: &EnergySpectrum,
) -> Result<Protocol, CliError> {
    let choice = match flag {
        Some(ProtocolArg::SystemI) => return Ok(Protocol::SystemI),
        Some(ProtocolArg::SystemII) => return Ok(Protocol::SystemII),
        Some(ProtocolArg::Auto) => ProtocolChoice::Auto,
        None => doc.protocol.unwrap_or(ProtocolChoice::Auto),
    };
    match choice {
        ProtocolChoice::SystemI => Ok(Protocol::SystemI),
        ProtocolChoice::SystemII => Ok(Protocol::SystemII),
        ProtocolChoice::Auto => match classify_gaps(spectrum, GAP_TOLERANCE).kind {
            GapKind::SystemI | GapKind::Both => Ok(Protocol::SystemI),
            GapKind::SystemII => Ok(Protocol::SystemII),
            GapKind::Neither => Err(CliError::Usage(
                "spectrum supports neither protocol (gaps are neither \
                 first-distinct-rest-equal nor pairwise distinct)"
                    .into(),
            )),
        },
    }
}

/// Rabi rates: command-line flag, then system file, then 0.1 broadcast.
fn resolve_rabi(
    flag: Option<Vec<f64>>,
    doc: &SystemDocument,
    cycles: usize,
) -> Result<Vec<f64>, CliError> {
    let listed = match flag {
        Some(values) => Some(values),
        None => match &doc.rabi {
            Some(RabiSpec::Scalar(value)) => Some(vec![*value]),
            Some(RabiSpec::PerCycle(values)) => Some(values.clone()),
            None => None,
        },
    };
    let values = match listed {
        None => vec![0.1; cycles],
        Some(values) if values.len() == 1 => vec![values[0]; cycles],
        Some(values) if values.len() == cycles => values,
        Some(values) => {
            return Err(CliError::Usage(format!(
                "expected 1 or {} Rabi rates, got {}",
                cycles,
                values.len()
            )))
        }
    };
    Ok(values)
}

/// Load a state file, renormalizing mildly off inputs with a warning.
fn load_state(path: &Path, dim: usize, role: &str) -> Result<QuantumState, CliError> {
    let doc: StateDocument = load_json(path)?;
    let amplitudes = doc.to_complex();
    if amplitudes.len() != dim {
        return Err(CoreError::DimensionMismatch {
            expected: dim,
            got: amplitudes.len(),
        }
        .into());
    }
    let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
    let deviation = (norm_sqr - 1.0).abs();
    if deviation > 1e-2 {
        return Err(CoreError::UnnormalizedInput { norm_sqr }.into());
    }
    if deviation > 1e-10 {
        eprintln!("warning: {role} renormalized (|norm^2 - 1| = {deviation:.3e})");
    }
    Ok(QuantumState::normalized(amplitudes)?)
}

fn emit<T: serde::Serialize>(
    document: &T,
    out: Option<&Path>,
    printer: &Printer,
) -> Result<(), CliError> {
    match out {
        Some(path) => {
            write_json(path, document)?;
            printer.say(1, &format!("wrote {}", path.display()));
            Ok(())
        }
        None => {
            println!("{}", render_json(document));
            Ok(())
        }
    }
}

fn run(cli: Cli, printer: &Printer) -> Result<(), CliError> {
    match cli.command {
        Command::Classify {
            system,
            tolerance,
            out,
        } => cmd_classify(&system, tolerance, out.as_deref(), printer),
        Command::Synthesize {
            system,
            target,
            out,
            rabi,
            protocol,
        } => cmd_synthesize(&system, &target, &out, rabi, protocol, printer),
        Command::Simulate {
            system,
            schedule,
            initial,
            full_ode,
            target,
            oracle,
            steps_per_period,
            drift_tolerance,
            field_clock,
            out,
        } => cmd_simulate(
            &system,
            &schedule,
            initial.as_deref(),
            full_ode,
            target.as_deref(),
            oracle,
            steps_per_period,
            drift_tolerance,
            field_clock,
            out.as_deref(),
            printer,
        ),
        Command::Controllability {
            system,
            protocol,
            restrict,
            out,
        } => cmd_controllability(&system, protocol, restrict, out.as_deref(), printer),
    }
}

fn cmd_classify(
    system: &Path,
    tolerance: f64,
    out: Option<&Path>,
    printer: &Printer,
) -> Result<(), CliError> {
    let doc: SystemDocument = load_json(system)?;
    let spectrum = load_spectrum(&doc, tolerance)?;
    let class = classify_gaps(&spectrum, tolerance);

    let mut transitions = Vec::new();
    for protocol in [Protocol::SystemI, Protocol::SystemII] {
        if class.kind.supports(protocol) {
            transitions.push(transition_table(&spectrum, protocol)?);
        }
    }

    printer.say(1, &format!("kind: {}", class.kind));
    printer.say(
        1,
        &format!(
            "levels (centered): {:?}  (shift {})",
            spectrum.levels(),
            spectrum.shift()
        ),
    );
    printer.say(1, &format!("gaps: {:?}", class.gaps));
    for table in &transitions {
        printer.say(
            1,
            &format!(
                "{}: frequencies {:?} pairs {:?}",
                table.protocol, table.frequencies, table.coupled_pairs
            ),
        );
    }

    let document = ClassifyDocument {
        kind: class.kind,
        gaps: class.gaps,
        cumulative_gaps: class.cumulative_gaps,
        transitions,
    };
    emit(&document, out, printer)
}

fn cmd_synthesize(
    system: &Path,
    target_path: &Path,
    out: &Path,
    rabi: Option<Vec<f64>>,
    protocol_flag: Option<ProtocolArg>,
    printer: &Printer,
) -> Result<(), CliError> {
    let doc: SystemDocument = load_json(system)?;
    let spectrum = load_spectrum(&doc, GAP_TOLERANCE)?;
    let protocol = resolve_protocol(protocol_flag, &doc, &spectrum)?;
    let cycles = spectrum.dim() - 1;
    let rabi = resolve_rabi(rabi, &doc, cycles)?;
    let config = SynthesisConfig::per_cycle(rabi)?;
    let target = load_state(target_path, spectrum.dim(), "target")?;

    let (schedule, decomposition) =
        synthesize_with_decomposition(&spectrum, protocol, &target, &config)?;
    let (reached, _) = run_schedule(&spectrum, &schedule, &QuantumState::ground(spectrum.dim()))?;
    let predicted = fidelity(&reached, &target)?;

    printer.say(1, &format!("protocol: {protocol}"));
    for cycle in schedule.cycles() {
        printer.say(
            2,
            &format!(
                "cycle {}: nu = {}, tau = {}, tau' = {}",
                cycle.index, cycle.drive_frequency, cycle.tau, cycle.tau_prime
            ),
        );
    }
    println!("predicted fidelity: {predicted:.12}");

    let document = ScheduleDocument::from_schedule(
        &schedule,
        target_hash(target.amplitudes()),
        decomposition.global_phase,
    );
    write_json(out, &document)?;
    printer.say(1, &format!("schedule written to {}", out.display()));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    system: &Path,
    schedule_path: &Path,
    initial: Option<&Path>,
    full_ode: bool,
    target: Option<&Path>,
    oracle: bool,
    steps_per_period: u32,
    drift_tolerance: f64,
    field_clock: FieldClockArg,
    out: Option<&Path>,
    printer: &Printer,
) -> Result<(), CliError> {
    let doc: SystemDocument = load_json(system)?;
    let spectrum = load_spectrum(&doc, GAP_TOLERANCE)?;
    let schedule_doc: ScheduleDocument = load_json(schedule_path)?;
    let schedule = schedule_doc.to_schedule(&spectrum)?;
    let dim = spectrum.dim();
    let initial_state = match initial {
        Some(path) => load_state(path, dim, "initial state")?,
        None => QuantumState::ground(dim),
    };

    let (final_state, trace) = run_schedule(&spectrum, &schedule, &initial_state)?;
    for (k, amp) in final_state.amplitudes().iter().enumerate() {
        printer.say(
            1,
            &format!(
                "level {}: {:+.12} {:+.12}i  (population {:.12})",
                k + 1,
                amp.re,
                amp.im,
                amp.norm_sqr()
            ),
        );
    }
    for (m, state) in trace.states().iter().enumerate() {
        printer.say(
            2,
            &format!("after cycle {}: {:?}", m + 1, state.amplitudes()),
        );
    }

    let oracle_section = if oracle {
        let reference = dense_schedule_oracle_from(&spectrum, &schedule, &initial_state)?;
        let deviation = reference.max_distance(&final_state);
        printer.say(1, &format!("oracle max deviation: {deviation:.3e}"));
        Some(OracleSection {
            amplitudes: amplitudes_to_pairs(&reference),
            max_deviation_vs_analytic: deviation,
        })
    } else {
        None
    };

    let mut drift_flagged = None;
    let report = if full_ode {
        let config = IntegratorConfig {
            steps_per_drive_period: steps_per_period,
            norm_drift_tolerance: drift_tolerance,
            field_clock: match field_clock {
                FieldClockArg::Local => FieldClock::Local,
                FieldClockArg::Global => FieldClock::Global,
            },
            ..IntegratorConfig::default()
        };
        let reference = match target {
            Some(path) => load_state(path, dim, "target")?,
            None => final_state.clone(),
        };
        let report = rwa_report(&spectrum, &schedule, &reference, &config)?;
        printer.say(
            1,
            &format!(
                "full-ode: F(full, analytic) = {:.12}, norm drift = {:.3e}",
                report.fidelity_full_vs_analytic, report.max_norm_drift
            ),
        );
        if report.drift_exceeded {
            drift_flagged = Some(CliError::DriftFlagged {
                drift: report.max_norm_drift,
                tolerance: drift_tolerance,
            });
        }
        Some(report)
    } else {
        None
    };

    let document = SimulationDocument {
        final_state: amplitudes_to_pairs(&final_state),
        trace: trace.states().iter().map(amplitudes_to_pairs).collect(),
        oracle: oracle_section,
        rwa_report: report,
    };
    emit(&document, out, printer)?;
    match drift_flagged {
        Some(error) => Err(error),
        None => Ok(()),
    }
}

fn cmd_controllability(
    system: &Path,
    protocol_flag: Option<ProtocolArg>,
    restrict: Option<Vec<usize>>,
    out: Option<&Path>,
    printer: &Printer,
) -> Result<(), CliError> {
    let doc: SystemDocument = load_json(system)?;
    let spectrum = load_spectrum(&doc, GAP_TOLERANCE)?;
    let protocol = resolve_protocol(protocol_flag, &doc, &spectrum)?;
    let generators = match &restrict {
        Some(controls) => build_restricted_generators(&spectrum, protocol, controls)?,
        None => build_generators(&spectrum, protocol)?,
    };
    let report = lie_closure_dimension(&generators, RANK_TOLERANCE)?;
    let n = spectrum.dim();

    printer.say(
        1,
        &format!(
            "closure dimension {} of {} (su({})): {}",
            report.dimension,
            n * n - 1,
            n,
            if report.is_fully_controllable {
                "fully controllable"
            } else {
                "not fully controllable"
            }
        ),
    );

    let document = ControllabilityDocument {
        protocol,
        dimension: report.dimension,
        su_dimension: n * n - 1,
        is_fully_controllable: report.is_fully_controllable,
        iterations: report.iterations,
        rank_tolerance: report.rank_tolerance,
        restricted_to: restrict,
    };
    emit(&document, out, printer)
}
