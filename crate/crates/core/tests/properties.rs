//! Property tests for the analytic propagator, the synthesis inverse, and
//! the spectrum classification.

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use qcontrol::{
    classify_gaps, closed_form_amplitudes, cycle_unitary, fidelity, free_evolution, run_schedule,
    synthesize, synthesize_with_decomposition, transition_table, CycleControl, EnergySpectrum,
    Protocol, PulseSchedule, QuantumState, SynthesisConfig, GAP_TOLERANCE,
};

const FRAC_PI_2: f64 = std::f64::consts::FRAC_PI_2;

/// Raw levels with the first gap distinct and all later gaps equal.
fn system_i_levels(dim: usize, first_gap: f64, tail_gap: f64) -> Vec<f64> {
    let mut levels = vec![0.0, first_gap];
    for _ in 2..dim {
        levels.push(levels.last().unwrap() + tail_gap);
    }
    levels
}

/// Raw levels with pairwise distinct gaps.
fn system_ii_levels(dim: usize, base: f64, step: f64) -> Vec<f64> {
    let mut levels = vec![0.0];
    for k in 0..dim - 1 {
        levels.push(levels.last().unwrap() + base + step * k as f64);
    }
    levels
}

fn spectrum_strategy() -> impl Strategy<Value = (EnergySpectrum, Protocol)> {
    (2usize..=8, 0.5f64..3.0, 0.5f64..2.0, proptest::bool::ANY).prop_map(
        |(dim, a, b, use_ladder)| {
            if use_ladder {
                let s =
                    EnergySpectrum::new(&system_ii_levels(dim, a, b / 2.0), GAP_TOLERANCE).unwrap();
                (s, Protocol::SystemII)
            } else {
                // Keep the first gap well away from the tail gap.
                let s =
                    EnergySpectrum::new(&system_i_levels(dim, a + 2.5, b), GAP_TOLERANCE).unwrap();
                (s, Protocol::SystemI)
            }
        },
    )
}

fn schedule_strategy() -> impl Strategy<Value = (EnergySpectrum, Protocol, PulseSchedule)> {
    (spectrum_strategy(), 0.05f64..0.8)
        .prop_flat_map(|((spectrum, protocol), rabi)| {
            let cycles = spectrum.dim() - 1;
            (
                Just(spectrum),
                Just(protocol),
                Just(rabi),
                proptest::collection::vec((0.0f64..5.0, 0.0f64..5.0), cycles),
            )
        })
        .prop_map(|(spectrum, protocol, rabi, windows)| {
            let table = transition_table(&spectrum, protocol).unwrap();
            let cycles = windows
                .iter()
                .enumerate()
                .map(|(k, &(tau, tau_prime))| {
                    CycleControl::new(
                        k + 1,
                        rabi,
                        table.frequencies[k],
                        tau,
                        tau_prime,
                        spectrum.hbar(),
                    )
                    .unwrap()
                })
                .collect();
            let schedule = PulseSchedule::new(protocol, cycles).unwrap();
            (spectrum, protocol, schedule)
        })
}

/// Direct evaluation of the moduli chain at given pulse angles.
fn reconstruct_moduli(protocol: Protocol, angles: &[f64]) -> Vec<f64> {
    let n = angles.len() + 1;
    let mut moduli = vec![0.0; n];
    match protocol {
        Protocol::SystemI => {
            moduli[0] = angles.iter().map(|t| t.cos()).product();
            let mut prefix = 1.0;
            for k in 1..n {
                moduli[k] = angles[k - 1].sin() * prefix;
                prefix *= angles[k - 1].cos();
            }
        }
        Protocol::SystemII => {
            let mut prefix = 1.0;
            for m in 0..n - 1 {
                moduli[m] = angles[m].cos() * prefix;
                prefix *= angles[m].sin();
            }
            moduli[n - 1] = prefix;
        }
    }
    moduli
}

fn target_strategy() -> impl Strategy<Value = Vec<C64>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..=8)
        .prop_filter("needs usable norm", |parts| {
            parts.iter().map(|(re, im)| re * re + im * im).sum::<f64>() > 1e-3
        })
        .prop_map(|parts| parts.into_iter().map(|(re, im)| C64::new(re, im)).collect())
}

proptest! {
    #[test]
    fn cycle_unitaries_are_unitary(
        (spectrum, protocol) in spectrum_strategy(),
        m_frac in 0.0f64..1.0,
        angle in -10.0f64..10.0,
    ) {
        let dim = spectrum.dim();
        let m = 1 + ((dim - 1) as f64 * m_frac) as usize % (dim - 1);
        let u = cycle_unitary(protocol, dim, m, angle).unwrap();
        let adjoint = u.t().mapv(|x| x.conj());
        let product = adjoint.dot(&u);
        for i in 0..dim {
            for j in 0..dim {
                let expect = if i == j { 1.0 } else { 0.0 };
                prop_assert!((product[[i, j]] - C64::new(expect, 0.0)).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn run_schedule_preserves_norm(
        (spectrum, _, schedule) in schedule_strategy(),
    ) {
        let initial = QuantumState::ground(spectrum.dim());
        let (final_state, trace) = run_schedule(&spectrum, &schedule, &initial).unwrap();
        prop_assert!((final_state.norm() - 1.0).abs() <= 1e-12);
        for state in trace.states() {
            prop_assert!((state.norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn closed_form_equals_recursion(
        (spectrum, _, schedule) in schedule_strategy(),
    ) {
        let initial = QuantumState::ground(spectrum.dim());
        let (run, _) = run_schedule(&spectrum, &schedule, &initial).unwrap();
        let closed = closed_form_amplitudes(&spectrum, &schedule).unwrap();
        prop_assert!(closed.max_distance(&run) <= 1e-12);
    }

    #[test]
    fn free_evolution_composes(
        (spectrum, _) in spectrum_strategy(),
        t1 in 0.0f64..10.0,
        t2 in 0.0f64..10.0,
    ) {
        let initial = qcontrol::random_target(spectrum.dim(), 99);
        let two_steps = free_evolution(
            &free_evolution(&initial, &spectrum, t1).unwrap(),
            &spectrum,
            t2,
        )
        .unwrap();
        let one_step = free_evolution(&initial, &spectrum, t1 + t2).unwrap();
        prop_assert!(two_steps.max_distance(&one_step) <= 1e-12);
    }

    #[test]
    fn synthesis_round_trips(
        (spectrum, protocol) in spectrum_strategy(),
        raw in target_strategy(),
        rabi in 0.05f64..0.6,
    ) {
        let dim = spectrum.dim();
        let mut amplitudes = raw;
        amplitudes.resize(dim, C64::new(0.0, 0.0));
        prop_assume!(amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() > 1e-3);
        let target = QuantumState::normalized(amplitudes).unwrap();

        let config = SynthesisConfig::uniform(rabi, dim - 1).unwrap();
        let schedule = synthesize(&spectrum, protocol, &target, &config).unwrap();
        let (reached, _) =
            run_schedule(&spectrum, &schedule, &QuantumState::ground(dim)).unwrap();
        prop_assert!(fidelity(&reached, &target).unwrap() >= 1.0 - 1e-9);
    }

    #[test]
    fn synthesized_angles_and_durations_stay_in_range(
        (spectrum, protocol) in spectrum_strategy(),
        seed in 0u64..1_000_000,
    ) {
        let dim = spectrum.dim();
        let target = qcontrol::random_target(dim, seed);
        let config = SynthesisConfig::uniform(0.2, dim - 1).unwrap();
        let (schedule, decomposition) =
            synthesize_with_decomposition(&spectrum, protocol, &target, &config).unwrap();
        for theta in &decomposition.pulse_angles {
            prop_assert!((0.0..=FRAC_PI_2 + 1e-15).contains(theta));
        }
        for cycle in schedule.cycles() {
            prop_assert!(cycle.tau >= 0.0);
            prop_assert!(cycle.tau_prime >= 0.0);
        }
        // 2(N-1) duration parameters in total.
        prop_assert_eq!(schedule.cycle_count(), dim - 1);
        // The sine/cosine chain evaluated at the solved angles reproduces
        // the target moduli.
        let rebuilt = reconstruct_moduli(protocol, &decomposition.pulse_angles);
        for (slot, (a, b)) in rebuilt.iter().zip(&decomposition.moduli).enumerate() {
            prop_assert!((a - b).abs() <= 1e-10, "slot {}: {} vs {}", slot, a, b);
        }
    }

    #[test]
    fn fidelity_ignores_global_phase(
        seed in 0u64..1_000_000,
        angle in -10.0f64..10.0,
    ) {
        let state = qcontrol::random_target(5, seed);
        let rotation = C64::from_polar(1.0, angle);
        let rotated = QuantumState::new(
            state.amplitudes().iter().map(|a| a * rotation).collect(),
        )
        .unwrap();
        prop_assert!((fidelity(&state, &rotated).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn classification_is_deterministic_and_consistent(
        (spectrum, protocol) in spectrum_strategy(),
    ) {
        let a = classify_gaps(&spectrum, GAP_TOLERANCE);
        let b = classify_gaps(&spectrum, GAP_TOLERANCE);
        prop_assert_eq!(&a, &b);
        prop_assert!(a.kind.supports(protocol));
        // Cumulative gaps are strictly increasing.
        for pair in a.cumulative_gaps.windows(2) {
            prop_assert!(pair[1] > pair[0]);
        }
        // Table frequencies reproduce level differences exactly.
        let table = transition_table(&spectrum, protocol).unwrap();
        for m in 1..spectrum.dim() {
            let (low, high) = table.coupled_zero_based(m);
            let diff = (spectrum.level(high) - spectrum.level(low)) / spectrum.hbar();
            prop_assert!((table.frequencies[m - 1] - diff).abs() <= 1e-12);
        }
    }
}
