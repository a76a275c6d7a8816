//! Energy spectra of the uncontrolled system and their gap structure.
//!
//! The gap pattern of a spectrum decides which drive protocol applies:
//! system I has a single distinct first gap with all later gaps equal
//! (every cycle couples the ground level to a higher level), system II has
//! all gaps pairwise distinct (every cycle couples adjacent levels). The
//! transition table lists the resonant drive frequency and coupled level
//! pair for each of the N-1 control cycles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance for gap-equality comparisons.
pub const GAP_TOLERANCE: f64 = 1e-9;

/// Ordered energy levels of an N-level system, centered so they sum to zero.
///
/// A uniform shift of all levels only contributes a global phase, so inputs
/// are centered on construction and the applied shift is recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySpectrum {
    levels: Vec<f64>,
    hbar: f64,
    shift: f64,
}

impl EnergySpectrum {
    /// Validate raw levels and center them. See [`validate_spectrum`].
    pub fn new(raw_levels: &[f64], tolerance: f64) -> Result<Self> {
        validate_spectrum(raw_levels, tolerance)
    }

    /// Replace the scale constant ħ (default 1).
    pub fn with_hbar(mut self, hbar: f64) -> Result<Self> {
        if !hbar.is_finite() || hbar <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "hbar must be a positive finite number, got {hbar}"
            )));
        }
        self.hbar = hbar;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    /// Centered levels, strictly increasing.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Energy of the 0-based level `k`.
    pub fn level(&self, k: usize) -> f64 {
        self.levels[k]
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Uniform shift subtracted from the raw input levels.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Angular frequency of the transition between 0-based levels `j < k`.
    pub fn bohr_frequency(&self, k: usize, j: usize) -> f64 {
        (self.levels[k] - self.levels[j]) / self.hbar
    }

    /// Largest Bohr frequency of the spectrum, (E_N - E_1)/ħ.
    pub fn max_bohr_frequency(&self) -> f64 {
        (self.levels[self.levels.len() - 1] - self.levels[0]) / self.hbar
    }
}

/// Gap pattern of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapKind {
    /// First gap distinct, all later gaps equal.
    #[serde(rename = "system-i")]
    SystemI,
    /// All gaps pairwise distinct.
    #[serde(rename = "system-ii")]
    SystemII,
    /// Satisfies both patterns (always the case for N = 2).
    Both,
    Neither,
}

impl GapKind {
    pub fn supports(self, protocol: Protocol) -> bool {
        matches!(
            (self, protocol),
            (GapKind::SystemI | GapKind::Both, Protocol::SystemI)
                | (GapKind::SystemII | GapKind::Both, Protocol::SystemII)
        )
    }
}

impl std::fmt::Display for GapKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            GapKind::SystemI => "system-i",
            GapKind::SystemII => "system-ii",
            GapKind::Both => "both",
            GapKind::Neither => "neither",
        };
        write!(f, "{s}")
    }
}

/// Drive protocol: which level pair each control cycle couples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Protocol {
    /// Cycle m drives the (1, m+1) transition at the cumulative gap frequency.
    #[serde(rename = "system-i")]
    SystemI,
    /// Cycle m drives the (m, m+1) transition at the adjacent gap frequency.
    #[serde(rename = "system-ii")]
    SystemII,
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Protocol::SystemI => write!(f, "system-i"),
            Protocol::SystemII => write!(f, "system-ii"),
        }
    }
}

/// Gap lists and the detected pattern.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapClassification {
    pub kind: GapKind,
    /// Adjacent gaps μ_i = E_{i+1} - E_i.
    pub gaps: Vec<f64>,
    /// Cumulative gaps μ̃_i = E_{i+1} - E_1.
    pub cumulative_gaps: Vec<f64>,
}

/// Resonant drive frequencies and coupled level pairs, one entry per cycle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionTable {
    pub protocol: Protocol,
    /// Angular drive frequencies ν_m, m = 1..N-1.
    pub frequencies: Vec<f64>,
    /// 1-based level pairs coupled in each cycle.
    pub coupled_pairs: Vec<(usize, usize)>,
}

impl TransitionTable {
    pub fn cycle_count(&self) -> usize {
        self.frequencies.len()
    }

    /// Coupled pair of cycle `m` (1-based) as 0-based level indices.
    pub fn coupled_zero_based(&self, m: usize) -> (usize, usize) {
        let (a, b) = self.coupled_pairs[m - 1];
        (a - 1, b - 1)
    }
}

/// Coupled pair of cycle `m` (1-based) as 0-based level indices, by protocol.
pub(crate) fn coupled_pair(protocol: Protocol, m: usize) -> (usize, usize) {
    match protocol {
        Protocol::SystemI => (0, m),
        Protocol::SystemII => (m - 1, m),
    }
}

/// Validate raw levels: at least two, strictly increasing, then shift by the
/// mean so the levels sum to zero. The shift is recorded on the result.
pub fn validate_spectrum(raw_levels: &[f64], tolerance: f64) -> Result<EnergySpectrum> {
    if raw_levels.len() < 2 {
        return Err(Error::TooFewLevels {
            count: raw_levels.len(),
        });
    }
    if let Some(idx) = raw_levels.iter().position(|e| !e.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "level {idx} is not a finite number"
        )));
    }
    for (i, pair) in raw_levels.windows(2).enumerate() {
        let gap = pair[1] - pair[0];
        let scale = pair[0].abs().max(pair[1].abs());
        if gap <= 0.0 || gap <= tolerance * scale {
            return Err(Error::NonIncreasingLevels { index: i });
        }
    }
    let mean = raw_levels.iter().sum::<f64>() / raw_levels.len() as f64;
    let levels = raw_levels.iter().map(|e| e - mean).collect();
    Ok(EnergySpectrum {
        levels,
        hbar: 1.0,
        shift: mean,
    })
}

/// Classify the gap pattern of a valid spectrum.
///
/// Gap equality is decided with a relative `tolerance`. `Neither` is a valid
/// outcome; N = 2 always classifies as `Both`.
pub fn classify_gaps(spectrum: &EnergySpectrum, tolerance: f64) -> GapClassification {
    let levels = spectrum.levels();
    let gaps: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
    let cumulative_gaps: Vec<f64> = levels[1..].iter().map(|e| e - levels[0]).collect();

    let eq = |a: f64, b: f64| (a - b).abs() <= tolerance * a.abs().max(b.abs());

    let system_i =
        gaps.len() == 1 || (!eq(gaps[0], gaps[1]) && gaps[2..].iter().all(|&g| eq(g, gaps[1])));
    let system_ii = (0..gaps.len()).all(|i| (i + 1..gaps.len()).all(|j| !eq(gaps[i], gaps[j])));

    let kind = match (system_i, system_ii) {
        (true, true) => GapKind::Both,
        (true, false) => GapKind::SystemI,
        (false, true) => GapKind::SystemII,
        (false, false) => GapKind::Neither,
    };
    GapClassification {
        kind,
        gaps,
        cumulative_gaps,
    }
}

/// Build the transition table for a spectrum under the given protocol.
///
/// Fails with `IncompatibleProtocol` when the gap classification (at the
/// default [`GAP_TOLERANCE`]) does not support the protocol.
pub fn transition_table(spectrum: &EnergySpectrum, protocol: Protocol) -> Result<TransitionTable> {
    let class = classify_gaps(spectrum, GAP_TOLERANCE);
    if !class.kind.supports(protocol) {
        return Err(Error::IncompatibleProtocol {
            kind: class.kind,
            protocol,
        });
    }
    let n = spectrum.dim();
    let mut frequencies = Vec::with_capacity(n - 1);
    let mut coupled_pairs = Vec::with_capacity(n - 1);
    for m in 1..n {
        let (a, b) = coupled_pair(protocol, m);
        frequencies.push(spectrum.bohr_frequency(b, a));
        coupled_pairs.push((a + 1, b + 1));
    }
    Ok(TransitionTable {
        protocol,
        frequencies,
        coupled_pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectrum(levels: &[f64]) -> EnergySpectrum {
        validate_spectrum(levels, GAP_TOLERANCE).unwrap()
    }

    #[test]
    fn traceless_input_is_kept() {
        let s = spectrum(&[-3.0, 0.0, 1.0, 2.0]);
        assert_eq!(s.levels(), &[-3.0, 0.0, 1.0, 2.0]);
        assert_eq!(s.shift(), 0.0);
    }

    #[test]
    fn non_traceless_input_is_centered() {
        let s = spectrum(&[0.0, 1.0]);
        assert_eq!(s.levels(), &[-0.5, 0.5]);
        assert_eq!(s.shift(), 0.5);
        let sum: f64 = spectrum(&[0.3, 1.7, 2.9, 5.11]).levels().iter().sum();
        assert!(sum.abs() <= 1e-12);
    }

    #[test]
    fn duplicate_level_is_rejected() {
        let err = validate_spectrum(&[1.0, 1.0, 2.0], GAP_TOLERANCE).unwrap_err();
        assert_eq!(err, Error::NonIncreasingLevels { index: 0 });
    }

    #[test]
    fn decreasing_level_is_rejected() {
        let err = validate_spectrum(&[0.0, 2.0, 1.0], GAP_TOLERANCE).unwrap_err();
        assert_eq!(err, Error::NonIncreasingLevels { index: 1 });
    }

    #[test]
    fn single_level_is_rejected() {
        let err = validate_spectrum(&[1.0], GAP_TOLERANCE).unwrap_err();
        assert_eq!(err, Error::TooFewLevels { count: 1 });
    }

    #[test]
    fn classify_system_i() {
        let c = classify_gaps(&spectrum(&[-3.0, 0.0, 1.0, 2.0]), GAP_TOLERANCE);
        assert_eq!(c.kind, GapKind::SystemI);
        assert_eq!(c.gaps, vec![3.0, 1.0, 1.0]);
        assert_eq!(c.cumulative_gaps, vec![3.0, 4.0, 5.0]);
    }

    #[test]
    fn classify_system_ii() {
        let c = classify_gaps(&spectrum(&[-3.0, -1.0, 0.5, 3.5]), GAP_TOLERANCE);
        assert_eq!(c.kind, GapKind::SystemII);
        assert_eq!(c.gaps, vec![2.0, 1.5, 3.0]);
    }

    #[test]
    fn two_levels_classify_as_both() {
        let c = classify_gaps(&spectrum(&[-0.5, 0.5]), GAP_TOLERANCE);
        assert_eq!(c.kind, GapKind::Both);
    }

    #[test]
    fn three_levels_with_distinct_gaps_classify_as_both() {
        let c = classify_gaps(&spectrum(&[0.0, 1.0, 3.0]), GAP_TOLERANCE);
        assert_eq!(c.kind, GapKind::Both);
    }

    #[test]
    fn equal_gaps_classify_as_neither() {
        let c = classify_gaps(&spectrum(&[0.0, 1.0, 2.0]), GAP_TOLERANCE);
        assert_eq!(c.kind, GapKind::Neither);
    }

    #[test]
    fn classify_is_idempotent() {
        let s = spectrum(&[-3.0, 0.0, 1.0, 2.0]);
        let a = classify_gaps(&s, GAP_TOLERANCE);
        let b = classify_gaps(&s, GAP_TOLERANCE);
        assert_eq!(a, b);
    }

    #[test]
    fn transition_table_system_i() {
        let t = transition_table(&spectrum(&[-3.0, 0.0, 1.0, 2.0]), Protocol::SystemI).unwrap();
        assert_eq!(t.frequencies, vec![3.0, 4.0, 5.0]);
        assert_eq!(t.coupled_pairs, vec![(1, 2), (1, 3), (1, 4)]);
    }

    #[test]
    fn transition_table_system_ii() {
        let t = transition_table(&spectrum(&[-3.0, -1.0, 0.5, 3.5]), Protocol::SystemII).unwrap();
        assert_eq!(t.frequencies, vec![2.0, 1.5, 3.0]);
        assert_eq!(t.coupled_pairs, vec![(1, 2), (2, 3), (3, 4)]);
    }

    #[test]
    fn incompatible_protocol_is_rejected() {
        let err =
            transition_table(&spectrum(&[-3.0, 0.0, 1.0, 2.0]), Protocol::SystemII).unwrap_err();
        assert!(matches!(err, Error::IncompatibleProtocol { .. }));
    }

    #[test]
    fn table_frequencies_match_level_differences() {
        let s = spectrum(&[-3.0, -1.0, 0.5, 3.5]);
        for protocol in [Protocol::SystemII] {
            let t = transition_table(&s, protocol).unwrap();
            for m in 1..s.dim() {
                let (a, b) = t.coupled_zero_based(m);
                let diff = (s.level(b) - s.level(a)) / s.hbar();
                assert!((t.frequencies[m - 1] - diff).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn hbar_rescales_frequencies() {
        let s = spectrum(&[-3.0, 0.0, 1.0, 2.0]).with_hbar(2.0).unwrap();
        let t = transition_table(&s, Protocol::SystemI).unwrap();
        assert_eq!(t.frequencies, vec![1.5, 2.0, 2.5]);
    }

    #[test]
    fn invalid_hbar_is_rejected() {
        assert!(spectrum(&[0.0, 1.0]).with_hbar(0.0).is_err());
        assert!(spectrum(&[0.0, 1.0]).with_hbar(-1.0).is_err());
        assert!(spectrum(&[0.0, 1.0]).with_hbar(f64::NAN).is_err());
    }
}
