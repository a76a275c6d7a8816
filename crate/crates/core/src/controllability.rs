//! Dynamical Lie algebra closure and complete controllability.
//!
//! The drift and control Hamiltonians are turned into skew-Hermitian
//! traceless generators, the generated Lie algebra is closed under
//! commutators numerically, and the system is completely controllable
//! exactly when the closure dimension reaches dim su(N) = N² - 1.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectrum::{coupled_pair, transition_table, EnergySpectrum, Protocol};

/// Default residual-norm tolerance for rank decisions.
pub const RANK_TOLERANCE: f64 = 1e-9;

/// Skew-Hermitian traceless generators i H_0, i H_1, ..., with labels.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    generators: Vec<Array2<C64>>,
    labels: Vec<String>,
    matrix_dim: usize,
}

impl GeneratorSet {
    /// Wrap generators, checking shape, skew-Hermiticity, and tracelessness.
    pub fn new(generators: Vec<Array2<C64>>, labels: Vec<String>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidConfig("empty generator set".into()));
        }
        if labels.len() != generators.len() {
            return Err(Error::DimensionMismatch {
                expected: generators.len(),
                got: labels.len(),
            });
        }
        let matrix_dim = generators[0].dim().0;
        for (label, g) in labels.iter().zip(&generators) {
            let (rows, cols) = g.dim();
            if rows != matrix_dim || cols != matrix_dim {
                return Err(Error::DimensionMismatch {
                    expected: matrix_dim,
                    got: rows.max(cols),
                });
            }
            let scale = 1.0 + g.iter().map(|x| x.norm()).fold(0.0, f64::max);
            let skew_defect = (0..rows)
                .flat_map(|i| (0..cols).map(move |j| (i, j)))
                .map(|(i, j)| (g[[i, j]] + g[[j, i]].conj()).norm())
                .fold(0.0, f64::max);
            if skew_defect > 1e-12 * scale {
                return Err(Error::InvalidConfig(format!(
                    "generator {label} is not skew-Hermitian (defect {skew_defect:.3e})"
                )));
            }
            let trace: C64 = (0..rows).map(|i| g[[i, i]]).sum();
            if trace.norm() > 1e-12 * scale * rows as f64 {
                return Err(Error::InvalidConfig(format!(
                    "generator {label} is not traceless (trace {trace})"
                )));
            }
        }
        Ok(Self {
            generators,
            labels,
            matrix_dim,
        })
    }

    pub fn generators(&self) -> &[Array2<C64>] {
        &self.generators
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix_dim(&self) -> usize {
        self.matrix_dim
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

/// Outcome of a closure computation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosureReport {
    /// Real dimension of the generated Lie algebra.
    pub dimension: usize,
    /// Whether the closure reached su(N), i.e. dimension N² - 1.
    pub is_fully_controllable: bool,
    /// Commutator evaluations performed.
    pub iterations: usize,
    pub rank_tolerance: f64,
}

/// Build i H_0 plus every control generator i H_m of the protocol.
pub fn build_generators(spectrum: &EnergySpectrum, protocol: Protocol) -> Result<GeneratorSet> {
    let all: Vec<usize> = (1..spectrum.dim()).collect();
    build_restricted_generators(spectrum, protocol, &all)
}

/// Like [`build_generators`] but keeping only the listed control cycles
/// (1-based); i H_0 is always included.
pub fn build_restricted_generators(
    spectrum: &EnergySpectrum,
    protocol: Protocol,
    controls: &[usize],
) -> Result<GeneratorSet> {
    transition_table(spectrum, protocol)?;
    let n = spectrum.dim();
    let i = C64::new(0.0, 1.0);

    let mut drift = Array2::<C64>::zeros((n, n));
    for (k, &e) in spectrum.levels().iter().enumerate() {
        drift[[k, k]] = i * e;
    }
    let mut generators = vec![drift];
    let mut labels = vec!["iH0".to_string()];
    for &m in controls {
        if m < 1 || m > n - 1 {
            return Err(Error::IndexOutOfRange {
                index: m,
                limit: n - 1,
            });
        }
        let (a, b) = coupled_pair(protocol, m);
        let mut control = Array2::<C64>::zeros((n, n));
        control[[a, b]] = i;
        control[[b, a]] = i;
        generators.push(control);
        labels.push(format!("iH{m}"));
    }
    GeneratorSet::new(generators, labels)
}

fn inner(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    // Re tr(A†B), the real Frobenius inner product.
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

fn frobenius(a: &Array2<C64>) -> f64 {
    inner(a, a).sqrt()
}

fn commutator(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    a.dot(b) - b.dot(a)
}

/// Project `candidate` onto the orthogonal complement of `basis` (two passes
/// keep the residual clean) and append it when the residual is significant.
fn absorb(basis: &mut Vec<Array2<C64>>, candidate: &Array2<C64>, tolerance: f64) -> bool {
    let norm = frobenius(candidate);
    if norm <= tolerance {
        return false;
    }
    let mut residual = candidate.mapv(|x| x / norm);
    for _ in 0..2 {
        for b in basis.iter() {
            let overlap = inner(b, &residual);
            residual = residual - b.mapv(|x| x * overlap);
        }
    }
    let residual_norm = frobenius(&residual);
    if residual_norm > tolerance {
        basis.push(residual.mapv(|x| x / residual_norm));
        true
    } else {
        false
    }
}

/// Close the generator set under commutators and report the span dimension.
///
/// Matrices are treated as real vectors under Re tr(A†B); every pair of
/// basis elements is commuted exactly once, with new directions appended as
/// they appear, so termination means one full sweep added nothing. The
/// number of commutator evaluations is capped at N⁴.
pub fn lie_closure_dimension(set: &GeneratorSet, rank_tolerance: f64) -> Result<ClosureReport> {
    let n = set.matrix_dim();
    let budget = n.pow(4);
    let mut basis: Vec<Array2<C64>> = Vec::new();
    for g in set.generators() {
        absorb(&mut basis, g, rank_tolerance);
    }
    let mut evaluations = 0usize;
    let mut j = 1;
    while j < basis.len() {
        for i in 0..j {
            evaluations += 1;
            if evaluations > budget {
                return Err(Error::ClosureBudgetExceeded { budget });
            }
            let bracket = commutator(&basis[i], &basis[j]);
            absorb(&mut basis, &bracket, rank_tolerance);
        }
        j += 1;
    }
    let dimension = basis.len();
    Ok(ClosureReport {
        dimension,
        is_fully_controllable: dimension == n * n - 1,
        iterations: evaluations,
        rank_tolerance,
    })
}

/// Generators plus closure in one call, at the default rank tolerance.
pub fn check_controllability(
    spectrum: &EnergySpectrum,
    protocol: Protocol,
) -> Result<ClosureReport> {
    let set = build_generators(spectrum, protocol)?;
    lie_closure_dimension(&set, RANK_TOLERANCE)
}

/// Orthonormal basis of the closure span, for membership checks.
pub fn lie_closure_basis(set: &GeneratorSet, rank_tolerance: f64) -> Result<Vec<Array2<C64>>> {
    let n = set.matrix_dim();
    let budget = n.pow(4);
    let mut basis: Vec<Array2<C64>> = Vec::new();
    for g in set.generators() {
        absorb(&mut basis, g, rank_tolerance);
    }
    let mut evaluations = 0usize;
    let mut j = 1;
    while j < basis.len() {
        for i in 0..j {
            evaluations += 1;
            if evaluations > budget {
                return Err(Error::ClosureBudgetExceeded { budget });
            }
            let bracket = commutator(&basis[i], &basis[j]);
            absorb(&mut basis, &bracket, rank_tolerance);
        }
        j += 1;
    }
    Ok(basis)
}

/// Residual norm of (normalized) `candidate` outside the span of `basis`.
pub fn span_residual(basis: &[Array2<C64>], candidate: &Array2<C64>) -> f64 {
    let norm = frobenius(candidate);
    if norm == 0.0 {
        return 0.0;
    }
    let mut residual = candidate.mapv(|x| x / norm);
    for _ in 0..2 {
        for b in basis {
            let overlap = inner(b, &residual);
            residual = residual - b.mapv(|x| x * overlap);
        }
    }
    frobenius(&residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::validate_spectrum;

    fn spectrum(levels: &[f64]) -> EnergySpectrum {
        validate_spectrum(levels, 1e-9).unwrap()
    }

    /// Independent closure oracle: repeated full pairwise sweeps with the
    /// span dimension recomputed from scratch by Gaussian elimination on
    /// vectorized matrices.
    fn brute_force_closure_dimension(generators: &[Array2<C64>]) -> usize {
        fn vectorize(m: &Array2<C64>) -> Vec<f64> {
            let norm = m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            m.iter().flat_map(|x| [x.re / norm, x.im / norm]).collect()
        }

        fn real_rank(mut rows: Vec<Vec<f64>>) -> usize {
            let cols = rows[0].len();
            let mut rank = 0;
            for col in 0..cols {
                let pivot = (rank..rows.len())
                    .max_by(|&a, &b| rows[a][col].abs().total_cmp(&rows[b][col].abs()));
                let Some(pivot) = pivot else { break };
                if rows[pivot][col].abs() <= 1e-9 {
                    continue;
                }
                rows.swap(rank, pivot);
                let lead = rows[rank].clone();
                for (r, row) in rows.iter_mut().enumerate() {
                    if r != rank {
                        let factor = row[col] / lead[col];
                        if factor != 0.0 {
                            for (value, pivot_value) in row[col..].iter_mut().zip(&lead[col..]) {
                                *value -= factor * pivot_value;
                            }
                        }
                    }
                }
                rank += 1;
                if rank == rows.len() {
                    break;
                }
            }
            rank
        }

        let rank_of =
            |elements: &[Array2<C64>]| real_rank(elements.iter().map(vectorize).collect());

        let mut elements = generators.to_vec();
        for _sweep in 0..16 {
            let mut added = false;
            let frozen = elements.len();
            for i in 0..frozen {
                for j in i + 1..frozen {
                    let bracket = commutator(&elements[i], &elements[j]);
                    if frobenius(&bracket) <= 1e-12 {
                        continue;
                    }
                    let before = rank_of(&elements);
                    elements.push(bracket);
                    if rank_of(&elements) > before {
                        added = true;
                    } else {
                        elements.pop();
                    }
                }
            }
            if !added {
                break;
            }
        }
        rank_of(&elements)
    }

    #[test]
    fn two_level_generators() {
        let s = spectrum(&[-0.5, 0.5]);
        for protocol in [Protocol::SystemI, Protocol::SystemII] {
            let set = build_generators(&s, protocol).unwrap();
            assert_eq!(set.len(), 2);
            assert_eq!(set.labels(), &["iH0".to_string(), "iH1".to_string()]);
            let control = &set.generators()[1];
            assert_eq!(control[[0, 1]], C64::new(0.0, 1.0));
            assert_eq!(control[[1, 0]], C64::new(0.0, 1.0));
        }
    }

    #[test]
    fn system_i_couples_to_ground() {
        let s = spectrum(&[-3.0, 0.0, 1.0, 2.0]);
        let set = build_generators(&s, Protocol::SystemI).unwrap();
        let g2 = &set.generators()[2];
        assert_eq!(g2[[0, 2]], C64::new(0.0, 1.0));
        assert_eq!(g2[[2, 0]], C64::new(0.0, 1.0));
    }

    #[test]
    fn system_ii_couples_adjacent_levels() {
        let s = spectrum(&[-3.0, -1.0, 0.5, 3.5]);
        let set = build_generators(&s, Protocol::SystemII).unwrap();
        let g2 = &set.generators()[2];
        assert_eq!(g2[[1, 2]], C64::new(0.0, 1.0));
        assert_eq!(g2[[2, 1]], C64::new(0.0, 1.0));
    }

    #[test]
    fn two_level_closure_is_su2() {
        let s = spectrum(&[-0.5, 0.5]);
        let report = check_controllability(&s, Protocol::SystemI).unwrap();
        assert_eq!(report.dimension, 3);
        assert!(report.is_fully_controllable);
    }

    #[test]
    fn generic_spectra_are_fully_controllable() {
        let s = spectrum(&[-3.0, 0.0, 1.0, 2.0]);
        let report = check_controllability(&s, Protocol::SystemI).unwrap();
        assert_eq!(report.dimension, 15);
        assert!(report.is_fully_controllable);

        let s = spectrum(&[-3.0, -1.0, 0.5, 3.5]);
        let report = check_controllability(&s, Protocol::SystemII).unwrap();
        assert_eq!(report.dimension, 15);
        assert!(report.is_fully_controllable);
    }

    #[test]
    fn restricted_three_level_set_closes_at_dimension_four() {
        let s = spectrum(&[-3.0, -1.0, 4.0]);
        let set = build_restricted_generators(&s, Protocol::SystemII, &[1]).unwrap();
        let report = lie_closure_dimension(&set, RANK_TOLERANCE).unwrap();
        assert_eq!(report.dimension, 4);
        assert!(!report.is_fully_controllable);
    }

    #[test]
    fn closure_dimension_ignores_generator_order_and_scale() {
        let s = spectrum(&[-3.0, 0.0, 1.0, 2.0]);
        let set = build_generators(&s, Protocol::SystemI).unwrap();
        let baseline = lie_closure_dimension(&set, RANK_TOLERANCE).unwrap();

        let mut reordered = set.generators().to_vec();
        reordered.reverse();
        reordered[0] = reordered[0].mapv(|x| x * 3.7);
        let labels = (0..reordered.len()).map(|k| format!("g{k}")).collect();
        let permuted = GeneratorSet::new(reordered, labels).unwrap();
        let report = lie_closure_dimension(&permuted, RANK_TOLERANCE).unwrap();
        assert_eq!(report.dimension, baseline.dimension);
    }

    #[test]
    fn closure_basis_stays_skew_hermitian_and_traceless() {
        let s = spectrum(&[-3.0, -1.0, 0.5, 3.5]);
        let set = build_generators(&s, Protocol::SystemII).unwrap();
        let basis = lie_closure_basis(&set, RANK_TOLERANCE).unwrap();
        for b in &basis {
            let n = b.dim().0;
            let skew = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| (b[[i, j]] + b[[j, i]].conj()).norm())
                .fold(0.0, f64::max);
            assert!(skew <= 1e-10);
            let trace: C64 = (0..n).map(|i| b[[i, i]]).sum();
            assert!(trace.norm() <= 1e-10);
        }
    }

    #[test]
    fn chevalley_elements_lie_in_the_closure() {
        // ix_n, iy_n = μ_n⁻¹[iH_0, ix_n], ih_n = -[ix_n, iy_n]/2.
        let s = spectrum(&[-3.0, 0.0, 1.0, 2.0]);
        let n = s.dim();
        let set = build_generators(&s, Protocol::SystemI).unwrap();
        let basis = lie_closure_basis(&set, RANK_TOLERANCE).unwrap();
        let drift = &set.generators()[0];
        let i = C64::new(0.0, 1.0);
        for k in 0..n - 1 {
            let mut ix = Array2::<C64>::zeros((n, n));
            ix[[k, k + 1]] = i;
            ix[[k + 1, k]] = i;
            let mu = s.level(k + 1) - s.level(k);
            let iy = commutator(drift, &ix).mapv(|x| x / mu);
            let ih = commutator(&ix, &iy).mapv(|x| x * -0.5);
            for (label, element) in [("ix", &ix), ("iy", &iy), ("ih", &ih)] {
                let residual = span_residual(&basis, element);
                assert!(residual <= 1e-9, "{label}_{} residual {residual}", k + 1);
            }
        }
    }

    #[test]
    fn closure_agrees_with_brute_force_oracle() {
        let cases: Vec<(EnergySpectrum, Protocol, Vec<usize>)> = vec![
            (spectrum(&[-0.5, 0.5]), Protocol::SystemI, vec![1]),
            (spectrum(&[-3.0, -1.0, 4.0]), Protocol::SystemII, vec![1, 2]),
            (spectrum(&[-3.0, -1.0, 4.0]), Protocol::SystemII, vec![1]),
            (
                spectrum(&[-3.0, 0.0, 1.0, 2.0]),
                Protocol::SystemI,
                vec![1, 2, 3],
            ),
            (
                spectrum(&[-3.0, 0.0, 1.0, 2.0]),
                Protocol::SystemI,
                vec![1, 2],
            ),
        ];
        for (s, protocol, controls) in &cases {
            let set = build_restricted_generators(s, *protocol, controls).unwrap();
            let report = lie_closure_dimension(&set, RANK_TOLERANCE).unwrap();
            let expected = brute_force_closure_dimension(set.generators());
            assert_eq!(
                report.dimension, expected,
                "protocol {protocol:?}, controls {controls:?}"
            );
        }
    }

    #[test]
    fn absurd_tolerance_trips_the_budget() {
        let s = spectrum(&[-3.0, 0.0, 1.0, 2.0]);
        let set = build_generators(&s, Protocol::SystemI).unwrap();
        assert!(matches!(
            lie_closure_dimension(&set, 1e-300),
            Err(Error::ClosureBudgetExceeded { .. })
        ));
    }

    #[test]
    fn restrict_rejects_out_of_range_cycles() {
        let s = spectrum(&[-3.0, 0.0, 1.0, 2.0]);
        assert!(matches!(
            build_restricted_generators(&s, Protocol::SystemI, &[4]),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            build_restricted_generators(&s, Protocol::SystemI, &[0]),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn non_skew_generator_is_rejected() {
        let mut g = Array2::<C64>::zeros((2, 2));
        g[[0, 1]] = C64::new(1.0, 0.0);
        assert!(GeneratorSet::new(vec![g], vec!["bad".into()]).is_err());
    }
}
