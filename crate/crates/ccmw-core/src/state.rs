//! Battery states in the fixed coherence basis, the l1-coherence functional,
//! and energy expectation values.
//!
//! The coherence basis is the computational basis of the matrix
//! representation; every coherence value below is the sum of absolute values
//! of off-diagonal density-matrix entries in that basis.

use num_complex::Complex64;

use crate::error::{CcmwError, Result};
use crate::linalg::{eigendecompose, ComplexMatrix, HermitianOperator, UnitaryMatrix};

const NORM_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues above this may be clamped to zero; anything more negative is
/// rejected as genuinely non-physical.
const PSD_TOL: f64 = -1e-10;

/// A pure state |psi> with unit norm (within 1e-10).
#[derive(Debug, Clone)]
pub struct PureState {
    dim: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(CcmwError::NotNormalized {
                norm: norm_sq.sqrt(),
            });
        }
        Ok(Self {
            dim: amplitudes.len(),
            amplitudes,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// |psi><psi| as a density matrix.
    pub fn density(&self) -> DensityMatrix {
        let d = self.dim;
        let mut m = ComplexMatrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                m.set(i, j, self.amplitudes[i] * self.amplitudes[j].conj());
            }
        }
        let op = HermitianOperator::new(m).expect("outer product is Hermitian");
        DensityMatrix::new(op).expect("pure-state projector is a valid density matrix")
    }
}

/// Builds a pure state from nonnegative moduli and phases. The phase of the
/// first nonzero amplitude is rotated to zero (global-phase gauge), which
/// removes a flat direction from downstream optimizations.
pub fn pure_from_polar(moduli: &[f64], phases: &[f64]) -> Result<PureState> {
    if moduli.len() != phases.len() {
        return Err(CcmwError::ParameterLengthMismatch {
            expected: moduli.len(),
            actual: phases.len(),
        });
    }
    if moduli.iter().any(|m| *m < 0.0 || !m.is_finite()) {
        return Err(CcmwError::NonFiniteEntries);
    }
    let norm_sq: f64 = moduli.iter().map(|m| m * m).sum();
    if (norm_sq - 1.0).abs() > 1e-8 {
        return Err(CcmwError::NotNormalized {
            norm: norm_sq.sqrt(),
        });
    }
    let gauge = moduli
        .iter()
        .position(|m| *m > 0.0)
        .map(|k| phases[k])
        .unwrap_or(0.0);
    let amplitudes = moduli
        .iter()
        .zip(phases)
        .map(|(m, phi)| Complex64::from_polar(*m, phi - gauge))
        .collect();
    // Renormalize exactly so the PureState invariant holds even at the edge
    // of the 1e-8 input tolerance.
    let mut state = PureState {
        dim: moduli.len(),
        amplitudes,
    };
    let norm = norm_sq.sqrt();
    for a in &mut state.amplitudes {
        *a /= norm;
    }
    Ok(state)
}

/// A density matrix: Hermitian, unit trace, positive semidefinite.
///
/// Optimizer-constructed states accumulate rounding error, so eigenvalues in
/// (-1e-10, 0) are clamped to zero and the spectrum renormalized; each clamp
/// is logged at debug level.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let trace = op.matrix().trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(CcmwError::TraceNotOne { trace });
        }
        let (values, vectors) = eigendecompose(&op);
        let min_eig = values[0];
        if min_eig < PSD_TOL {
            return Err(CcmwError::NotPositiveSemidefinite {
                min_eigenvalue: min_eig,
            });
        }
        if min_eig < 0.0 {
            log::debug!(
                "clamping negative density-matrix eigenvalue {min_eig:.3e} to zero"
            );
            let clamped: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
            let total: f64 = clamped.iter().sum();
            let weights: Vec<f64> = clamped.iter().map(|v| v / total).collect();
            let rebuilt = rebuild_from_spectrum(&weights, &vectors);
            return Ok(Self { op: rebuilt });
        }
        Ok(Self { op })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    #[inline]
    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        self.op.matrix()
    }

    /// Diagonal populations in the coherence basis.
    pub fn populations(&self) -> Vec<f64> {
        self.op.diagonal()
    }
}

fn rebuild_from_spectrum(weights: &[f64], vectors: &UnitaryMatrix) -> HermitianOperator {
    let d = weights.len();
    let mut lambda = ComplexMatrix::zeros(d);
    for (i, &w) in weights.iter().enumerate() {
        lambda.set(i, i, Complex64::new(w, 0.0));
    }
    let m = vectors.conjugate(&lambda);
    HermitianOperator::new(m).expect("conjugation preserves Hermiticity")
}

/// An l1-coherence value together with its dimension-dependent admissible
/// range [0, d-1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceValue {
    value: f64,
    dim: usize,
}

impl CoherenceValue {
    pub fn new(value: f64, dim: usize) -> Result<Self> {
        let max = (dim - 1) as f64;
        // Numerically constructed states can overshoot the exact bound by
        // rounding; absorb that, reject anything real.
        if !(-1e-9..=max + 1e-9).contains(&value) {
            return Err(CcmwError::CoherenceOutOfRange { value, max });
        }
        Ok(Self {
            value: value.clamp(0.0, max),
            dim,
        })
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.value
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Scaled coherence C / (d - 1) in [0, 1].
    pub fn scaled(&self) -> f64 {
        self.value / (self.dim - 1) as f64
    }
}

/// Sum of |rho_ij| over all off-diagonal entries (both orders counted).
pub fn l1_coherence(state: &DensityMatrix) -> CoherenceValue {
    let c = l1_coherence_raw(state.dim(), state.matrix().entries());
    CoherenceValue::new(c, state.dim()).expect("valid states stay in the admissible range")
}

/// Raw kernel for the coherence sum; shared with the optimizer hot path.
#[inline]
pub(crate) fn l1_coherence_raw(d: usize, entries: &[Complex64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                acc += entries[i * d + j].norm();
            }
        }
    }
    acc
}

/// Tr[rho H], the mean energy of the state under `h`.
pub fn energy(state: &DensityMatrix, h: &HermitianOperator) -> Result<f64> {
    if state.dim() != h.dim() {
        return Err(CcmwError::DimensionMismatch {
            left: state.dim(),
            right: h.dim(),
        });
    }
    let d = state.dim();
    let rho = state.matrix().entries();
    let ham = h.matrix().entries();
    let mut re = 0.0;
    let mut im = 0.0;
    for i in 0..d {
        for j in 0..d {
            let z = rho[i * d + j] * ham[j * d + i];
            re += z.re;
            im += z.im;
        }
    }
    debug_assert!(im.abs() < 1e-10, "energy has imaginary residual {im:.3e}");
    Ok(re)
}

/// Normalizes `weights` to unit sum and conjugates the diagonal state by `u`.
pub fn density_from_spectrum(weights: &[f64], u: &UnitaryMatrix) -> Result<DensityMatrix> {
    if weights.len() != u.dim() {
        return Err(CcmwError::DimensionMismatch {
            left: weights.len(),
            right: u.dim(),
        });
    }
    if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
        return Err(CcmwError::InvalidSpectralWeights);
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(CcmwError::InvalidSpectralWeights);
    }
    let normalized: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let op = rebuild_from_spectrum(&normalized, u);
    DensityMatrix::new(op)
}

/// Tr[rho^2], in [1/d, 1].
pub fn purity(state: &DensityMatrix) -> f64 {
    state
        .matrix()
        .entries()
        .iter()
        .map(|z| z.norm_sqr())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gellmann_generators, unitary_from_parameters};
    use proptest::prelude::*;
    use rand::prelude::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn basis_state(dim: usize, index: usize) -> PureState {
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        PureState::new(amps).unwrap()
    }

    fn random_density(d: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
        let gen = gellmann_generators(d).unwrap();
        let theta: Vec<f64> = (0..d * d).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        let u = unitary_from_parameters(&gen, &theta).unwrap();
        let weights: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..1.0)).collect();
        density_from_spectrum(&weights, &u).unwrap()
    }

    #[test]
    fn coherence_of_basis_state_is_zero() {
        let rho = basis_state(3, 0).density();
        assert_eq!(l1_coherence(&rho).value(), 0.0);
    }

    #[test]
    fn coherence_of_fixed_offdiagonal_qubit() {
        // Populations 1/2 each, off-diagonals (C/2) e^{-+ i theta} with C = 0.6.
        let c = 0.6;
        let theta = 0.9;
        let off = Complex64::from_polar(c / 2.0, -theta);
        let op = HermitianOperator::from_entries(
            2,
            vec![
                Complex64::new(0.5, 0.0),
                off,
                off.conj(),
                Complex64::new(0.5, 0.0),
            ],
        )
        .unwrap();
        let rho = DensityMatrix::new(op).unwrap();
        assert!((l1_coherence(&rho).value() - 0.6).abs() < 1e-14);
    }

    #[test]
    fn coherence_of_maximally_coherent_qutrit() {
        let amp = Complex64::new(1.0 / 3.0_f64.sqrt(), 0.0);
        let rho = PureState::new(vec![amp; 3]).unwrap().density();
        assert!((l1_coherence(&rho).value() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn energy_examples() {
        let h = HermitianOperator::from_diagonal(&[-1.0, 0.0, 1.0]);
        let rho = basis_state(3, 0).density();
        assert!((energy(&rho, &h).unwrap() + 1.0).abs() < 1e-14);

        // Maximally mixed qutrit against a traceless Hamiltonian.
        let third = Complex64::new(1.0 / 3.0, 0.0);
        let mut m = ComplexMatrix::zeros(3);
        for i in 0..3 {
            m.set(i, i, third);
        }
        let mixed = DensityMatrix::new(HermitianOperator::new(m).unwrap()).unwrap();
        assert!(energy(&mixed, &h).unwrap().abs() < 1e-14);

        // |+> against sigma_x.
        let plus = pure_from_polar(&[1.0 / 2.0_f64.sqrt(), 1.0 / 2.0_f64.sqrt()], &[0.0, 0.0])
            .unwrap()
            .density();
        let sx = HermitianOperator::from_entries(
            2,
            vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        assert!((energy(&plus, &sx).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn energy_dimension_mismatch() {
        let h = HermitianOperator::from_diagonal(&[-1.0, 1.0]);
        let rho = basis_state(3, 0).density();
        assert!(energy(&rho, &h).is_err());
    }

    #[test]
    fn polar_construction() {
        let s = pure_from_polar(&[1.0, 0.0], &[0.4, 1.0]).unwrap();
        assert!((s.amplitudes()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-14);

        let inv = 1.0 / 2.0_f64.sqrt();
        let s = pure_from_polar(&[inv, inv], &[0.0, PI]).unwrap();
        assert!((s.amplitudes()[1] + Complex64::new(inv, 0.0)).norm() < 1e-14);

        assert!(pure_from_polar(&[0.9, 0.1], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn polar_gauge_uses_first_nonzero() {
        let s = pure_from_polar(&[0.0, 0.6, 0.8], &[1.0, 0.5, 1.1]).unwrap();
        assert!(s.amplitudes()[1].im.abs() < 1e-14);
        assert!(s.amplitudes()[1].re > 0.0);
    }

    #[test]
    fn polar_fixed_coherence_qutrit() {
        // x = (2 sqrt2 / 3, sqrt2/6, sqrt2/6) satisfies sum x = sqrt2, sum x^2 = 1,
        // so the coherence is (sum x)^2 - 1 = 1.
        let x = [
            2.0 * 2.0_f64.sqrt() / 3.0,
            2.0_f64.sqrt() / 6.0,
            2.0_f64.sqrt() / 6.0,
        ];
        let rho = pure_from_polar(&x, &[0.0, 0.0, 0.0]).unwrap().density();
        assert!((l1_coherence(&rho).value() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn spectrum_construction() {
        let u = UnitaryMatrix::identity(3);
        let rho = density_from_spectrum(&[1.0, 0.0, 0.0], &u).unwrap();
        assert!((rho.matrix().get(0, 0).re - 1.0).abs() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let gen = gellmann_generators(3).unwrap();
        let theta: Vec<f64> = (0..9).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        let u = unitary_from_parameters(&gen, &theta).unwrap();

        // Equal weights conjugate to the maximally mixed state for any U.
        let mixed = density_from_spectrum(&[1.0, 1.0, 1.0], &u).unwrap();
        let mut expected = ComplexMatrix::zeros(3);
        for i in 0..3 {
            expected.set(i, i, Complex64::new(1.0 / 3.0, 0.0));
        }
        assert!(mixed.matrix().max_abs_diff(&expected) < 1e-12);

        // Weights (2,1,1) give spectrum (0.5, 0.25, 0.25).
        let rho = density_from_spectrum(&[2.0, 1.0, 1.0], &u).unwrap();
        let (values, _) = eigendecompose(rho.operator());
        assert!((values[0] - 0.25).abs() < 1e-10);
        assert!((values[1] - 0.25).abs() < 1e-10);
        assert!((values[2] - 0.5).abs() < 1e-10);
        assert!((purity(&rho) - 0.375).abs() < 1e-10);

        assert!(density_from_spectrum(&[0.0, 0.0, 0.0], &UnitaryMatrix::identity(3)).is_err());
    }

    #[test]
    fn purity_bounds() {
        assert!((purity(&basis_state(4, 2).density()) - 1.0).abs() < 1e-12);
        let mut m = ComplexMatrix::zeros(3);
        for i in 0..3 {
            m.set(i, i, Complex64::new(1.0 / 3.0, 0.0));
        }
        let mixed = DensityMatrix::new(HermitianOperator::new(m).unwrap()).unwrap();
        assert!((purity(&mixed) - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn coherence_invariant_under_diagonal_phases_and_permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for d in 2..=5 {
            for _ in 0..50 {
                let rho = random_density(d, &mut rng);
                let c0 = l1_coherence(&rho).value();

                // Diagonal phase unitary.
                let mut dphase = ComplexMatrix::zeros(d);
                for i in 0..d {
                    dphase.set(i, i, Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI)));
                }
                let dphase = UnitaryMatrix::new(dphase).unwrap();
                let rotated =
                    DensityMatrix::new(HermitianOperator::new(dphase.conjugate(rho.matrix())).unwrap())
                        .unwrap();
                assert!((l1_coherence(&rotated).value() - c0).abs() < 1e-10);

                // Basis permutation.
                let mut perm: Vec<usize> = (0..d).collect();
                perm.shuffle(&mut rng);
                let mut pm = ComplexMatrix::zeros(d);
                for (i, &p) in perm.iter().enumerate() {
                    pm.set(p, i, Complex64::new(1.0, 0.0));
                }
                let pm = UnitaryMatrix::new(pm).unwrap();
                let permuted =
                    DensityMatrix::new(HermitianOperator::new(pm.conjugate(rho.matrix())).unwrap())
                        .unwrap();
                assert!((l1_coherence(&permuted).value() - c0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn energy_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let h = HermitianOperator::from_diagonal(&[-1.0, 0.2, 1.0]);
        for _ in 0..100 {
            let r1 = random_density(3, &mut rng);
            let r2 = random_density(3, &mut rng);
            let a: f64 = rng.gen_range(0.0..1.0);
            let blend = r1
                .matrix()
                .scale(Complex64::new(a, 0.0))
                .add(&r2.matrix().scale(Complex64::new(1.0 - a, 0.0)));
            let blended = DensityMatrix::new(HermitianOperator::new(blend).unwrap()).unwrap();
            let lhs = energy(&blended, &h).unwrap();
            let rhs = a * energy(&r1, &h).unwrap() + (1.0 - a) * energy(&r2, &h).unwrap();
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    proptest! {
        /// For pure states with nonnegative moduli, C = (sum x_i)^2 - 1.
        #[test]
        fn pure_coherence_matches_closed_form(raw in prop::collection::vec(0.01f64..1.0, 2..6)) {
            let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
            let moduli: Vec<f64> = raw.iter().map(|x| x / norm).collect();
            let phases = vec![0.0; moduli.len()];
            let rho = pure_from_polar(&moduli, &phases).unwrap().density();
            let expected = moduli.iter().sum::<f64>().powi(2) - 1.0;
            prop_assert!((l1_coherence(&rho).value() - expected).abs() < 1e-10);
        }

        /// Phases never change the coherence of a polar-constructed pure state.
        #[test]
        fn pure_coherence_ignores_phases(
            raw in prop::collection::vec(0.01f64..1.0, 3),
            phases in prop::collection::vec(0.0f64..(2.0 * PI), 3),
        ) {
            let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
            let moduli: Vec<f64> = raw.iter().map(|x| x / norm).collect();
            let with_phases = pure_from_polar(&moduli, &phases).unwrap().density();
            let without = pure_from_polar(&moduli, &[0.0; 3]).unwrap().density();
            prop_assert!(
                (l1_coherence(&with_phases).value() - l1_coherence(&without).value()).abs() < 1e-10
            );
        }
    }
}
