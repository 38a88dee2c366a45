//! Generalized Gell-Mann generator bases and parameterized unitaries.

use num_complex::Complex64;

use super::{eigen::jacobi_in_place, ComplexMatrix, HermitianOperator, UnitaryMatrix, MAX_DIM};
use crate::error::{CcmwError, Result};

/// The identity plus the d^2 - 1 generalized Gell-Mann matrices for one
/// dimension, in a fixed documented order (see [`gellmann_generators`]).
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    dim: usize,
    generators: Vec<HermitianOperator>,
    /// Sparse form of each generator: (row-major index, value) pairs.
    /// Used to assemble exponents without touching full matrices.
    sparse: Vec<Vec<(usize, Complex64)>>,
}

impl GeneratorSet {
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.generators.len()
    }

    #[inline]
    pub fn generators(&self) -> &[HermitianOperator] {
        &self.generators
    }

    /// Accumulates `sum_j theta_j T_j` into `out` (row-major, length dim^2),
    /// overwriting it. No allocation.
    pub(crate) fn assemble_exponent(&self, theta: &[f64], out: &mut [Complex64]) {
        let n = self.dim * self.dim;
        out[..n].fill(Complex64::new(0.0, 0.0));
        for (coeff, entries) in theta.iter().zip(&self.sparse) {
            if *coeff == 0.0 {
                continue;
            }
            for &(idx, value) in entries {
                out[idx] += value * *coeff;
            }
        }
    }
}

/// Generator basis for dimension `dim`: T_0 = I, then the symmetric pairs
/// |i><j| + |j><i| for i < j in lexicographic order, then the antisymmetric
/// pairs -i(|i><j| - |j><i|) in the same order, then the diagonal ladder
/// sqrt(2/(l(l+1))) (sum_{k<l} |k><k| - l|l><l|) for l = 1..dim-1.
///
/// For dim = 2 this is exactly {I, sigma_x, sigma_y, sigma_z}.
pub fn gellmann_generators(dim: usize) -> Result<GeneratorSet> {
    if !(2..=MAX_DIM).contains(&dim) {
        return Err(CcmwError::DimensionOutOfRange(dim));
    }
    let mut generators = Vec::with_capacity(dim * dim);
    generators.push(ComplexMatrix::identity(dim));

    for i in 0..dim {
        for j in (i + 1)..dim {
            let mut m = ComplexMatrix::zeros(dim);
            m.set(i, j, Complex64::new(1.0, 0.0));
            m.set(j, i, Complex64::new(1.0, 0.0));
            generators.push(m);
        }
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            let mut m = ComplexMatrix::zeros(dim);
            m.set(i, j, Complex64::new(0.0, -1.0));
            m.set(j, i, Complex64::new(0.0, 1.0));
            generators.push(m);
        }
    }
    for l in 1..dim {
        let norm = (2.0 / (l as f64 * (l as f64 + 1.0))).sqrt();
        let mut m = ComplexMatrix::zeros(dim);
        for k in 0..l {
            m.set(k, k, Complex64::new(norm, 0.0));
        }
        m.set(l, l, Complex64::new(-(l as f64) * norm, 0.0));
        generators.push(m);
    }

    let sparse = generators
        .iter()
        .map(|m| {
            m.entries()
                .iter()
                .enumerate()
                .filter(|(_, z)| z.norm_sqr() > 0.0)
                .map(|(idx, z)| (idx, *z))
                .collect()
        })
        .collect();
    let generators = generators
        .into_iter()
        .map(|m| HermitianOperator::new(m).expect("generators are Hermitian by construction"))
        .collect();
    Ok(GeneratorSet {
        dim,
        generators,
        sparse,
    })
}

/// exp(i sum_j theta_j T_j), computed via eigendecomposition of the Hermitian
/// exponent. `theta` must have length dim^2.
pub fn unitary_from_parameters(gen: &GeneratorSet, theta: &[f64]) -> Result<UnitaryMatrix> {
    let d = gen.dim();
    if theta.len() != d * d {
        return Err(CcmwError::ParameterLengthMismatch {
            expected: d * d,
            actual: theta.len(),
        });
    }
    if !theta.iter().all(|t| t.is_finite()) {
        return Err(CcmwError::NonFiniteEntries);
    }
    let mut exponent = vec![Complex64::new(0.0, 0.0); d * d];
    gen.assemble_exponent(theta, &mut exponent);
    let mut out = vec![Complex64::new(0.0, 0.0); d * d];
    let mut vecs = vec![Complex64::new(0.0, 0.0); d * d];
    let mut values = vec![0.0; d];
    let mut scratch = vec![Complex64::new(0.0, 0.0); d * d];
    exp_i_hermitian(d, &mut exponent, &mut vecs, &mut values, &mut scratch, &mut out);
    UnitaryMatrix::new(ComplexMatrix::from_entries(d, out)?)
}

/// Computes U = exp(i M) for Hermitian M held in `work` (destroyed).
///
/// `vecs`, `values`, `scratch`, `out` are caller-provided buffers of size
/// d*d, d, d*d, d*d. Shared by the public API and the optimizer hot path.
/// The 2x2 case uses the Pauli closed form; larger dimensions go through
/// the Jacobi eigendecomposition.
pub(crate) fn exp_i_hermitian(
    d: usize,
    work: &mut [Complex64],
    vecs: &mut [Complex64],
    values: &mut [f64],
    scratch: &mut [Complex64],
    out: &mut [Complex64],
) {
    if d == 2 {
        exp_i_hermitian_2x2(work, out);
        return;
    }
    vecs[..d * d].fill(Complex64::new(0.0, 0.0));
    for i in 0..d {
        vecs[i * d + i] = Complex64::new(1.0, 0.0);
    }
    jacobi_in_place(d, work, vecs, values);
    // scratch = V * diag(e^{i lambda})
    for i in 0..d {
        for j in 0..d {
            let phase = Complex64::new(0.0, values[j]).exp();
            scratch[i * d + j] = vecs[i * d + j] * phase;
        }
    }
    // out = scratch * V†
    for i in 0..d {
        for j in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..d {
                acc += scratch[i * d + k] * vecs[j * d + k].conj();
            }
            out[i * d + j] = acc;
        }
    }
}

/// exp(iM) for 2x2 Hermitian M = a I + b.sigma:
/// e^{ia} (cos|b| I + i sin|b| (b/|b|).sigma).
fn exp_i_hermitian_2x2(m: &[Complex64], out: &mut [Complex64]) {
    let a = (m[0].re + m[3].re) / 2.0;
    let b3 = (m[0].re - m[3].re) / 2.0;
    let b1 = m[1].re;
    let b2 = -m[1].im;
    let r = (b1 * b1 + b2 * b2 + b3 * b3).sqrt();
    let (sin_a, cos_a) = a.sin_cos();
    let phase = Complex64::new(cos_a, sin_a);
    if r == 0.0 {
        out[0] = phase;
        out[1] = Complex64::new(0.0, 0.0);
        out[2] = Complex64::new(0.0, 0.0);
        out[3] = phase;
        return;
    }
    let (sin_r, cos_r) = r.sin_cos();
    let (n1, n2, n3) = (b1 / r, b2 / r, b3 / r);
    // cos r I + i sin r (n . sigma)
    out[0] = phase * Complex64::new(cos_r, sin_r * n3);
    out[1] = phase * Complex64::new(sin_r * n2, sin_r * n1);
    out[2] = phase * Complex64::new(-sin_r * n2, sin_r * n1);
    out[3] = phase * Complex64::new(cos_r, -sin_r * n3);
}
