//! Dense complex linear algebra for small dimensions (d <= 8).
//!
//! Everything here is sized for qudit batteries: matrices are row-major
//! `Vec<Complex64>` with no blocking or sparsity, eigendecomposition is a
//! cyclic complex Jacobi iteration, and unitaries are synthesized by
//! exponentiating Hermitian generator combinations. All values are immutable
//! after construction and every operation is a pure function.

mod eigen;
mod generators;

pub use eigen::eigendecompose;
pub(crate) use generators::exp_i_hermitian;
pub use generators::{gellmann_generators, unitary_from_parameters, GeneratorSet};

use num_complex::Complex64;

use crate::error::{CcmwError, Result};

/// Maximum battery dimension supported by the crate.
pub const MAX_DIM: usize = 8;

/// Tolerance on |A - A†| entries for a matrix to count as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Tolerance on |U†U - I| entries for a matrix to count as unitary.
pub const UNITARY_TOL: f64 = 1e-10;

/// A square complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries; the length must be a perfect
    /// square and every component finite.
    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(CcmwError::ParameterLengthMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        if !entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(CcmwError::NonFiniteEntries);
        }
        Ok(Self { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries[row * self.dim + col] = value;
    }

    #[inline]
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.entries[j * d + i] = self.entries[i * d + j].conj();
            }
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        let d = self.dim;
        let mut out = Self::zeros(d);
        mat_mul(d, &self.entries, &rhs.entries, &mut out.entries);
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a + b)
            .collect();
        Self {
            dim: self.dim,
            entries,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a - b)
            .collect();
        Self {
            dim: self.dim,
            entries,
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entries[i * self.dim + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry-wise deviation |self - rhs|.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn hermitian_deviation(&self) -> f64 {
        let d = self.dim;
        let mut dev: f64 = 0.0;
        for i in 0..d {
            dev = dev.max(self.entries[i * d + i].im.abs());
            for j in (i + 1)..d {
                let diff = self.entries[i * d + j] - self.entries[j * d + i].conj();
                dev = dev.max(diff.norm());
            }
        }
        dev
    }

    fn unitary_deviation(&self) -> f64 {
        let gram = self.adjoint().mul(self);
        gram.max_abs_diff(&Self::identity(self.dim))
    }
}

/// A Hermitian matrix, validated to `HERMITIAN_TOL` on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let deviation = matrix.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(CcmwError::NotHermitian { deviation });
        }
        Ok(Self { matrix })
    }

    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        Self::new(ComplexMatrix::from_entries(dim, entries)?)
    }

    /// Diagonal matrix with the given real spectrum.
    pub fn from_diagonal(values: &[f64]) -> Self {
        let d = values.len();
        let mut m = ComplexMatrix::zeros(d);
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, Complex64::new(v, 0.0));
        }
        Self { matrix: m }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Real parts of the diagonal (imaginary parts vanish for Hermitian input).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix.get(i, i).re).collect()
    }
}

/// A unitary matrix, validated to `UNITARY_TOL` on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    matrix: ComplexMatrix,
}

impl UnitaryMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let deviation = matrix.unitary_deviation();
        if deviation > UNITARY_TOL {
            return Err(CcmwError::NotUnitary { deviation });
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// U A U† for a matrix A of matching dimension.
    pub fn conjugate(&self, a: &ComplexMatrix) -> ComplexMatrix {
        self.matrix.mul(a).mul(&self.matrix.adjoint())
    }
}

/// Raw row-major matrix product `out = a * b`, no allocation.
///
/// `out` must not alias `a` or `b`. Shared by the typed API and the
/// optimizer's stack-buffer evaluators so both follow one arithmetic path.
#[inline]
pub(crate) fn mat_mul(d: usize, a: &[Complex64], b: &[Complex64], out: &mut [Complex64]) {
    for i in 0..d {
        for j in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..d {
                acc += a[i * d + k] * b[k * d + j];
            }
            out[i * d + j] = acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_non_square_entry_count() {
        assert!(ComplexMatrix::from_entries(2, vec![c(1.0, 0.0); 3]).is_err());
    }

    #[test]
    fn rejects_non_finite_entries() {
        let entries = vec![c(1.0, 0.0), c(f64::NAN, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        assert!(matches!(
            ComplexMatrix::from_entries(2, entries),
            Err(CcmwError::NonFiniteEntries)
        ));
    }

    #[test]
    fn hermitian_validation() {
        let ok = ComplexMatrix::from_entries(
            2,
            vec![c(1.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(-1.0, 0.0)],
        )
        .unwrap();
        assert!(HermitianOperator::new(ok).is_ok());

        let bad = ComplexMatrix::from_entries(
            2,
            vec![c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        assert!(matches!(
            HermitianOperator::new(bad),
            Err(CcmwError::NotHermitian { .. })
        ));
    }

    #[test]
    fn unitary_validation() {
        assert!(UnitaryMatrix::new(ComplexMatrix::identity(3)).is_ok());
        let scaled = ComplexMatrix::identity(3).scale(c(1.1, 0.0));
        assert!(UnitaryMatrix::new(scaled).is_err());
    }

    #[test]
    fn product_and_trace() {
        let sx = ComplexMatrix::from_entries(
            2,
            vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        let sq = sx.mul(&sx);
        assert!(sq.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
        assert!((sq.trace() - c(2.0, 0.0)).norm() < 1e-15);
    }
}
