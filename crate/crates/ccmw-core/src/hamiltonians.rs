//! Battery Hamiltonians in the coherence basis.
//!
//! Every constructor tags the result with its structure (diagonal,
//! off-diagonal, mixed, ...) so downstream code can decide which closed-form
//! expressions apply. All Hamiltonians are dimensionless multiples of a unit
//! energy; for the off-diagonal families the coupling alpha carries the unit.

use num_complex::Complex64;

use crate::error::{CcmwError, Result};
use crate::linalg::{ComplexMatrix, HermitianOperator, MAX_DIM};

/// Structural tag deciding which analytic formulas apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HamiltonianStructure {
    /// Arbitrary 2x2 Hermitian in the coherence basis.
    QubitGeneral,
    /// Diagonal with the equispaced jz spectrum.
    Diagonal,
    /// Zero diagonal, nearest-neighbor couplings only.
    OffDiagonal,
    /// Both diagonal and off-diagonal parts.
    Mixed,
    /// Diagonal with a caller-provided spectrum.
    CustomDiagonal,
}

/// Named parameters recorded by each constructor.
#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianParams {
    Qubit {
        h1: f64,
        h3: f64,
        h2: f64,
        theta: f64,
    },
    Jz,
    OffDiagonal {
        alpha1: f64,
        alpha2: f64,
        /// sqrt(alpha1^2 + alpha2^2)
        alpha: f64,
        /// arg(alpha1 + i alpha2)
        phi: f64,
    },
    Mixed {
        alpha1: f64,
        alpha2: f64,
        alpha3: f64,
        alpha: f64,
        phi: f64,
        /// alpha / alpha3 when alpha3 != 0; controls the off-diagonal strength.
        alpha_bar: Option<f64>,
    },
    CustomDiagonal {
        epsilons: Vec<f64>,
    },
}

#[derive(Debug, Clone)]
pub struct BatteryHamiltonian {
    operator: HermitianOperator,
    structure: HamiltonianStructure,
    params: HamiltonianParams,
}

impl BatteryHamiltonian {
    #[inline]
    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    #[inline]
    pub fn operator(&self) -> &HermitianOperator {
        &self.operator
    }

    #[inline]
    pub fn structure(&self) -> HamiltonianStructure {
        self.structure
    }

    #[inline]
    pub fn params(&self) -> &HamiltonianParams {
        &self.params
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(
            self.structure,
            HamiltonianStructure::Diagonal | HamiltonianStructure::CustomDiagonal
        )
    }

    /// Constructor family, e.g. for diagnostics and CSV identifiers.
    pub fn family(&self) -> &'static str {
        match self.params {
            HamiltonianParams::Qubit { .. } => "qubit",
            HamiltonianParams::Jz => "jz",
            HamiltonianParams::OffDiagonal { .. } => "j-offdiagonal",
            HamiltonianParams::Mixed { .. } => "j-mixed",
            HamiltonianParams::CustomDiagonal { .. } => "custom-diagonal",
        }
    }

    /// Diagonal spectrum in basis order; only meaningful for diagonal tags.
    pub fn epsilons(&self) -> Result<Vec<f64>> {
        if !self.is_diagonal() {
            return Err(CcmwError::NonDiagonalHamiltonian);
        }
        Ok(self.operator.diagonal())
    }

    /// Energy gap epsilon_j - epsilon_i for a diagonal Hamiltonian.
    pub fn delta_epsilon(&self, i: usize, j: usize) -> Result<f64> {
        let eps = self.epsilons()?;
        Ok(eps[j] - eps[i])
    }

    /// Reads a 2x2 Hamiltonian as (h1, h3, h2, theta) with the off-diagonal
    /// written as h2 e^{-i theta} |0><1| + h.c.
    pub fn as_qubit_params(&self) -> Result<(f64, f64, f64, f64)> {
        if self.dim() != 2 {
            return Err(CcmwError::DimensionMismatch {
                left: self.dim(),
                right: 2,
            });
        }
        let m = self.operator.matrix();
        let h1 = m.get(0, 0).re;
        let h3 = m.get(1, 1).re;
        let off = m.get(1, 0);
        let h2 = off.norm();
        let theta = if h2 > 0.0 { off.arg() } else { 0.0 };
        Ok((h1, h3, h2, theta))
    }

    fn validate_structure(self) -> Result<Self> {
        let d = self.dim();
        let m = self.operator.matrix();
        let max_off = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| m.get(i, j).norm())
            .fold(0.0, f64::max);
        let max_diag = (0..d).map(|i| m.get(i, i).norm()).fold(0.0, f64::max);
        match self.structure {
            HamiltonianStructure::Diagonal | HamiltonianStructure::CustomDiagonal
                if max_off > 1e-12 =>
            {
                Err(CcmwError::InvalidHamiltonian(format!(
                    "diagonal tag with off-diagonal entries up to {max_off:.3e}"
                )))
            }
            HamiltonianStructure::OffDiagonal if max_diag > 1e-12 => {
                Err(CcmwError::InvalidHamiltonian(format!(
                    "off-diagonal tag with diagonal entries up to {max_diag:.3e}"
                )))
            }
            _ => Ok(self),
        }
    }
}

fn check_dim(d: usize) -> Result<()> {
    if (2..=MAX_DIM).contains(&d) {
        Ok(())
    } else {
        Err(CcmwError::DimensionOutOfRange(d))
    }
}

/// 2x2 Hamiltonian with diagonal (h1, h3) and off-diagonal h2 e^{-+ i theta}.
pub fn qubit_hamiltonian(h1: f64, h3: f64, h2: f64, theta: f64) -> Result<BatteryHamiltonian> {
    if h2 < 0.0 {
        return Err(CcmwError::InvalidHamiltonian(
            "off-diagonal magnitude h2 must be nonnegative".into(),
        ));
    }
    let mut m = ComplexMatrix::zeros(2);
    m.set(0, 0, Complex64::new(h1, 0.0));
    m.set(1, 1, Complex64::new(h3, 0.0));
    m.set(0, 1, Complex64::from_polar(h2, -theta));
    m.set(1, 0, Complex64::from_polar(h2, theta));
    BatteryHamiltonian {
        operator: HermitianOperator::new(m)?,
        structure: HamiltonianStructure::QubitGeneral,
        params: HamiltonianParams::Qubit { h1, h3, h2, theta },
    }
    .validate_structure()
}

/// Equispaced diagonal spectrum (2/(d-1))(i - (d-1)/2), i = 0..d-1, so the
/// extreme eigenvalues are exactly -1 and +1 for every dimension.
pub fn jz(d: usize) -> Result<BatteryHamiltonian> {
    check_dim(d)?;
    BatteryHamiltonian {
        operator: HermitianOperator::from_diagonal(&jz_spectrum(d)),
        structure: HamiltonianStructure::Diagonal,
        params: HamiltonianParams::Jz,
    }
    .validate_structure()
}

fn jz_spectrum(d: usize) -> Vec<f64> {
    let half = (d - 1) as f64 / 2.0;
    (0..d)
        .map(|i| (2.0 / (d - 1) as f64) * (i as f64 - half))
        .collect()
}

/// Uniform nearest-neighbor coupling sum |i><i-1| + |i-1><i|.
pub fn jx(d: usize) -> Result<BatteryHamiltonian> {
    j_offdiagonal(d, 1.0, 0.0)
}

/// Uniform nearest-neighbor coupling sum i(|i><i-1| - |i-1><i|).
pub fn jy(d: usize) -> Result<BatteryHamiltonian> {
    j_offdiagonal(d, 0.0, 1.0)
}

/// alpha1 Jx + alpha2 Jy, storing alpha = sqrt(alpha1^2 + alpha2^2) and
/// phi = arg(alpha1 + i alpha2).
pub fn j_offdiagonal(d: usize, alpha1: f64, alpha2: f64) -> Result<BatteryHamiltonian> {
    check_dim(d)?;
    if alpha1 == 0.0 && alpha2 == 0.0 {
        return Err(CcmwError::InvalidHamiltonian(
            "zero Hamiltonian: (alpha1, alpha2) must not both vanish".into(),
        ));
    }
    let (alpha, phi) = polar_coupling(alpha1, alpha2);
    BatteryHamiltonian {
        operator: offdiagonal_operator(d, alpha1, alpha2),
        structure: HamiltonianStructure::OffDiagonal,
        params: HamiltonianParams::OffDiagonal {
            alpha1,
            alpha2,
            alpha,
            phi,
        },
    }
    .validate_structure()
}

fn polar_coupling(alpha1: f64, alpha2: f64) -> (f64, f64) {
    let z = Complex64::new(alpha1, alpha2);
    (z.norm(), z.arg())
}

fn offdiagonal_operator(d: usize, alpha1: f64, alpha2: f64) -> HermitianOperator {
    let mut m = ComplexMatrix::zeros(d);
    for i in 1..d {
        // (Jx)_{i,i-1} = 1, (Jy)_{i,i-1} = i.
        m.set(i, i - 1, Complex64::new(alpha1, alpha2));
        m.set(i - 1, i, Complex64::new(alpha1, -alpha2));
    }
    HermitianOperator::new(m).expect("construction is Hermitian")
}

/// alpha1 Jx + alpha2 Jy + alpha3 Jz. Reduces to the purely off-diagonal
/// family at alpha3 = 0 and to jz at alpha1 = alpha2 = 0.
pub fn j_mixed(d: usize, alpha1: f64, alpha2: f64, alpha3: f64) -> Result<BatteryHamiltonian> {
    check_dim(d)?;
    if alpha3 == 0.0 {
        return j_offdiagonal(d, alpha1, alpha2);
    }
    let (alpha, phi) = polar_coupling(alpha1, alpha2);
    if alpha == 0.0 {
        let spectrum: Vec<f64> = jz_spectrum(d).iter().map(|e| e * alpha3).collect();
        return BatteryHamiltonian {
            operator: HermitianOperator::from_diagonal(&spectrum),
            structure: HamiltonianStructure::Diagonal,
            params: HamiltonianParams::Mixed {
                alpha1,
                alpha2,
                alpha3,
                alpha,
                phi,
                alpha_bar: Some(0.0),
            },
        }
        .validate_structure();
    }
    let off = offdiagonal_operator(d, alpha1, alpha2);
    let diag: Vec<f64> = jz_spectrum(d).iter().map(|e| e * alpha3).collect();
    let m = off
        .matrix()
        .add(HermitianOperator::from_diagonal(&diag).matrix());
    BatteryHamiltonian {
        operator: HermitianOperator::new(m)?,
        structure: HamiltonianStructure::Mixed,
        params: HamiltonianParams::Mixed {
            alpha1,
            alpha2,
            alpha3,
            alpha,
            phi,
            alpha_bar: Some(alpha / alpha3),
        },
    }
    .validate_structure()
}

/// Diagonal Hamiltonian with the given spectrum in basis order.
pub fn custom_diagonal(epsilons: &[f64]) -> Result<BatteryHamiltonian> {
    if epsilons.len() < 2 {
        return Err(CcmwError::InvalidHamiltonian(
            "custom diagonal needs at least 2 levels".into(),
        ));
    }
    check_dim(epsilons.len())?;
    if !epsilons.iter().all(|e| e.is_finite()) {
        return Err(CcmwError::NonFiniteEntries);
    }
    BatteryHamiltonian {
        operator: HermitianOperator::from_diagonal(epsilons),
        structure: HamiltonianStructure::CustomDiagonal,
        params: HamiltonianParams::CustomDiagonal {
            epsilons: epsilons.to_vec(),
        },
    }
    .validate_structure()
}
