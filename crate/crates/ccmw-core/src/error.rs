//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CcmwError {
    #[error("dimension {0} outside the supported range 2..=8")]
    DimensionOutOfRange(usize),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("expected {expected} parameters, got {actual}")]
    ParameterLengthMismatch { expected: usize, actual: usize },

    #[error("matrix entries must be finite")]
    NonFiniteEntries,

    #[error("matrix is not Hermitian (max |A - A†| entry = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max |U†U - I| entry = {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("state norm is {norm}, expected 1")]
    NotNormalized { norm: f64 },

    #[error("trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue = {min_eigenvalue:.3e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("coherence {value} outside admissible range [0, {max}]")]
    CoherenceOutOfRange { value: f64, max: f64 },

    #[error("invalid Hamiltonian parameter: {0}")]
    InvalidHamiltonian(String),

    #[error("spectral weights must be nonnegative with at least one positive entry")]
    InvalidSpectralWeights,

    #[error("permutation is not a bijection on 0..{dim}")]
    InvalidPermutation { dim: usize },

    #[error("Hamiltonian must be diagonal in the coherence basis for this operation")]
    NonDiagonalHamiltonian,

    #[error("brute-force enumeration supports d <= 6, got {0}")]
    BruteForceDimensionTooLarge(usize),

    #[error("invalid optimization problem: {0}")]
    InvalidProblem(String),

    #[error("no closed-form expression for {hamiltonian} at d = {dim}")]
    NoAnalyticFormula { hamiltonian: String, dim: usize },
}

pub type Result<T> = std::result::Result<T, CcmwError>;
