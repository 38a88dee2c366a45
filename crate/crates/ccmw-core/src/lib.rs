//! Coherence-constrained maximal work (CCMW) extraction from small quantum
//! batteries (d <= 8).
//!
//! The crate computes the maximum work extractable by coherence-preserving
//! unitaries from states of fixed l1 coherence, two ways: closed-form
//! expressions where they exist (qubits in an arbitrary coherence basis,
//! qutrits for the equispaced diagonal and the purely off-diagonal
//! Hamiltonians) and a seeded, constrained evolution-strategy optimizer for
//! everything else. The two routes cross-validate each other; see
//! [`optimizer::verify_against_analytic`].
//!
//! Module map:
//! - [`linalg`]: dense complex matrices, Hermitian eigendecomposition,
//!   SU(d) generator bases, parameterized unitaries.
//! - [`state`]: pure states, density matrices, l1 coherence, energies.
//! - [`hamiltonians`]: the battery Hamiltonian families.
//! - [`analytic`]: closed forms and the isocoherent constraint geometry.
//! - [`optimizer`]: the evolution strategy and the CCMW estimation problems.
//! - [`passivity`]: ergotropy, permutation-phase unitaries, isocoherent
//!   passive states.

pub mod analytic;
pub mod error;
pub mod hamiltonians;
pub mod linalg;
pub mod optimizer;
pub mod passivity;
pub mod state;

pub use error::{CcmwError, Result};
