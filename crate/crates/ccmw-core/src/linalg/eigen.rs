//! Hermitian eigendecomposition via cyclic complex Jacobi rotations.
//!
//! Each sweep visits every off-diagonal pair (p, q) and applies the complex
//! Givens rotation that zeroes A[p][q]. For the d <= 8 matrices handled here
//! the iteration converges in a handful of sweeps; the stopping rule is an
//! off-diagonal Frobenius norm below 1e-14 relative to the matrix scale.
//! Eigenvector columns for degenerate eigenvalues come out as an arbitrary
//! orthonormal completion; callers must only rely on spectral projectors.

use num_complex::Complex64;

use super::{ComplexMatrix, HermitianOperator, UnitaryMatrix};

const OFF_DIAG_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 60;

/// Eigenvalues (ascending) and eigenvectors of a Hermitian operator, with
/// V diag(lambda) V† reconstructing the input.
pub fn eigendecompose(op: &HermitianOperator) -> (Vec<f64>, UnitaryMatrix) {
    let d = op.dim();
    let mut work = op.matrix().entries().to_vec();
    let mut vecs = ComplexMatrix::identity(d).entries().to_vec();
    let mut values = vec![0.0; d];
    jacobi_in_place(d, &mut work, &mut vecs, &mut values);
    let matrix = ComplexMatrix::from_entries(d, vecs).expect("rotation products stay finite");
    let unitary = UnitaryMatrix::new(matrix)
        .expect("product of exact unitary rotations stays unitary within tolerance");
    (values, unitary)
}

/// In-place Jacobi kernel on raw row-major buffers.
///
/// `work` is destroyed (driven to diagonal form), `vecs` must hold the
/// identity on entry and accumulates eigenvectors as columns, `values`
/// receives the ascending eigenvalues. Columns of `vecs` are permuted to
/// match the sorted eigenvalues. No allocation; usable from hot loops with
/// stack buffers.
pub(crate) fn jacobi_in_place(
    d: usize,
    work: &mut [Complex64],
    vecs: &mut [Complex64],
    values: &mut [f64],
) {
    debug_assert!(work.len() >= d * d && vecs.len() >= d * d && values.len() >= d);
    let scale = frobenius(d, work).max(1.0);
    let tol = OFF_DIAG_TOL * scale;

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(d, work) <= tol {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                rotate_pair(d, work, vecs, p, q);
            }
        }
    }

    for i in 0..d {
        values[i] = work[i * d + i].re;
    }
    sort_ascending(d, values, vecs);
}

/// Applies the rotation zeroing work[p][q], updating `work` and accumulating
/// the rotation into the columns of `vecs`.
fn rotate_pair(d: usize, work: &mut [Complex64], vecs: &mut [Complex64], p: usize, q: usize) {
    let apq = work[p * d + q];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r; // e^{i phi} with A[p][q] = r e^{i phi}
    let app = work[p * d + p].re;
    let aqq = work[q * d + q].re;

    // Real Jacobi angle for [[app, r], [r, aqq]]: tan(2 theta) = 2r / (app - aqq).
    let tau = (app - aqq) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // Rotation V: V[p][p] = c, V[p][q] = -s e^{i phi}, V[q][p] = s e^{-i phi}, V[q][q] = c.
    let sp = phase * s; // s e^{i phi}

    // work <- V† work V: first columns (work V), then rows (V† work).
    for k in 0..d {
        let wkp = work[k * d + p];
        let wkq = work[k * d + q];
        work[k * d + p] = wkp * c + wkq * sp.conj();
        work[k * d + q] = -wkp * sp + wkq * c;
    }
    for k in 0..d {
        let wpk = work[p * d + k];
        let wqk = work[q * d + k];
        work[p * d + k] = wpk * c + wqk * sp;
        work[q * d + k] = -wpk * sp.conj() + wqk * c;
    }
    // Re-impose the exact zeros/symmetry the rotation targets.
    work[p * d + q] = Complex64::new(0.0, 0.0);
    work[q * d + p] = Complex64::new(0.0, 0.0);
    work[p * d + p] = Complex64::new(work[p * d + p].re, 0.0);
    work[q * d + q] = Complex64::new(work[q * d + q].re, 0.0);

    // vecs <- vecs V (columns transform like the similarity above).
    for k in 0..d {
        let vkp = vecs[k * d + p];
        let vkq = vecs[k * d + q];
        vecs[k * d + p] = vkp * c + vkq * sp.conj();
        vecs[k * d + q] = -vkp * sp + vkq * c;
    }
}

fn sort_ascending(d: usize, values: &mut [f64], vecs: &mut [Complex64]) {
    // Selection sort with column swaps; d <= 8 keeps this trivial.
    for i in 0..d {
        let mut min_idx = i;
        for j in (i + 1)..d {
            if values[j] < values[min_idx] {
                min_idx = j;
            }
        }
        if min_idx != i {
            values.swap(i, min_idx);
            for row in 0..d {
                vecs.swap(row * d + i, row * d + min_idx);
            }
        }
    }
}

fn frobenius(d: usize, m: &[Complex64]) -> f64 {
    m[..d * d].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn off_diagonal_norm(d: usize, m: &[Complex64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                acc += m[i * d + j].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::HermitianOperator;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> HermitianOperator {
        let mut m = ComplexMatrix::zeros(d);
        for i in 0..d {
            m.set(i, i, Complex64::new(rng.gen_range(-2.0..2.0), 0.0));
            for j in (i + 1)..d {
                let z = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                m.set(i, j, z);
                m.set(j, i, z.conj());
            }
        }
        HermitianOperator::new(m).unwrap()
    }

    fn reconstruct(values: &[f64], vectors: &UnitaryMatrix) -> ComplexMatrix {
        let d = vectors.dim();
        let mut lambda = ComplexMatrix::zeros(d);
        for (i, &v) in values.iter().enumerate() {
            lambda.set(i, i, Complex64::new(v, 0.0));
        }
        vectors.matrix().mul(&lambda).mul(&vectors.matrix().adjoint())
    }

    #[test]
    fn already_diagonal() {
        let op = HermitianOperator::from_diagonal(&[-1.0, 0.0, 1.0]);
        let (values, vectors) = eigendecompose(&op);
        assert_eq!(values, vec![-1.0, 0.0, 1.0]);
        // Identity up to column phases: each column has one unit entry.
        for col in 0..3 {
            let mag = vectors.matrix().get(col, col).norm();
            assert!((mag - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pauli_x_spectrum() {
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
        let (values, _) = eigendecompose(&sx);
        assert!((values[0] + 1.0).abs() < 1e-14);
        assert!((values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_reconstruction_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 2..=8 {
            for _ in 0..20 {
                let op = random_hermitian(d, &mut rng);
                let (values, vectors) = eigendecompose(&op);
                let rebuilt = reconstruct(&values, &vectors);
                assert!(
                    rebuilt.max_abs_diff(op.matrix()) < 1e-10,
                    "reconstruction residual too large at d={d}"
                );
                for w in values.windows(2) {
                    assert!(w[0] <= w[1], "eigenvalues not ascending");
                }
            }
        }
    }

    #[test]
    fn degenerate_spectrum_projectors() {
        // diag(1, 1, -1) rotated by a fixed unitary keeps a two-fold degeneracy.
        let op = HermitianOperator::from_entries(
            3,
            vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        )
        .unwrap();
        let (values, vectors) = eigendecompose(&op);
        assert!((values[0] + 1.0).abs() < 1e-12);
        assert!((values[1] - 1.0).abs() < 1e-12);
        assert!((values[2] - 1.0).abs() < 1e-12);
        let rebuilt = reconstruct(&values, &vectors);
        assert!(rebuilt.max_abs_diff(op.matrix()) < 1e-10);
    }
}
