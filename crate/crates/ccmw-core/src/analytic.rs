//! Closed-form CCMW expressions and the isocoherent constraint geometry.
//!
//! Covers the qubit closed form (arbitrary coherence basis), the qutrit
//! closed forms for the equispaced diagonal and the purely off-diagonal
//! Hamiltonians, the tangency construction behind the diagonal qutrit
//! result, and the p-q parabola reduction behind the off-diagonal one.

use std::f64::consts::PI;

use crate::error::{CcmwError, Result};
use crate::hamiltonians::BatteryHamiltonian;
use crate::state::{pure_from_polar, PureState};

fn check_coherence(c: f64, max: f64) -> Result<()> {
    if !(0.0..=max).contains(&c) || !c.is_finite() {
        return Err(CcmwError::CoherenceOutOfRange { value: c, max });
    }
    Ok(())
}

/// Qubit CCMW at fixed coherence C in an arbitrary coherence basis:
/// |h1 - h3| sqrt(1 - C^2) + 2 h2 C.
pub fn xi2(c: f64, h1: f64, h3: f64, h2: f64) -> Result<f64> {
    check_coherence(c, 1.0)?;
    if h2 < 0.0 {
        return Err(CcmwError::InvalidHamiltonian(
            "off-diagonal magnitude h2 must be nonnegative".into(),
        ));
    }
    Ok((h1 - h3).abs() * (1.0 - c * c).sqrt() + 2.0 * h2 * c)
}

/// The optimal initial/final pure-state pair achieving the qubit CCMW.
///
/// Populations are (1 +- delta sqrt(1 - C^2))/2 with delta = sign(h1 - h3)
/// (+1 on the degenerate h1 = h3 tie, where the diagonal term vanishes and
/// the choice is inert). The initial relative phase equals the Hamiltonian
/// phase theta; the final one is offset by pi so its off-diagonal energy is
/// minimal, making energy(initial) - energy(final) equal xi2 exactly.
#[derive(Debug, Clone)]
pub struct QubitOptimalPair {
    pub initial: PureState,
    pub final_state: PureState,
    /// sign of (h1 - h3), +1 or -1
    pub delta: f64,
    /// Hamiltonian off-diagonal phase
    pub theta: f64,
}

pub fn optimal_qubit_pair(c: f64, h: &BatteryHamiltonian) -> Result<QubitOptimalPair> {
    check_coherence(c, 1.0)?;
    let (h1, h3, _h2, theta) = h.as_qubit_params()?;
    let delta = if h1 >= h3 { 1.0 } else { -1.0 };
    let s = (1.0 - c * c).max(0.0).sqrt();
    let p_high = (1.0 + delta * s) / 2.0;
    let p_low = 1.0 - p_high;
    let initial = pure_from_polar(
        &[p_high.sqrt(), p_low.sqrt()],
        &[0.0, theta.rem_euclid(2.0 * PI)],
    )?;
    let final_state = pure_from_polar(
        &[p_low.sqrt(), p_high.sqrt()],
        &[0.0, (theta + PI).rem_euclid(2.0 * PI)],
    )?;
    Ok(QubitOptimalPair {
        initial,
        final_state,
        delta,
        theta,
    })
}

#[inline]
fn f3(c: f64) -> f64 {
    (1.0 + c).sqrt() * (1.0 - c / 3.0).sqrt()
}

/// Qutrit CCMW at fixed coherence C for the equispaced diagonal Hamiltonian
/// jz(3): sqrt((1 + f3 + C/3)(1 + f3 - C)) with f3 = sqrt(1+C) sqrt(1-C/3).
pub fn xi3_diagonal(c: f64) -> Result<f64> {
    check_coherence(c, 2.0)?;
    let f = f3(c);
    let product = (1.0 + f + c / 3.0) * (1.0 + f - c).max(0.0);
    Ok(product.sqrt())
}

/// The two points where circles centered at the origin touch the scaled
/// isocoherent ellipse of the qutrit diagonal problem.
///
/// The squared distances to (x_plus, y0) and (x_minus, y0) are the maxima
/// and minima over the ellipse, and their difference is xi3_diagonal.
#[derive(Debug, Clone, Copy)]
pub struct TangencyPoints {
    pub y0: f64,
    pub x_plus: f64,
    pub x_minus: f64,
}

impl TangencyPoints {
    /// (x_plus^2 + y0^2) - (x_minus^2 + y0^2)
    pub fn distance_sq_difference(&self) -> f64 {
        (self.x_plus * self.x_plus + self.y0 * self.y0)
            - (self.x_minus * self.x_minus + self.y0 * self.y0)
    }
}

pub fn qutrit_tangency(c: f64) -> Result<TangencyPoints> {
    check_coherence(c, 2.0)?;
    let root_hi = (1.0 + c).sqrt();
    let root_lo = (1.0 - c / 3.0).sqrt();
    let y0 = (root_hi - root_lo) / 2.0;
    let base = (root_hi + root_lo) / (2.0 * 2.0_f64.sqrt());
    let spread = ((1.0 - c + f3(c)).max(0.0) / 4.0).sqrt();
    Ok(TangencyPoints {
        y0,
        x_plus: base + spread,
        x_minus: base - spread,
    })
}

/// Residual of the gradient-collinearity condition at a candidate tangency
/// point (x, y) of the scaled qutrit ellipse: zero iff the outward normals
/// of the ellipse and the origin-centered circle through the point align.
pub fn qutrit_normal_collinearity_residual(c: f64, x: f64, y: f64) -> f64 {
    let root = 2.0_f64.sqrt();
    let g_x = x + y / root - ((1.0 + c) / 2.0).sqrt();
    let g_y = 2.0 * y + x / root - (1.0 + c).sqrt();
    y * g_x - x * g_y
}

/// The isocoherent constraint surface for pure states of fixed coherence,
/// projected onto the coordinates x_1..x_{d-1}, optionally in the scaled
/// coordinates X_i = sqrt(delta_epsilon_{0,i}) x_i.
#[derive(Debug, Clone)]
pub struct EllipseSpec {
    dim: usize,
    coherence: f64,
    scaling: Vec<f64>,
}

impl EllipseSpec {
    pub fn new(dim: usize, coherence: f64, scaling: Vec<f64>) -> Result<Self> {
        if dim < 2 {
            return Err(CcmwError::DimensionOutOfRange(dim));
        }
        check_coherence(coherence, (dim - 1) as f64)?;
        if scaling.len() != dim - 1 {
            return Err(CcmwError::ParameterLengthMismatch {
                expected: dim - 1,
                actual: scaling.len(),
            });
        }
        if scaling.iter().any(|w| *w <= 0.0) {
            return Err(CcmwError::InvalidHamiltonian(
                "ellipse scaling weights must be positive".into(),
            ));
        }
        Ok(Self {
            dim,
            coherence,
            scaling,
        })
    }

    pub fn unscaled(dim: usize, coherence: f64) -> Result<Self> {
        Self::new(dim, coherence, vec![1.0; dim.saturating_sub(1)])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn coherence(&self) -> f64 {
        self.coherence
    }

    /// Left-hand side of the constraint polynomial at `point`; zero (within
    /// tolerance) iff the completed amplitude vector is a fixed-coherence
    /// pure state with nonnegative moduli.
    pub fn residual(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.dim - 1, "point length must be dim - 1");
        let root_c = (1.0 + self.coherence).sqrt();
        let mut acc = self.coherence / 2.0;
        for (i, &z) in point.iter().enumerate() {
            acc += z * z / self.scaling[i] - root_c * z / self.scaling[i].sqrt();
            for j in 0..i {
                acc += z * point[j] / (self.scaling[i] * self.scaling[j]).sqrt();
            }
        }
        acc
    }
}

/// Residual of the unscaled isocoherent ellipse for dimension `dim` at the
/// projected point x_1..x_{d-1}.
pub fn isocoherent_ellipse_residual(dim: usize, coherence: f64, point: &[f64]) -> f64 {
    let spec = EllipseSpec::unscaled(dim, coherence)
        .expect("caller provides dim >= 2 and admissible coherence");
    spec.residual(point)
}

/// `count` points (x1, x2) tracing the qutrit isocoherent ellipse for
/// coherence C; every point has |residual| below 1e-9 by construction.
/// At C = 2 the locus degenerates to the single point (1/sqrt3, 1/sqrt3).
pub fn qutrit_ellipse_points(c: f64, count: usize) -> Result<Vec<(f64, f64)>> {
    check_coherence(c, 2.0)?;
    // Rotate to u = (x1+x2)/sqrt2, w = (x2-x1)/sqrt2, where the constraint
    // becomes 3(u - u0)^2 + w^2 = (2 - C)/3.
    let u0 = 2.0_f64.sqrt() * (1.0 + c).sqrt() / 3.0;
    let ru = ((2.0 - c).max(0.0) / 9.0).sqrt();
    let rw = ((2.0 - c).max(0.0) / 3.0).sqrt();
    let root = 2.0_f64.sqrt();
    Ok((0..count)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / count as f64;
            let u = u0 + ru * t.cos();
            let w = rw * t.sin();
            ((u - w) / root, (u + w) / root)
        })
        .collect())
}

/// Qutrit CCMW for the purely off-diagonal Hamiltonian with coupling alpha:
/// piecewise in C with branch points at 1 and 5/3.
pub fn xi3_offdiagonal(c: f64, alpha: f64) -> Result<f64> {
    check_coherence(c, 2.0)?;
    if alpha <= 0.0 {
        return Err(CcmwError::InvalidHamiltonian(
            "coupling alpha must be positive".into(),
        ));
    }
    let value = if c <= 1.0 {
        2.0 * alpha * c
    } else if c <= 5.0 / 3.0 {
        alpha * (c + 1.0)
    } else {
        let f = (2.0 / 9.0)
            * ((1.0 + c).sqrt() - (1.0 - c / 2.0).max(0.0).sqrt()).powi(2);
        2.0 * alpha * (c - f)
    };
    Ok(value)
}

/// Minimum of q on the parabola q = (p - sqrt(1+C)/2)^2 + (C-1)/4 inside the
/// valid region p^2 >= 4q, q >= 0.
///
/// This is the independent route to the off-diagonal qutrit value:
/// 4 alpha (C/2 - pq_min_q(C)) reproduces xi3_offdiagonal. The branch logic
/// here follows the geometry (vertex admissibility, boundary intersection)
/// rather than coherence thresholds.
pub fn pq_min_q(c: f64) -> Result<f64> {
    check_coherence(c, 2.0)?;
    let p_vertex = (1.0 + c).sqrt() / 2.0;
    let q_vertex = (c - 1.0) / 4.0;
    if q_vertex < 0.0 {
        // Vertex below q = 0: the parabola crosses q = 0 inside the valid
        // region, so the minimum admissible q is zero.
        return Ok(0.0);
    }
    if p_vertex * p_vertex >= 4.0 * q_vertex {
        return Ok(q_vertex);
    }
    // Vertex violates p^2 >= 4q: minimize along the boundary q = p^2 / 4,
    // i.e. the smaller root of (3/4) p^2 - sqrt(1+C) p + C/2 = 0.
    let p = (2.0 / 3.0) * ((1.0 + c).sqrt() - (1.0 - c / 2.0).max(0.0).sqrt());
    Ok(p * p / 4.0)
}

/// Pure-state CCMW at maximal scaled coherence for the mixed Hamiltonian
/// family: 4 alpha (1 - 1/d), independent of the diagonal coupling.
pub fn max_coherence_scaling(d: usize, alpha: f64) -> Result<f64> {
    if d < 2 {
        return Err(CcmwError::DimensionOutOfRange(d));
    }
    if alpha <= 0.0 {
        return Err(CcmwError::InvalidHamiltonian(
            "coupling alpha must be positive".into(),
        ));
    }
    Ok(4.0 * alpha * (1.0 - 1.0 / d as f64))
}
