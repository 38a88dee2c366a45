//! CCMW estimation problems: maximize extracted work over states and
//! coherence-preserving transformations at fixed coherence.
//!
//! Mixed mode follows the diagonal-seed protocol: a shared eigenvalue vector
//! conjugated by two independently parameterized unitaries, with the
//! coherence of both resulting states pinned by equality constraints. Pure
//! mode parameterizes two pure states by moduli (projected onto the unit
//! sphere inside the objective) and relative phases, leaving only the
//! coherence equalities to the stochastic ranking.

use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::analytic::{xi2, xi3_diagonal, xi3_offdiagonal};
use crate::error::{CcmwError, Result};
use crate::hamiltonians::{BatteryHamiltonian, HamiltonianParams, HamiltonianStructure};
use crate::linalg::{
    exp_i_hermitian, gellmann_generators, unitary_from_parameters, GeneratorSet, MAX_DIM,
};
use crate::state::{
    density_from_spectrum, energy, l1_coherence_raw, pure_from_polar, DensityMatrix,
};

use super::{isres_minimize, OptimizationProblem, OptimizationResult, OptimizerConfig};

/// Feasibility tolerance on the coherence equality residuals.
pub const COHERENCE_TOLERANCE: f64 = 1e-6;

/// Residual reported for degenerate parameter points (all-zero weights or
/// moduli) so the ranking discards them.
const DEGENERATE_RESIDUAL: f64 = 1e6;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcmwMode {
    Mixed,
    Pure,
}

/// Parameter count of the mixed-mode problem: d eigen-weights plus two
/// theta vectors of length d^2.
pub fn mixed_param_count(d: usize) -> usize {
    d + 2 * d * d
}

/// Parameter count of the pure-mode problem: d moduli and d-1 relative
/// phases per state.
pub fn pure_param_count(d: usize) -> usize {
    2 * (2 * d - 1)
}

/// Default evaluation budget per estimate, sized so sweep suites finish in
/// minutes on a laptop.
pub fn default_budget(dim: usize) -> usize {
    if dim <= 4 {
        200_000
    } else {
        500_000
    }
}

/// Default configuration for one estimate: population 20n, the per-dimension
/// budget above, 8 independent restarts.
pub fn default_config(mode: CcmwMode, dim: usize, seed: u64) -> OptimizerConfig {
    let n = match mode {
        CcmwMode::Mixed => mixed_param_count(dim),
        CcmwMode::Pure => pure_param_count(dim),
    };
    OptimizerConfig::new(20 * n, default_budget(dim), seed, 8)
}

/// A CCMW estimate with the states that witness it.
#[derive(Debug, Clone)]
pub struct CcmwEstimate {
    pub dimension: usize,
    pub coherence: f64,
    pub hamiltonian: BatteryHamiltonian,
    pub value: f64,
    pub witness_initial: DensityMatrix,
    pub witness_final: DensityMatrix,
    pub mode: CcmwMode,
    pub optimization: OptimizationResult,
}

fn validate_inputs(h: &BatteryHamiltonian, d: usize, c: f64) -> Result<()> {
    if !(2..=MAX_DIM).contains(&d) {
        return Err(CcmwError::DimensionOutOfRange(d));
    }
    if h.dim() != d {
        return Err(CcmwError::DimensionMismatch {
            left: h.dim(),
            right: d,
        });
    }
    let max = (d - 1) as f64;
    if !c.is_finite() || !(0.0..=max).contains(&c) {
        return Err(CcmwError::CoherenceOutOfRange { value: c, max });
    }
    Ok(())
}

/// One full evaluation shared by the objective and both constraint closures.
/// The optimizer queries all three per individual, so the last evaluation is
/// cached keyed on the parameter vector.
struct SharedEval {
    compute: Box<dyn Fn(&[f64], &mut [f64; 2]) -> f64 + Send + Sync>,
    cache: Mutex<CacheSlot>,
}

#[derive(Default)]
struct CacheSlot {
    params: Vec<f64>,
    objective: f64,
    residuals: [f64; 2],
}

impl SharedEval {
    fn new(compute: Box<dyn Fn(&[f64], &mut [f64; 2]) -> f64 + Send + Sync>) -> Arc<Self> {
        Arc::new(Self {
            compute,
            cache: Mutex::new(CacheSlot::default()),
        })
    }

    fn query(&self, x: &[f64]) -> (f64, [f64; 2]) {
        let mut slot = self.cache.lock().expect("evaluator cache poisoned");
        if slot.params.as_slice() != x {
            let mut residuals = [0.0; 2];
            let objective = (self.compute)(x, &mut residuals);
            slot.params.clear();
            slot.params.extend_from_slice(x);
            slot.objective = objective;
            slot.residuals = residuals;
        }
        (slot.objective, slot.residuals)
    }
}

fn shared_problem(
    eval: &Arc<SharedEval>,
    lower: Vec<f64>,
    upper: Vec<f64>,
) -> Result<OptimizationProblem> {
    let for_objective = Arc::clone(eval);
    let for_first = Arc::clone(eval);
    let for_second = Arc::clone(eval);
    OptimizationProblem::new(
        lower,
        upper,
        Box::new(move |x| for_objective.query(x).0),
        vec![
            Box::new(move |x| for_first.query(x).1[0]),
            Box::new(move |x| for_second.query(x).1[1]),
        ],
        COHERENCE_TOLERANCE,
    )
}

/// rho = U diag(weights / wsum) U† with U = exp(i sum theta_j T_j),
/// written into `rho` (row-major d*d). Scratch lives in a thread-local pool
/// so the per-evaluation cost is the arithmetic alone.
fn conjugated_diagonal(
    d: usize,
    gens: &GeneratorSet,
    theta: &[f64],
    weights: &[f64],
    wsum: f64,
    rho: &mut [Complex64],
) {
    thread_local! {
        static POOL: std::cell::RefCell<Vec<Complex64>> =
            std::cell::RefCell::new(vec![Complex64::new(0.0, 0.0); 4 * MAX_DIM * MAX_DIM]);
    }
    let zero = Complex64::new(0.0, 0.0);
    POOL.with(|pool| {
        let mut pool = pool.borrow_mut();
        let dd = d * d;
        let (exponent, rest) = pool.split_at_mut(dd);
        let (vecs, rest) = rest.split_at_mut(dd);
        let (scratch, rest) = rest.split_at_mut(dd);
        let u = &mut rest[..dd];
        let mut values = [0.0; MAX_DIM];

        gens.assemble_exponent(theta, exponent);
        exp_i_hermitian(d, exponent, vecs, &mut values[..d], scratch, u);
        for i in 0..d {
            for j in 0..d {
                let mut acc = zero;
                for k in 0..d {
                    acc += u[i * d + k] * (weights[k] / wsum) * u[j * d + k].conj();
                }
                rho[i * d + j] = acc;
            }
        }
    });
}

#[inline]
fn trace_product_re(d: usize, rho: &[Complex64], ham: &[Complex64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            acc += (rho[i * d + j] * ham[j * d + i]).re;
        }
    }
    acc
}

/// CCMW over mixed states: d eigen-weights in [0,1] plus two theta vectors
/// in [0, 2pi), objective -Tr[(rho_in - rho_f) H], coherence of both states
/// constrained to C.
pub fn ccmw_mixed(
    h: &BatteryHamiltonian,
    d: usize,
    c: f64,
    config: &OptimizerConfig,
) -> Result<CcmwEstimate> {
    validate_inputs(h, d, c)?;
    let gens = gellmann_generators(d)?;
    let ham: Vec<Complex64> = h.operator().matrix().entries().to_vec();
    let n = mixed_param_count(d);

    let gens_for_eval = gens.clone();
    let eval = SharedEval::new(Box::new(move |x: &[f64], residuals: &mut [f64; 2]| {
        let (weights, rest) = x.split_at(d);
        let (theta_i, theta_f) = rest.split_at(d * d);
        let wsum: f64 = weights.iter().sum();
        if wsum < 1e-12 {
            residuals[0] = DEGENERATE_RESIDUAL;
            residuals[1] = DEGENERATE_RESIDUAL;
            return 0.0;
        }
        let zero = Complex64::new(0.0, 0.0);
        let mut rho_in = [zero; MAX_DIM * MAX_DIM];
        let mut rho_f = [zero; MAX_DIM * MAX_DIM];
        conjugated_diagonal(d, &gens_for_eval, theta_i, weights, wsum, &mut rho_in[..d * d]);
        conjugated_diagonal(d, &gens_for_eval, theta_f, weights, wsum, &mut rho_f[..d * d]);
        residuals[0] = l1_coherence_raw(d, &rho_in[..d * d]) - c;
        residuals[1] = l1_coherence_raw(d, &rho_f[..d * d]) - c;
        let e_in = trace_product_re(d, &rho_in[..d * d], &ham);
        let e_f = trace_product_re(d, &rho_f[..d * d], &ham);
        -(e_in - e_f)
    }));

    // The identity component only contributes a global phase; the traceless
    // components need a symmetric range. Every U = exp(iM) with M the
    // principal logarithm (eigenphases in (-pi, pi]) has generator
    // coefficients bounded by |Tr[M T_j]| / 2 <= pi sqrt(d/2); a one-sided
    // [0, 2pi) box would confine the coefficient vector to a cone that
    // misses most of U(d).
    let theta_bound = std::f64::consts::PI * (d as f64 / 2.0).sqrt();
    let mut lower = vec![0.0; n];
    let mut upper = vec![1.0; n];
    for state in 0..2 {
        let base = d + state * d * d;
        lower[base] = 0.0;
        upper[base] = TWO_PI;
        for j in 1..d * d {
            lower[base + j] = -theta_bound;
            upper[base + j] = theta_bound;
        }
    }
    let problem = shared_problem(&eval, lower, upper)?;
    let result = isres_minimize(&problem, config);

    let (weights, rest) = result.best_params.split_at(d);
    let (theta_i, theta_f) = rest.split_at(d * d);
    let wsum: f64 = weights.iter().sum();
    let safe_weights: Vec<f64> = if wsum < 1e-12 {
        vec![1.0 / d as f64; d]
    } else {
        weights.to_vec()
    };
    let u_in = unitary_from_parameters(&gens, theta_i)?;
    let u_f = unitary_from_parameters(&gens, theta_f)?;
    let witness_initial = density_from_spectrum(&safe_weights, &u_in)?;
    let witness_final = density_from_spectrum(&safe_weights, &u_f)?;
    let value = energy(&witness_initial, h.operator())? - energy(&witness_final, h.operator())?;
    Ok(CcmwEstimate {
        dimension: d,
        coherence: c,
        hamiltonian: h.clone(),
        value,
        witness_initial,
        witness_final,
        mode: CcmwMode::Mixed,
        optimization: result,
    })
}

/// Energy and coherence residual of the pure state defined by raw moduli
/// (normalized here) and d-1 relative phases.
fn pure_energy_and_residual(
    d: usize,
    ham: &[Complex64],
    moduli: &[f64],
    phases: &[f64],
    c_target: f64,
) -> (f64, f64) {
    let norm_sq: f64 = moduli.iter().map(|m| m * m).sum();
    if norm_sq < 1e-24 {
        return (0.0, DEGENERATE_RESIDUAL);
    }
    let norm = norm_sq.sqrt();
    let zero = Complex64::new(0.0, 0.0);
    let mut amps = [zero; MAX_DIM];
    let mut modulus_sum = 0.0;
    for i in 0..d {
        let m = moduli[i] / norm;
        modulus_sum += m;
        amps[i] = if i == 0 {
            Complex64::new(m, 0.0)
        } else {
            Complex64::from_polar(m, phases[i - 1])
        };
    }
    // For nonnegative moduli the l1 coherence collapses to (sum m_i)^2 - 1.
    let residual = modulus_sum * modulus_sum - 1.0 - c_target;
    let mut e = 0.0;
    for i in 0..d {
        let mut row = zero;
        for j in 0..d {
            row += ham[i * d + j] * amps[j];
        }
        e += (amps[i].conj() * row).re;
    }
    (e, residual)
}

/// CCMW over pure states: moduli projected onto the unit sphere inside the
/// objective, relative phases free, coherence of both states constrained.
pub fn ccmw_pure(
    h: &BatteryHamiltonian,
    d: usize,
    c: f64,
    config: &OptimizerConfig,
) -> Result<CcmwEstimate> {
    validate_inputs(h, d, c)?;
    let ham: Vec<Complex64> = h.operator().matrix().entries().to_vec();
    let n = pure_param_count(d);
    let per_state = 2 * d - 1;

    let ham_for_eval = ham.clone();
    let eval = SharedEval::new(Box::new(move |x: &[f64], residuals: &mut [f64; 2]| {
        let (initial, final_) = x.split_at(per_state);
        let (vm, vp) = initial.split_at(d);
        let (wm, wp) = final_.split_at(d);
        let (e_in, r_in) = pure_energy_and_residual(d, &ham_for_eval, vm, vp, c);
        let (e_f, r_f) = pure_energy_and_residual(d, &ham_for_eval, wm, wp, c);
        residuals[0] = r_in;
        residuals[1] = r_f;
        -(e_in - e_f)
    }));

    let mut lower = vec![0.0; n];
    let mut upper = vec![1.0; n];
    for state in 0..2 {
        for j in 0..(d - 1) {
            let idx = state * per_state + d + j;
            lower[idx] = 0.0;
            upper[idx] = TWO_PI;
        }
    }
    let problem = shared_problem(&eval, lower, upper)?;
    let result = isres_minimize(&problem, config);

    let witness = |segment: &[f64]| -> Result<DensityMatrix> {
        let (moduli, phases) = segment.split_at(d);
        let norm = moduli.iter().map(|m| m * m).sum::<f64>().sqrt();
        let normalized: Vec<f64> = if norm < 1e-12 {
            vec![1.0 / (d as f64).sqrt(); d]
        } else {
            moduli.iter().map(|m| m / norm).collect()
        };
        let mut full_phases = vec![0.0; d];
        full_phases[1..].copy_from_slice(phases);
        Ok(pure_from_polar(&normalized, &full_phases)?.density())
    };
    let witness_initial = witness(&result.best_params[..per_state])?;
    let witness_final = witness(&result.best_params[per_state..])?;
    let value = energy(&witness_initial, h.operator())? - energy(&witness_final, h.operator())?;
    Ok(CcmwEstimate {
        dimension: d,
        coherence: c,
        hamiltonian: h.clone(),
        value,
        witness_initial,
        witness_final,
        mode: CcmwMode::Pure,
        optimization: result,
    })
}

/// One row of an analytic-vs-numeric comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyRow {
    pub coherence: f64,
    pub analytic: f64,
    pub numeric: f64,
    pub gap: f64,
}

enum AnalyticRoute {
    Qubit { h1: f64, h3: f64, h2: f64 },
    QutritDiagonal,
    QutritOffDiagonal { alpha: f64 },
}

fn analytic_route(h: &BatteryHamiltonian, d: usize) -> Result<AnalyticRoute> {
    if h.dim() != d {
        return Err(CcmwError::DimensionMismatch {
            left: h.dim(),
            right: d,
        });
    }
    if d == 2 {
        let (h1, h3, h2, _) = h.as_qubit_params()?;
        return Ok(AnalyticRoute::Qubit { h1, h3, h2 });
    }
    if d == 3 {
        match (h.structure(), h.params()) {
            (HamiltonianStructure::Diagonal, HamiltonianParams::Jz) => {
                return Ok(AnalyticRoute::QutritDiagonal)
            }
            (HamiltonianStructure::OffDiagonal, HamiltonianParams::OffDiagonal { alpha, .. }) => {
                return Ok(AnalyticRoute::QutritOffDiagonal { alpha: *alpha })
            }
            _ => {}
        }
    }
    Err(CcmwError::NoAnalyticFormula {
        hamiltonian: h.family().to_string(),
        dim: d,
    })
}

/// Runs the numeric estimator over `coherence_grid` and compares against the
/// matching closed form. Qubits are checked in mixed mode (the closed form
/// covers arbitrary mixed states); the qutrit formulas are pure-state
/// results and are checked in pure mode. Each grid point derives its seed as
/// base_seed + point_index * restarts so restart seeds never collide.
pub fn verify_against_analytic(
    h: &BatteryHamiltonian,
    d: usize,
    coherence_grid: &[f64],
    config: &OptimizerConfig,
) -> Result<Vec<VerifyRow>> {
    let route = analytic_route(h, d)?;
    let mut rows = Vec::with_capacity(coherence_grid.len());
    for (i, &c) in coherence_grid.iter().enumerate() {
        let point_config = OptimizerConfig {
            seed: config
                .seed
                .wrapping_add((i * config.restarts.max(1)) as u64),
            ..*config
        };
        let (analytic, numeric) = match &route {
            AnalyticRoute::Qubit { h1, h3, h2 } => (
                xi2(c, *h1, *h3, *h2)?,
                ccmw_mixed(h, d, c, &point_config)?.value,
            ),
            AnalyticRoute::QutritDiagonal => (
                xi3_diagonal(c)?,
                ccmw_pure(h, d, c, &point_config)?.value,
            ),
            AnalyticRoute::QutritOffDiagonal { alpha } => (
                xi3_offdiagonal(c, *alpha)?,
                ccmw_pure(h, d, c, &point_config)?.value,
            ),
        };
        rows.push(VerifyRow {
            coherence: c,
            analytic,
            numeric,
            gap: numeric - analytic,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{j_mixed, j_offdiagonal, jz, qubit_hamiltonian};
    use crate::linalg::eigendecompose;
    use crate::state::l1_coherence;

    fn quick_config(mode: CcmwMode, d: usize, seed: u64) -> OptimizerConfig {
        // Smaller than the production defaults; unit tests only need the
        // oracle agreement, the acceptance suite runs the full budgets.
        let mut cfg = default_config(mode, d, seed);
        cfg.max_evaluations = cfg.max_evaluations / 2;
        cfg.restarts = 4;
        cfg
    }

    #[test]
    fn rejects_bad_inputs() {
        let h = jz(3).unwrap();
        let cfg = default_config(CcmwMode::Pure, 3, 1);
        assert!(ccmw_pure(&h, 3, 2.5, &cfg).is_err());
        assert!(ccmw_pure(&h, 4, 1.0, &cfg).is_err());
        assert!(ccmw_mixed(&h, 3, -0.1, &cfg).is_err());
    }

    #[test]
    fn qubit_mixed_matches_xi2_at_zero_coherence() {
        let h = qubit_hamiltonian(1.0, -1.0, 0.0, 0.0).unwrap();
        let est = ccmw_mixed(&h, 2, 0.0, &quick_config(CcmwMode::Mixed, 2, 17)).unwrap();
        assert!(est.optimization.converged);
        assert!(
            (est.value - 2.0).abs() < 1e-3,
            "expected 2, got {}",
            est.value
        );
    }

    #[test]
    fn qubit_mixed_matches_xi2_with_offdiagonal() {
        let h = qubit_hamiltonian(2.0, 0.0, 1.0, 0.7).unwrap();
        let c = 0.6;
        let est = ccmw_mixed(&h, 2, c, &quick_config(CcmwMode::Mixed, 2, 29)).unwrap();
        let expected = xi2(c, 2.0, 0.0, 1.0).unwrap();
        assert!(est.optimization.converged);
        assert!(
            (est.value - expected).abs() < 1e-3,
            "expected {expected}, got {}",
            est.value
        );
    }

    #[test]
    fn qutrit_pure_diagonal_midpoint() {
        let h = jz(3).unwrap();
        let est = ccmw_pure(&h, 3, 1.0, &quick_config(CcmwMode::Pure, 3, 5)).unwrap();
        let expected = xi3_diagonal(1.0).unwrap();
        assert!(est.optimization.converged);
        assert!(
            (est.value - expected).abs() < 2e-3,
            "expected {expected}, got {}",
            est.value
        );
    }

    #[test]
    fn qutrit_mixed_vanishes_at_max_coherence() {
        let h = jz(3).unwrap();
        let est = ccmw_mixed(&h, 3, 2.0, &quick_config(CcmwMode::Mixed, 3, 13)).unwrap();
        assert!(est.optimization.converged);
        assert!(est.value.abs() < 1e-3, "expected 0, got {}", est.value);
    }

    #[test]
    fn qutrit_pure_offdiagonal_first_branch() {
        let h = j_offdiagonal(3, 1.0, 0.0).unwrap();
        let est = ccmw_pure(&h, 3, 1.0, &quick_config(CcmwMode::Pure, 3, 23)).unwrap();
        assert!(est.optimization.converged);
        assert!(
            (est.value - 2.0).abs() < 2e-3,
            "expected 2, got {}",
            est.value
        );
    }

    #[test]
    fn pure_d4_diagonal_zero_coherence() {
        let h = jz(4).unwrap();
        let est = ccmw_pure(&h, 4, 0.0, &quick_config(CcmwMode::Pure, 4, 31)).unwrap();
        assert!(est.optimization.converged);
        assert!(
            (est.value - 2.0).abs() < 1e-3,
            "expected 2, got {}",
            est.value
        );
    }

    #[test]
    fn pure_d4_mixed_hamiltonian_scaling_point() {
        let h = j_mixed(4, 1.0, 0.0, 1.0).unwrap();
        let est = ccmw_pure(&h, 4, 3.0, &quick_config(CcmwMode::Pure, 4, 37)).unwrap();
        assert!(est.optimization.converged);
        assert!(
            (est.value - 3.0).abs() < 2e-3,
            "expected 3, got {}",
            est.value
        );
    }

    #[test]
    fn witnesses_are_feasible_and_consistent() {
        let h = jz(3).unwrap();
        let c = 0.8;
        let est = ccmw_pure(&h, 3, c, &quick_config(CcmwMode::Pure, 3, 41)).unwrap();
        assert!(est.optimization.converged);
        let ci = l1_coherence(&est.witness_initial).value();
        let cf = l1_coherence(&est.witness_final).value();
        assert!((ci - c).abs() <= COHERENCE_TOLERANCE + 1e-9);
        assert!((cf - c).abs() <= COHERENCE_TOLERANCE + 1e-9);
        let gap = energy(&est.witness_initial, h.operator()).unwrap()
            - energy(&est.witness_final, h.operator()).unwrap();
        assert!((gap - est.value).abs() < 1e-9);
    }

    #[test]
    fn mixed_witnesses_share_spectra() {
        let h = qubit_hamiltonian(1.0, -1.0, 0.5, 0.0).unwrap();
        let est = ccmw_mixed(&h, 2, 0.4, &quick_config(CcmwMode::Mixed, 2, 43)).unwrap();
        let (si, _) = eigendecompose(est.witness_initial.operator());
        let (sf, _) = eigendecompose(est.witness_final.operator());
        for (a, b) in si.iter().zip(&sf) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn estimates_are_deterministic() {
        let h = jz(3).unwrap();
        let cfg = quick_config(CcmwMode::Pure, 3, 47);
        let a = ccmw_pure(&h, 3, 1.3, &cfg).unwrap();
        let b = ccmw_pure(&h, 3, 1.3, &cfg).unwrap();
        assert_eq!(a.optimization.best_params, b.optimization.best_params);
        assert_eq!(a.optimization.best_value, b.optimization.best_value);
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn verify_routes() {
        let cfg = OptimizerConfig::new(40, 20_000, 3, 2);
        let rows =
            verify_against_analytic(&qubit_hamiltonian(1.0, -1.0, 0.0, 0.0).unwrap(), 2, &[0.0, 0.5], &cfg)
                .unwrap();
        assert_eq!(rows.len(), 2);
        assert!((rows[0].analytic - 2.0).abs() < 1e-12);

        assert!(matches!(
            verify_against_analytic(&jz(5).unwrap(), 5, &[0.0], &cfg),
            Err(CcmwError::NoAnalyticFormula { .. })
        ));
        assert!(matches!(
            verify_against_analytic(&j_mixed(3, 1.0, 0.0, 1.0).unwrap(), 3, &[0.0], &cfg),
            Err(CcmwError::NoAnalyticFormula { .. })
        ));
    }
}
