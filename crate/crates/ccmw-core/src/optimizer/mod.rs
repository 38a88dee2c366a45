//! Constrained global optimization reproducing the numerical work-extraction
//! protocol: bounded parameter vectors, equality constraints handled by
//! stochastic ranking, and a seeded multi-restart evolution strategy.

mod ccmw;
mod isres;

pub use ccmw::{
    ccmw_mixed, ccmw_pure, default_budget, default_config, mixed_param_count, pure_param_count,
    verify_against_analytic, CcmwEstimate, CcmwMode, VerifyRow,
};
pub use isres::isres_minimize;

use crate::error::{CcmwError, Result};

pub type ObjectiveFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A bounded minimization problem with equality constraints h_j(x) = 0.
///
/// A point is feasible when every |h_j(x)| is at most `constraint_tolerance`;
/// the ranking penalty is sum_j max(0, |h_j(x)| - tolerance)^2.
pub struct OptimizationProblem {
    num_params: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    objective: ObjectiveFn,
    equality_constraints: Vec<ObjectiveFn>,
    constraint_tolerance: f64,
}

impl OptimizationProblem {
    pub fn new(
        lower: Vec<f64>,
        upper: Vec<f64>,
        objective: ObjectiveFn,
        equality_constraints: Vec<ObjectiveFn>,
        constraint_tolerance: f64,
    ) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(CcmwError::InvalidProblem(
                "bounds must be nonempty and of equal length".into(),
            ));
        }
        for (lo, hi) in lower.iter().zip(&upper) {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(CcmwError::InvalidProblem(format!(
                    "bounds must be finite with lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        if !(constraint_tolerance > 0.0) {
            return Err(CcmwError::InvalidProblem(
                "constraint tolerance must be positive".into(),
            ));
        }
        Ok(Self {
            num_params: lower.len(),
            lower,
            upper,
            objective,
            equality_constraints,
            constraint_tolerance,
        })
    }

    #[inline]
    pub fn num_params(&self) -> usize {
        self.num_params
    }

    #[inline]
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    #[inline]
    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    #[inline]
    pub fn constraint_tolerance(&self) -> f64 {
        self.constraint_tolerance
    }

    /// Objective, stochastic-ranking penalty, and worst constraint residual.
    pub fn evaluate(&self, x: &[f64]) -> Evaluation {
        let mut residuals = Vec::with_capacity(self.equality_constraints.len());
        let objective = self.evaluate_into(x, &mut residuals);
        let mut penalty = 0.0;
        let mut max_violation = 0.0f64;
        for residual in residuals {
            max_violation = max_violation.max(residual);
            let excess = (residual - self.constraint_tolerance).max(0.0);
            penalty += excess * excess;
        }
        Evaluation {
            objective,
            penalty,
            max_violation,
        }
    }

    /// Objective value, with the absolute constraint residuals written into
    /// `residuals` (cleared first).
    pub(crate) fn evaluate_into(&self, x: &[f64], residuals: &mut Vec<f64>) -> f64 {
        residuals.clear();
        for h in &self.equality_constraints {
            residuals.push(h(x).abs());
        }
        (self.objective)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    pub penalty: f64,
    pub max_violation: f64,
}

impl Evaluation {
    #[inline]
    pub fn feasible(&self) -> bool {
        self.penalty == 0.0
    }
}

/// Run parameters for [`isres_minimize`].
///
/// `max_evaluations` is the total objective budget for the call, split evenly
/// across `restarts` independent runs seeded `seed`, `seed + 1`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptimizerConfig {
    pub population: usize,
    pub max_evaluations: usize,
    pub seed: u64,
    pub restarts: usize,
}

impl OptimizerConfig {
    pub fn new(population: usize, max_evaluations: usize, seed: u64, restarts: usize) -> Self {
        Self {
            population: population.max(4),
            max_evaluations,
            seed,
            restarts: restarts.max(1),
        }
    }
}

/// The best point found: feasible with least objective when any feasible
/// point was seen, otherwise the least-infeasible point.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best_params: Vec<f64>,
    pub best_value: f64,
    pub max_constraint_violation: f64,
    pub evaluations_used: usize,
    pub seed: u64,
    pub converged: bool,
}
