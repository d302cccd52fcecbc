//! Constrained Rayleigh-quotient eigenvalues.
//!
//! Two linear constraints matter here: mean-zero (a·u = 0 with a = M1) and
//! curvature-zero (d·u = 0). Both problems minimize u·Lu / u·Mu over the
//! constraint plane. The dichotomy: the curvature-zero eigenvalue is
//! positive exactly when the Euler characteristic is nonzero; when χ = 0
//! the constants are feasible and the infimum is 0.
//!
//! Algorithm: inverse iteration with the constraint enforced by projection
//! along constants (project - apply - project). One linear constraint does
//! not justify a general sparse eigenpackage.

use thiserror::Error;

use crate::linalg::{conjugate_gradient, dot, norm2};
use crate::operators::{ConstrainedField, OperatorError, Operators};

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("inner linear solve stalled (relative residual {residual:.3e})")]
    InnerSolve { residual: f64 },
    #[error("eigenvalue {lambda} is not positive")]
    NonPositiveLambda { lambda: f64 },
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    MeanZero,
    CurvatureZero,
}

#[derive(Debug, Clone)]
pub struct EigenResult {
    pub value: f64,
    pub vector: Vec<f64>,
    pub constraint: ConstraintKind,
    /// ‖L v - value · M v - nu · c‖ with the least-squares multiplier nu.
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct EigenSettings {
    pub value_tol: f64,
    pub residual_tol: f64,
    pub max_iterations: usize,
    pub inner_tol: f64,
    pub inner_max_iterations: usize,
}

impl Default for EigenSettings {
    fn default() -> Self {
        Self {
            value_tol: 1e-12,
            residual_tol: 1e-8,
            max_iterations: 10_000,
            inner_tol: 1e-13,
            inner_max_iterations: 200_000,
        }
    }
}

/// Smallest eigenvalue of the pencil (L, M) over { (M1)·u = 0 }.
pub fn mean_zero_eigenvalue(ops: &Operators) -> Result<EigenResult, SpectrumError> {
    let constraint = ops.mass_vector();
    constrained_smallest(ops, &constraint, ConstraintKind::MeanZero, &EigenSettings::default())
}

/// Smallest eigenvalue of the pencil (L, M) over { d·u = 0 }.
///
/// When Σ d_i = 2πχ vanishes, constants are feasible with zero energy, so
/// the value is 0 with a constant eigenvector and no iteration runs. The
/// computed value is cached on the operators, making later alpha checks
/// strict.
pub fn curvature_zero_eigenvalue(ops: &Operators) -> Result<EigenResult, SpectrumError> {
    let defect_sum: f64 = ops.defects().iter().sum();
    if defect_sum.abs() < 1e-9 {
        // χ = 0: constants lie in the constraint set
        let n = ops.n();
        let c = 1.0 / ops.volume().sqrt();
        ops.cache_constrained_eigenvalue(0.0);
        return Ok(EigenResult {
            value: 0.0,
            vector: vec![c; n],
            constraint: ConstraintKind::CurvatureZero,
            residual: 0.0,
            iterations: 0,
        });
    }
    let constraint = ops.defects().to_vec();
    let result = constrained_smallest(
        ops,
        &constraint,
        ConstraintKind::CurvatureZero,
        &EigenSettings::default(),
    )?;
    ops.cache_constrained_eigenvalue(result.value);
    Ok(result)
}

fn constrained_smallest(
    ops: &Operators,
    constraint: &[f64],
    kind: ConstraintKind,
    settings: &EigenSettings,
) -> Result<EigenResult, SpectrumError> {
    let n = ops.n();
    let c_dot_one: f64 = constraint.iter().sum();
    debug_assert!(c_dot_one.abs() > 0.0, "constraint must pair with constants");

    // deterministic seed: index-weighted ramp, projected and normalized
    let mut v: Vec<f64> = (0..n).map(|i| (i + 1) as f64).collect();
    project_constraint(&mut v, constraint, c_dot_one);
    normalize_mass(ops, &mut v);

    let stiffness = ops.stiffness();
    let mean_project = |r: &mut [f64]| {
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        for x in r.iter_mut() {
            *x -= mean;
        }
    };

    let mut lambda_prev = f64::INFINITY;
    let mut last_residual = f64::INFINITY;
    for it in 1..=settings.max_iterations {
        // rhs = M v, made compatible with the kernel of L along constants
        let mut rhs: Vec<f64> = (0..n).map(|i| ops.mass()[i] * v[i]).collect();
        let t = rhs.iter().sum::<f64>() / c_dot_one;
        for (r, &c) in rhs.iter_mut().zip(constraint) {
            *r -= t * c;
        }
        let (mut x, stats) = conjugate_gradient(
            |p, y| stiffness.mul_vec(p, y),
            &rhs,
            settings.inner_tol,
            settings.inner_max_iterations,
            Some(mean_project),
        );
        if !stats.rel_residual.is_finite() || stats.rel_residual > 1e-8 {
            return Err(SpectrumError::InnerSolve {
                residual: stats.rel_residual,
            });
        }
        project_constraint(&mut x, constraint, c_dot_one);
        normalize_mass(ops, &mut x);
        v = x;

        let lv = stiffness.mul_vec_alloc(&v);
        let lambda = dot(&v, &lv);
        let (residual, _nu) = eigen_residual(ops, &v, lambda, constraint);
        last_residual = residual;
        let rel_change = (lambda - lambda_prev).abs() / lambda.abs().max(f64::MIN_POSITIVE);
        if rel_change < settings.value_tol && residual <= settings.residual_tol * norm2(&lv) {
            return Ok(EigenResult {
                value: lambda,
                vector: v,
                constraint: kind,
                residual,
                iterations: it,
            });
        }
        lambda_prev = lambda;
    }
    Err(SpectrumError::NonConvergence {
        iterations: settings.max_iterations,
        residual: last_residual,
    })
}

/// Subtract the multiple of the constant vector that restores c·v = 0.
fn project_constraint(v: &mut [f64], constraint: &[f64], c_dot_one: f64) {
    let t = dot(constraint, v) / c_dot_one;
    for x in v.iter_mut() {
        *x -= t;
    }
}

fn normalize_mass(ops: &Operators, v: &mut [f64]) {
    let m = ops.mass_inner(v, v).sqrt();
    for x in v.iter_mut() {
        *x /= m;
    }
}

/// ‖L v - λ M v - ν c‖ with ν the least-squares multiplier.
pub fn eigen_residual(ops: &Operators, v: &[f64], lambda: f64, constraint: &[f64]) -> (f64, f64) {
    let mut r = ops.stiffness().mul_vec_alloc(v);
    for i in 0..v.len() {
        r[i] -= lambda * ops.mass()[i] * v[i];
    }
    let nu = dot(constraint, &r) / dot(constraint, constraint);
    for (x, &c) in r.iter_mut().zip(constraint) {
        *x -= nu * c;
    }
    (norm2(&r), nu)
}

#[derive(Debug, Clone, Copy)]
pub struct PoincareSlack {
    pub slack: f64,
    pub ok: bool,
}

/// Check u·Mu ≤ (1/λ) u·Lu for a constrained field; the slack is
/// (1/λ) u·Lu - u·Mu and must not be below -1e-10.
pub fn poincare_check(
    ops: &Operators,
    field: &ConstrainedField,
    lambda: f64,
) -> Result<PoincareSlack, SpectrumError> {
    if lambda <= 0.0 {
        return Err(SpectrumError::NonPositiveLambda { lambda });
    }
    let energy = ops.dirichlet_energy(&field.values)?;
    let mass = ops.mass_inner(&field.values, &field.values);
    let slack = energy / lambda - mass;
    Ok(PoincareSlack {
        slack,
        ok: slack >= -1e-10,
    })
}
