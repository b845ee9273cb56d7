//! Explicit integrators of the Euler-Lagrange equations in velocity form.
//!
//! Both steppers solve linear systems in `Id + cΩ` by PLU, so the "plus"
//! determinants come free from the solve; the "minus" determinants need one
//! extra factorization each.

use super::{axpy, check_state, IntegratorConfig, StepResult};
use crate::error::Result;
use crate::geometry::{MetricModel, PhasePoint, PointGeometry};
use crate::linalg::DenseMatrix;

/// `G⁻¹ ∇U` at a point.
fn natural_gradient<M: MetricModel + ?Sized>(model: &M, geom: &PointGeometry) -> Result<Vec<f64>> {
    let grad = geom.grad_potential(model)?.to_vec();
    geom.solve_metric(model, &grad)
}

/// Solves `(Id + Ω) x = b` and returns `x` together with `log |det(Id + Ω)|`.
fn solve_plus(omega: &DenseMatrix, b: &[f64]) -> Result<(Vec<f64>, f64)> {
    let lu = omega.identity_plus(1.0).plu()?;
    let x = lu.solve(b)?;
    Ok((x, lu.log_abs_det()?.log_abs))
}

fn log_abs_det_minus(omega: &DenseMatrix) -> Result<f64> {
    Ok(omega.identity_plus(-1.0).plu()?.log_abs_det()?.log_abs)
}

fn finish<M: MetricModel + ?Sized>(
    model: &M,
    start: &PointGeometry,
    geom_new: PointGeometry,
    v_new: Vec<f64>,
    omega_log_det: f64,
    omega_determinants: usize,
) -> Result<StepResult> {
    check_state(geom_new.q(), &v_new)?;
    let ratio = geom_new.log_det_metric(model)? - start.log_det_metric(model)?;
    Ok(StepResult {
        next: PhasePoint::with_velocity(geom_new, v_new)?,
        log_abs_jacobian: omega_log_det + ratio,
        metric_log_det_ratio: ratio,
        fixed_point_iters: 0,
        omega_determinants,
        diverged: false,
    })
}

/// One step:
///
/// ```text
/// v̆ = (Id + Ω(ε, q, v))⁻¹ (v - ε/2 G⁻¹(q) ∇U(q))
/// q̃ = q + ε v̆
/// ṽ = (Id + Ω(ε, q̃, v̆))⁻¹ (v̆ - ε/2 G⁻¹(q̃) ∇U(q̃))
/// ```
///
/// The `(q, v)` Jacobian is
/// `det(Id - Ω(q̃, ṽ)) det(Id - Ω(q, v̆)) / (det(Id + Ω(q̃, v̆)) det(Id + Ω(q, v)))`.
pub fn lagrangian_leapfrog_step<M: MetricModel + ?Sized>(
    model: &M,
    state: &PhasePoint,
    cfg: &IntegratorConfig,
) -> Result<StepResult> {
    let eps = cfg.step_size;
    let geom = state.geometry();
    let v = state.velocity(model)?;

    let omega_start = geom.omega(model, eps, &v)?;
    let rhs = axpy(-0.5 * eps, &natural_gradient(model, geom)?, &v);
    let (v_half, plus_start) = solve_plus(&omega_start, &rhs)?;
    let minus_start = log_abs_det_minus(&geom.omega(model, eps, &v_half)?)?;

    let q_new = axpy(eps, &v_half, state.q());
    check_state(&q_new, &v_half)?;
    let geom_new = PointGeometry::new(model, q_new)?;

    let omega_end = geom_new.omega(model, eps, &v_half)?;
    let rhs = axpy(-0.5 * eps, &natural_gradient(model, &geom_new)?, &v_half);
    let (v_new, plus_end) = solve_plus(&omega_end, &rhs)?;
    let minus_end = log_abs_det_minus(&geom_new.omega(model, eps, &v_new)?)?;

    let log_det = minus_end + minus_start - plus_end - plus_start;
    finish(model, geom, geom_new, v_new, log_det, 4)
}

/// One step:
///
/// ```text
/// q̆ = q + ε/2 v
/// ṽ = (Id + 2Ω(ε, q̆, v))⁻¹ (v - ε G⁻¹(q̆) ∇U(q̆))
/// q̃ = q̆ + ε/2 ṽ
/// ```
///
/// The `(q, v)` Jacobian is `det(Id - 2Ω(ε, q̆, ṽ)) / det(Id + 2Ω(ε, q̆, v))`.
pub fn inverted_lagrangian_leapfrog_step<M: MetricModel + ?Sized>(
    model: &M,
    state: &PhasePoint,
    cfg: &IntegratorConfig,
) -> Result<StepResult> {
    let eps = cfg.step_size;
    let v = state.velocity(model)?;

    let q_mid = axpy(0.5 * eps, &v, state.q());
    check_state(&q_mid, &v)?;
    let geom_mid = PointGeometry::new(model, q_mid)?;

    // 2Ω(ε, ·, ·) = Ω(2ε, ·, ·).
    let omega_v = geom_mid.omega(model, 2.0 * eps, &v)?;
    let rhs = axpy(-eps, &natural_gradient(model, &geom_mid)?, &v);
    let (v_new, plus) = solve_plus(&omega_v, &rhs)?;
    let minus = log_abs_det_minus(&geom_mid.omega(model, 2.0 * eps, &v_new)?)?;

    let q_new = axpy(0.5 * eps, &v_new, geom_mid.q());
    check_state(&q_new, &v_new)?;
    let geom_new = PointGeometry::new(model, q_new)?;
    finish(model, state.geometry(), geom_new, v_new, minus - plus, 2)
}
