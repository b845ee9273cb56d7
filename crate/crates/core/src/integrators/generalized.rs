use super::{axpy, check_state, IntegratorConfig, StepResult};
use crate::error::{GeomcError, Result};
use crate::geometry::{MetricModel, PhasePoint, PointGeometry};
use crate::linalg::norm_inf_diff;

/// `∂H/∂q` at `q` for momentum `p`: `∇U - ½ [vᵀ g_k v]_k` with `v = G⁻¹ p`.
fn position_force<M: MetricModel + ?Sized>(model: &M, geom: &PointGeometry, p: &[f64]) -> Result<Vec<f64>> {
    let v = geom.solve_metric(model, p)?;
    let grad_u = geom.grad_potential(model)?;
    let partials = geom.partials(model)?;
    Ok(grad_u
        .iter()
        .zip(partials)
        .map(|(gu, gk)| gu - 0.5 * gk.bilinear(&v, &v))
        .collect())
}

/// Iterates `x ← f(x)` from `x0` until the ∞-norm change drops below the
/// tolerance. Returns the fixed point and the number of iterations used.
fn fixed_point(
    x0: Vec<f64>,
    cfg: &IntegratorConfig,
    mut f: impl FnMut(&[f64]) -> Result<Vec<f64>>,
) -> Result<(Vec<f64>, usize)> {
    let mut x = x0;
    let mut change = f64::INFINITY;
    for iter in 1..=cfg.fixed_point_max_iters {
        let next = f(&x)?;
        change = norm_inf_diff(&next, &x);
        x = next;
        if !change.is_finite() {
            break;
        }
        if change < cfg.fixed_point_tol {
            return Ok((x, iter));
        }
    }
    Err(GeomcError::FixedPointDivergence {
        iters: cfg.fixed_point_max_iters,
        change,
    })
}

/// Implicit half kick, implicit drift, explicit half kick.
///
/// The second half kick is evaluated at the new position `q̃`.
pub fn generalized_leapfrog_step<M: MetricModel + ?Sized>(
    model: &M,
    state: &PhasePoint,
    cfg: &IntegratorConfig,
) -> Result<StepResult> {
    let eps = cfg.step_size;
    let half = 0.5 * eps;
    let geom = state.geometry();
    let p = state.momentum(model)?;

    let (p_half, iters_p) = fixed_point(p.clone(), cfg, |ph| {
        let force = position_force(model, geom, ph)?;
        Ok(axpy(-half, &force, &p))
    })?;

    let v_start = geom.solve_metric(model, &p_half)?;
    let (q_new, iters_q) = fixed_point(state.q().to_vec(), cfg, |qt| {
        let g = PointGeometry::new(model, qt.to_vec())?;
        let v_end = g.solve_metric(model, &p_half)?;
        let out: Vec<f64> = state
            .q()
            .iter()
            .zip(v_start.iter().zip(&v_end))
            .map(|(q, (a, b))| q + half * (a + b))
            .collect();
        check_state(&out, &p_half)?;
        Ok(out)
    })?;
    let geom_new = PointGeometry::new(model, q_new)?;

    let force = position_force(model, &geom_new, &p_half)?;
    let p_new = axpy(-half, &force, &p_half);
    check_state(geom_new.q(), &p_new)?;
    Ok(StepResult {
        next: PhasePoint::with_momentum(geom_new, p_new)?,
        log_abs_jacobian: 0.0,
        metric_log_det_ratio: 0.0,
        fixed_point_iters: iters_p.max(iters_q),
        omega_determinants: 0,
        diverged: false,
    })
}
