//! Leapfrog for `H = U(q) + pᵀp/2`. The metric is taken to be the identity
//! and is never evaluated, so `U = -L` and `v = p`.

use super::{axpy, check_state, IntegratorConfig, StepResult};
use crate::error::Result;
use crate::geometry::{MetricModel, PhasePoint, PointGeometry};

fn grad_u<M: MetricModel + ?Sized>(model: &M, q: &[f64]) -> Vec<f64> {
    model.grad_log_density(q).into_iter().map(|g| -g).collect()
}

fn finish<M: MetricModel + ?Sized>(model: &M, q: Vec<f64>, p: Vec<f64>) -> Result<StepResult> {
    check_state(&q, &p)?;
    let geometry = PointGeometry::new(model, q)?;
    Ok(StepResult {
        next: PhasePoint::with_momentum(geometry, p)?,
        log_abs_jacobian: 0.0,
        metric_log_det_ratio: 0.0,
        fixed_point_iters: 0,
        omega_determinants: 0,
        diverged: false,
    })
}

/// Half kick, drift, half kick.
pub fn standard_leapfrog_step<M: MetricModel + ?Sized>(
    model: &M,
    state: &PhasePoint,
    cfg: &IntegratorConfig,
) -> Result<StepResult> {
    let eps = cfg.step_size;
    let p = state.momentum(model)?;
    let p_half = axpy(-0.5 * eps, &grad_u(model, state.q()), &p);
    let q_new = axpy(eps, &p_half, state.q());
    check_state(&q_new, &p_half)?;
    if !model.in_domain(&q_new) {
        return Err(crate::GeomcError::OutOfDomain { q: q_new });
    }
    let p_new = axpy(-0.5 * eps, &grad_u(model, &q_new), &p_half);
    finish(model, q_new, p_new)
}

/// Half drift, kick at the midpoint, half drift.
pub fn inverted_leapfrog_step<M: MetricModel + ?Sized>(
    model: &M,
    state: &PhasePoint,
    cfg: &IntegratorConfig,
) -> Result<StepResult> {
    let eps = cfg.step_size;
    let p = state.momentum(model)?;
    let q_mid = axpy(0.5 * eps, &p, state.q());
    check_state(&q_mid, &p)?;
    if !model.in_domain(&q_mid) {
        return Err(crate::GeomcError::OutOfDomain { q: q_mid });
    }
    let p_new = axpy(-eps, &grad_u(model, &q_mid), &p);
    let q_new = axpy(0.5 * eps, &p_new, &q_mid);
    finish(model, q_new, p_new)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{propagator, HarmonicModel, LeapfrogVariant};

    #[test]
    fn matches_propagators_on_the_oscillator() {
        let omega = 1.7;
        let model = HarmonicModel::new(omega, 1).unwrap();
        let cfg = IntegratorConfig::new(0.3, 1);
        let (q, p) = (0.8, -0.4);
        let state = PhasePoint::from_momentum(&model, vec![q], vec![p]).unwrap();
        for (variant, out) in [
            (LeapfrogVariant::Standard, standard_leapfrog_step(&model, &state, &cfg).unwrap()),
            (LeapfrogVariant::Inverted, inverted_leapfrog_step(&model, &state, &cfg).unwrap()),
        ] {
            let r = propagator(omega, 0.3, variant);
            let next_p = out.next.stored_momentum().unwrap()[0];
            assert!((out.next.q()[0] - (r[0][0] * q + r[0][1] * p)).abs() < 1e-14);
            assert!((next_p - (r[1][0] * q + r[1][1] * p)).abs() < 1e-14);
        }
    }
}
