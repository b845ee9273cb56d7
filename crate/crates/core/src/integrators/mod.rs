//! Single-step maps and trajectory composition.
//!
//! Every stepper maps a phase point to a phase point and reports
//! `log |det ∂(q̃, p̃)/∂(q, p)|` for that step. Euclidean and generalized
//! leapfrog are symplectic and report exactly zero. The two Lagrangian
//! steppers work in velocity form; their reported value is the `(q, v)`
//! Jacobian plus the metric log-determinant ratio of the Legendre maps at
//! either end.

mod euclidean;
mod generalized;
mod lagrangian;

use std::fmt;

pub use euclidean::{inverted_leapfrog_step, standard_leapfrog_step};
pub use generalized::generalized_leapfrog_step;
pub use lagrangian::{inverted_lagrangian_leapfrog_step, lagrangian_leapfrog_step};

use crate::error::{GeomcError, Result};
use crate::geometry::{MetricModel, PhasePoint};

/// Any coordinate beyond this magnitude marks the step as diverged.
pub const COORDINATE_LIMIT: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub step_size: f64,
    pub num_steps: usize,
    /// Convergence threshold on the ∞-norm change between fixed-point iterates.
    pub fixed_point_tol: f64,
    pub fixed_point_max_iters: usize,
}

impl IntegratorConfig {
    pub const DEFAULT_FIXED_POINT_TOL: f64 = 1e-6;
    pub const DEFAULT_FIXED_POINT_MAX_ITERS: usize = 100;

    pub fn new(step_size: f64, num_steps: usize) -> Self {
        Self {
            step_size,
            num_steps,
            fixed_point_tol: Self::DEFAULT_FIXED_POINT_TOL,
            fixed_point_max_iters: Self::DEFAULT_FIXED_POINT_MAX_ITERS,
        }
    }

    pub fn with_fixed_point(mut self, tol: f64, max_iters: usize) -> Self {
        self.fixed_point_tol = tol;
        self.fixed_point_max_iters = max_iters;
        self
    }

    /// Same settings with the step size negated.
    pub fn reversed(mut self) -> Self {
        self.step_size = -self.step_size;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.step_size == 0.0 || !self.step_size.is_finite() {
            return Err(GeomcError::invalid("step_size", "must be finite and non-zero"));
        }
        if self.num_steps == 0 {
            return Err(GeomcError::invalid("num_steps", "must be positive"));
        }
        if !(self.fixed_point_tol > 0.0) {
            return Err(GeomcError::invalid("fixed_point_tol", "must be positive"));
        }
        if self.fixed_point_max_iters == 0 {
            return Err(GeomcError::invalid("fixed_point_max_iters", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct StepResult {
    pub next: PhasePoint,
    /// `log |det ∂(q̃, p̃)/∂(q, p)|`.
    pub log_abs_jacobian: f64,
    /// `log det G(q̃) - log det G(q)`, the part of `log_abs_jacobian` due to the
    /// Legendre maps. Zero for symplectic steppers, which never split it out.
    pub metric_log_det_ratio: f64,
    /// Largest iteration count of any fixed-point solve in the step(s).
    pub fixed_point_iters: usize,
    /// Number of `det(Id ± c Ω)` evaluations performed.
    pub omega_determinants: usize,
    pub diverged: bool,
}

impl StepResult {
    /// Jacobian contribution of the `Ω` determinants alone.
    pub fn omega_log_abs_jacobian(&self) -> f64 {
        self.log_abs_jacobian - self.metric_log_det_ratio
    }
}

/// A one-step map of phase space.
pub trait Stepper: Send + Sync {
    fn name(&self) -> &'static str;

    /// Whether the stepper carries velocity rather than momentum between steps.
    fn uses_velocity(&self) -> bool;

    /// Takes one step of size `cfg.step_size`. Divergence is reported as an
    /// error for which [`GeomcError::is_divergence`] holds.
    fn step(&self, model: &dyn MetricModel, state: &PhasePoint, cfg: &IntegratorConfig) -> Result<StepResult>;

    /// The Euclidean integrator this stepper must reduce to when `G ≡ Id`.
    fn euclidean_counterpart(&self) -> Option<Integrator> {
        None
    }

    /// Whether the step solves fixed-point equations, so that its output is
    /// only accurate to the fixed-point tolerance.
    fn is_implicit(&self) -> bool {
        false
    }
}

impl<S: Stepper + ?Sized> Stepper for &S {
    fn name(&self) -> &'static str {
        (**self).name()
    }
    fn uses_velocity(&self) -> bool {
        (**self).uses_velocity()
    }
    fn step(&self, model: &dyn MetricModel, state: &PhasePoint, cfg: &IntegratorConfig) -> Result<StepResult> {
        (**self).step(model, state, cfg)
    }
    fn euclidean_counterpart(&self) -> Option<Integrator> {
        (**self).euclidean_counterpart()
    }
    fn is_implicit(&self) -> bool {
        (**self).is_implicit()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Integrator {
    StandardLeapfrog,
    InvertedLeapfrog,
    GeneralizedLeapfrog,
    LagrangianLeapfrog,
    InvertedLagrangianLeapfrog,
}

impl Integrator {
    pub const ALL: [Integrator; 5] = [
        Integrator::StandardLeapfrog,
        Integrator::InvertedLeapfrog,
        Integrator::GeneralizedLeapfrog,
        Integrator::LagrangianLeapfrog,
        Integrator::InvertedLagrangianLeapfrog,
    ];

    pub fn is_explicit(self) -> bool {
        self != Integrator::GeneralizedLeapfrog
    }

    pub fn is_volume_preserving(self) -> bool {
        !matches!(
            self,
            Integrator::LagrangianLeapfrog | Integrator::InvertedLagrangianLeapfrog
        )
    }
}

impl fmt::Display for Integrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Stepper for Integrator {
    fn name(&self) -> &'static str {
        match self {
            Integrator::StandardLeapfrog => "leapfrog",
            Integrator::InvertedLeapfrog => "inverted-leapfrog",
            Integrator::GeneralizedLeapfrog => "generalized-leapfrog",
            Integrator::LagrangianLeapfrog => "lagrangian-leapfrog",
            Integrator::InvertedLagrangianLeapfrog => "inverted-lagrangian-leapfrog",
        }
    }

    fn uses_velocity(&self) -> bool {
        !self.is_volume_preserving()
    }

    fn step(&self, model: &dyn MetricModel, state: &PhasePoint, cfg: &IntegratorConfig) -> Result<StepResult> {
        match self {
            Integrator::StandardLeapfrog => standard_leapfrog_step(model, state, cfg),
            Integrator::InvertedLeapfrog => inverted_leapfrog_step(model, state, cfg),
            Integrator::GeneralizedLeapfrog => generalized_leapfrog_step(model, state, cfg),
            Integrator::LagrangianLeapfrog => lagrangian_leapfrog_step(model, state, cfg),
            Integrator::InvertedLagrangianLeapfrog => inverted_lagrangian_leapfrog_step(model, state, cfg),
        }
    }

    fn euclidean_counterpart(&self) -> Option<Integrator> {
        Some(match self {
            Integrator::InvertedLeapfrog | Integrator::InvertedLagrangianLeapfrog => Integrator::InvertedLeapfrog,
            _ => Integrator::StandardLeapfrog,
        })
    }

    fn is_implicit(&self) -> bool {
        !self.is_explicit()
    }
}

/// Composes `cfg.num_steps` steps.
///
/// Velocity steppers convert momentum to velocity once at the start and back
/// once at the end; the metric log-determinant ratios of the intermediate
/// steps telescope, so only the endpoint ratio enters the total. A divergent
/// step ends the trajectory and returns the starting point with
/// `diverged = true`. Errors that are not divergences are propagated.
pub fn integrate_trajectory<S: Stepper + ?Sized>(
    model: &dyn MetricModel,
    stepper: &S,
    state: &PhasePoint,
    cfg: &IntegratorConfig,
) -> Result<StepResult> {
    cfg.validate()?;
    match run_steps(model, stepper, state, cfg) {
        Ok(result) => Ok(result),
        Err(e) if e.is_divergence() => Ok(StepResult {
            next: state.clone(),
            log_abs_jacobian: 0.0,
            metric_log_det_ratio: 0.0,
            fixed_point_iters: 0,
            omega_determinants: 0,
            diverged: true,
        }),
        Err(e) => Err(e),
    }
}

fn run_steps<S: Stepper + ?Sized>(
    model: &dyn MetricModel,
    stepper: &S,
    state: &PhasePoint,
    cfg: &IntegratorConfig,
) -> Result<StepResult> {
    let mut current = if stepper.uses_velocity() {
        state.clone().ensure_velocity(model)?
    } else {
        state.clone().ensure_momentum(model)?
    };
    let mut omega_part = 0.0;
    let mut iters = 0;
    let mut dets = 0;
    for _ in 0..cfg.num_steps {
        let step = stepper.step(model, &current, cfg)?;
        omega_part += step.omega_log_abs_jacobian();
        iters = iters.max(step.fixed_point_iters);
        dets += step.omega_determinants;
        current = step.next;
    }
    let metric_log_det_ratio = if stepper.uses_velocity() {
        current.geometry().log_det_metric(model)? - state.geometry().log_det_metric(model)?
    } else {
        0.0
    };
    let next = current.ensure_momentum(model)?;
    check_state(next.q(), next.stored_momentum().unwrap_or(&[]))?;
    Ok(StepResult {
        next,
        log_abs_jacobian: omega_part + metric_log_det_ratio,
        metric_log_det_ratio,
        fixed_point_iters: iters,
        omega_determinants: dets,
        diverged: false,
    })
}

/// Divergence guard applied to every step's output.
pub(crate) fn check_state(q: &[f64], w: &[f64]) -> Result<()> {
    for (name, xs) in [("position", q), ("momentum/velocity", w)] {
        if let Some(x) = xs.iter().find(|x| !x.is_finite() || x.abs() > COORDINATE_LIMIT) {
            return Err(GeomcError::NonFiniteState {
                reason: format!("{name} coordinate {x:e}"),
            });
        }
    }
    Ok(())
}

pub(crate) fn axpy(a: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(xi, yi)| a * xi + yi).collect()
}
