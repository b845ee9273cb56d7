//! Numerical checks of integrator order, Jacobians, structure properties and
//! robustness to misspecified metric derivatives.

use serde::Serialize;

use crate::diagnostics::{self, ks_ergodicity, DEFAULT_KS_DIRECTIONS};
use crate::error::{GeomcError, Result};
use crate::geometry::{MetricModel, PhasePoint, PointGeometry};
use crate::integrators::{integrate_trajectory, IntegratorConfig, Stepper};
use crate::linalg::DenseMatrix;
use crate::models::{EuclideanView, GeodesicModel, HarmonicModel, MisspecifiedModel, ReferenceSampler};
use crate::sampler::{chain_rng, resample_momentum, run_chain, ChainConfig, Method};

/// Step sizes `2⁻⁴, …, 2⁻¹²`.
pub fn default_order_grid() -> Vec<f64> {
    (4..=12).map(|k| 2f64.powi(-k)).collect()
}

/// Non-squared local errors below this are treated as float noise and the
/// slope fit is rejected.
pub const ORDER_NOISE_FLOOR: f64 = 1e-14;

/// Fixed-point settings used for implicit steppers in the order study. The
/// sampling default of 1e-6 would swamp the `ε³` local error at small `ε`.
pub const ORDER_STUDY_FIXED_POINT_TOL: f64 = 1e-14;
pub const ORDER_STUDY_FIXED_POINT_MAX_ITERS: usize = 1000;

/// Systems with a known exact flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderSystem {
    /// `H = q² p² / 2`.
    Geodesic { q0: f64, p0: f64 },
    /// One-dimensional oscillator with frequency `omega` and identity metric.
    Harmonic { omega: f64, q0: f64, p0: f64 },
}

impl Default for OrderSystem {
    fn default() -> Self {
        OrderSystem::Geodesic { q0: 1.0, p0: 1.0 }
    }
}

impl OrderSystem {
    pub fn model(&self) -> Result<Box<dyn MetricModel>> {
        Ok(match *self {
            OrderSystem::Geodesic { .. } => Box::new(GeodesicModel),
            OrderSystem::Harmonic { omega, .. } => Box::new(HarmonicModel::new(omega, 1)?),
        })
    }

    pub fn initial(&self) -> (f64, f64) {
        match *self {
            OrderSystem::Geodesic { q0, p0 } | OrderSystem::Harmonic { q0, p0, .. } => (q0, p0),
        }
    }

    /// Exact `(q, v)` at time `t`.
    pub fn exact(&self, t: f64) -> (f64, f64) {
        match *self {
            OrderSystem::Geodesic { q0, p0 } => GeodesicModel::exact_flow(q0, p0, t),
            OrderSystem::Harmonic { omega, q0, p0 } => {
                let (s, c) = (omega * t).sin_cos();
                (q0 * c + p0 / omega * s, -q0 * omega * s + p0 * c)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderStudyResult {
    pub step_sizes: Vec<f64>,
    /// `‖q̂ - q‖² + ‖v̂ - v‖²` after one step.
    pub local_errors: Vec<f64>,
    /// Least-squares slope of `log √error` against `log ε`; `None` when the
    /// errors sit at float noise.
    pub fitted_slope: Option<f64>,
}

/// Ordinary least-squares slope of `y` against `x`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// One step per step size from the system's initial state, compared with the
/// exact flow.
pub fn run_order_study<S: Stepper + ?Sized>(
    stepper: &S,
    system: OrderSystem,
    step_sizes: &[f64],
) -> Result<OrderStudyResult> {
    if step_sizes.len() < 2 {
        return Err(GeomcError::invalid("step_sizes", "need at least two step sizes"));
    }
    if step_sizes.windows(2).any(|w| !(w[1] < w[0])) || step_sizes.iter().any(|e| !(*e > 0.0)) {
        return Err(GeomcError::invalid("step_sizes", "must be positive and strictly decreasing"));
    }
    let model = system.model()?;
    let (q0, p0) = system.initial();
    let start = PhasePoint::from_momentum(&*model, vec![q0], vec![p0])?;
    let mut local_errors = Vec::with_capacity(step_sizes.len());
    for &eps in step_sizes {
        let cfg = IntegratorConfig::new(eps, 1)
            .with_fixed_point(ORDER_STUDY_FIXED_POINT_TOL, ORDER_STUDY_FIXED_POINT_MAX_ITERS);
        let out = stepper.step(&*model, &start, &cfg)?;
        let v = out.next.velocity(&*model)?;
        let (q_exact, v_exact) = system.exact(eps);
        let dq = out.next.q()[0] - q_exact;
        let dv = v[0] - v_exact;
        local_errors.push(dq * dq + dv * dv);
    }
    let noisy = local_errors.iter().any(|e| !(e.sqrt() > ORDER_NOISE_FLOOR));
    let fitted_slope = (!noisy).then(|| {
        let x: Vec<f64> = step_sizes.iter().map(|e| e.ln()).collect();
        let y: Vec<f64> = local_errors.iter().map(|e| 0.5 * e.ln()).collect();
        least_squares_slope(&x, &y)
    });
    Ok(OrderStudyResult {
        step_sizes: step_sizes.to_vec(),
        local_errors,
        fitted_slope,
    })
}

/// Base step of the finite-difference Jacobian. Richardson extrapolation over
/// `h` and `h/2` cancels the `h²` truncation term; a smaller plain step is
/// limited by roundoff instead.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobianCheckResult {
    pub analytic_log_abs_det: f64,
    /// Richardson-extrapolated central differences.
    pub fd_log_abs_det: f64,
    /// `|analytic - fd| / max(|fd|, 1e-12)`.
    pub rel_error: f64,
    /// `|det_analytic / det_fd - 1|`.
    pub det_rel_error: f64,
    /// Plain central differences at `h` and `h/2`.
    pub fd_log_abs_det_h: f64,
    pub fd_log_abs_det_half_h: f64,
}

impl JacobianCheckResult {
    pub fn abs_error(&self) -> f64 {
        (self.analytic_log_abs_det - self.fd_log_abs_det).abs()
    }
}

/// Flat `(q̃, p̃)` after `cfg.num_steps` steps from `(q, p)`.
fn phase_map<S: Stepper + ?Sized>(
    model: &dyn MetricModel,
    stepper: &S,
    cfg: &IntegratorConfig,
    x: &[f64],
) -> Result<(Vec<f64>, f64)> {
    let m = x.len() / 2;
    let state = PhasePoint::from_momentum(model, x[..m].to_vec(), x[m..].to_vec())?;
    let out = integrate_trajectory(model, stepper, &state, cfg)?;
    if out.diverged {
        return Err(GeomcError::NonFiniteState {
            reason: "trajectory diverged inside the finite-difference stencil".into(),
        });
    }
    let mut y = out.next.q().to_vec();
    y.extend(out.next.momentum(model)?);
    Ok((y, out.log_abs_jacobian))
}

fn central_difference<S: Stepper + ?Sized>(
    model: &dyn MetricModel,
    stepper: &S,
    cfg: &IntegratorConfig,
    x: &[f64],
    h: f64,
) -> Result<DenseMatrix> {
    let n = x.len();
    let mut jac = DenseMatrix::zeros(n);
    for j in 0..n {
        let mut plus = x.to_vec();
        let mut minus = x.to_vec();
        plus[j] += h;
        minus[j] -= h;
        let (fp, _) = phase_map(model, stepper, cfg, &plus)?;
        let (fm, _) = phase_map(model, stepper, cfg, &minus)?;
        for i in 0..n {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

fn log_abs_det(a: &DenseMatrix) -> Result<f64> {
    Ok(a.plu()?.log_abs_det()?.log_abs)
}

/// Compares the stepper's reported `log |det ∂(q̃, p̃)/∂(q, p)|` over
/// `cfg.num_steps` steps with the log-determinant of a finite-difference
/// Jacobian of the same map.
pub fn finite_difference_jacobian<S: Stepper + ?Sized>(
    model: &dyn MetricModel,
    stepper: &S,
    q: &[f64],
    p: &[f64],
    cfg: &IntegratorConfig,
    h: f64,
) -> Result<JacobianCheckResult> {
    if !(h > 0.0) {
        return Err(GeomcError::invalid("h", "must be positive"));
    }
    if q.len() != p.len() {
        return Err(GeomcError::DimensionMismatch {
            expected: q.len(),
            found: p.len(),
        });
    }
    let x: Vec<f64> = q.iter().chain(p).copied().collect();
    let (_, analytic) = phase_map(model, stepper, cfg, &x)?;
    let coarse = central_difference(model, stepper, cfg, &x, h)?;
    let fine = central_difference(model, stepper, cfg, &x, 0.5 * h)?;
    let n = x.len();
    let extrapolated = DenseMatrix::from_fn(n, |i, j| (4.0 * fine[(i, j)] - coarse[(i, j)]) / 3.0);
    let fd = log_abs_det(&extrapolated)?;
    Ok(JacobianCheckResult {
        analytic_log_abs_det: analytic,
        fd_log_abs_det: fd,
        rel_error: (analytic - fd).abs() / fd.abs().max(1e-12),
        det_rel_error: ((analytic - fd).exp() - 1.0).abs(),
        fd_log_abs_det_h: log_abs_det(&coarse)?,
        fd_log_abs_det_half_h: log_abs_det(&fine)?,
    })
}

/// Tolerances of the structure checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropertyTolerances {
    /// Self-adjointness and involution residual for explicit steppers.
    pub explicit: f64,
    /// The same for steppers that solve fixed-point equations.
    pub implicit: f64,
    pub euclidean_degeneracy: f64,
    /// Accepted range of `max |ΔH(ε)| / max |ΔH(ε/2)|`.
    pub energy_ratio: (f64, f64),
}

impl Default for PropertyTolerances {
    fn default() -> Self {
        Self {
            explicit: 1e-10,
            implicit: 1e-5,
            euclidean_degeneracy: 1e-12,
            energy_ratio: (3.5, 4.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub name: &'static str,
    /// Worst residual over the evaluated states, or the energy ratio.
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: f64,
    /// States on which the check could be evaluated. A check with none fails.
    pub evaluated: usize,
    pub passed: bool,
}

impl PropertyCheck {
    fn below(name: &'static str, value: f64, upper: f64, evaluated: usize) -> Self {
        Self {
            name,
            value,
            lower: None,
            upper,
            evaluated,
            passed: evaluated > 0 && value < upper,
        }
    }

    fn within(name: &'static str, value: f64, (lower, upper): (f64, f64), evaluated: usize) -> Self {
        Self {
            name,
            value,
            lower: Some(lower),
            upper,
            evaluated,
            passed: evaluated > 0 && value >= lower && value <= upper,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub stepper: String,
    pub trials: usize,
    /// States whose forward trajectory diverged. A sampler rejects such
    /// proposals outright, so they are left out of every check.
    pub diverged: usize,
    pub checks: Vec<PropertyCheck>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const CHECK_SELF_ADJOINT: &str = "self-adjointness";
pub const CHECK_INVOLUTION: &str = "involution";
pub const CHECK_EUCLIDEAN: &str = "euclidean-degeneracy";
pub const CHECK_ENERGY: &str = "energy-step-halving";

type Split = (Vec<f64>, Vec<f64>);

/// Largest coordinate gap relative to `max(1, |a|)`; a failed second leg
/// counts as infinite.
fn residual(a: &Split, b: Result<Split>) -> f64 {
    match b {
        Ok((qb, pb)) => a
            .0
            .iter()
            .chain(&a.1)
            .zip(qb.iter().chain(&pb))
            .map(|(x, y)| (x - y).abs() / x.abs().max(1.0))
            .fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    }
}

fn split(state: &PhasePoint, model: &dyn MetricModel) -> Result<Split> {
    Ok((state.q().to_vec(), state.momentum(model)?))
}

fn trajectory(
    model: &dyn MetricModel,
    stepper: &dyn Stepper,
    state: &PhasePoint,
    cfg: &IntegratorConfig,
) -> Result<PhasePoint> {
    let out = integrate_trajectory(model, stepper, state, cfg)?;
    if out.diverged {
        return Err(GeomcError::NonFiniteState {
            reason: "trajectory diverged".into(),
        });
    }
    Ok(out.next)
}

/// Structure checks at the given positions with momenta drawn from
/// `Normal(0, G(q))`:
///
/// - self-adjointness: one step of `ε` followed by one of `-ε` returns home;
/// - involution: `F∘Φ^k` applied twice is the identity, `F` the momentum flip;
/// - Euclidean degeneracy: on the identity-metric view of `model`, with
///   momenta from `Normal(0, Id)`, the stepper agrees with its Euclidean
///   counterpart (omitted when it has none);
/// - energy: over `k` steps, `max |ΔH|` drops about 4× when `ε` is halved
///   and `k` doubled.
///
/// Residuals are relative to `max(1, |x|)` per coordinate.
pub fn run_property_suite(
    model: &dyn MetricModel,
    stepper: &dyn Stepper,
    cfg: &IntegratorConfig,
    positions: &[Vec<f64>],
    seed: u64,
    tolerances: &PropertyTolerances,
) -> Result<PropertyReport> {
    cfg.validate()?;
    if positions.is_empty() {
        return Err(GeomcError::invalid("positions", "need at least one state"));
    }
    let flat = EuclideanView::new(model);
    let mut rng = chain_rng(seed, 0);
    let mut states = Vec::with_capacity(positions.len());
    for q in positions {
        let geom = PointGeometry::new(model, q.clone())?;
        let p = resample_momentum(model, &geom, &mut rng)?;
        let flat_geom = PointGeometry::new(&flat, q.clone())?;
        let z = resample_momentum(&flat, &flat_geom, &mut rng)?;
        states.push((
            PhasePoint::with_momentum(geom, p)?,
            PhasePoint::with_momentum(flat_geom, z)?,
        ));
    }
    let tol = if stepper.is_implicit() { tolerances.implicit } else { tolerances.explicit };
    let single = IntegratorConfig { num_steps: 1, ..*cfg };
    let halved = IntegratorConfig {
        step_size: 0.5 * cfg.step_size,
        num_steps: 2 * cfg.num_steps,
        ..*cfg
    };

    let (mut self_adjoint, mut involution, mut euclidean) = (0.0f64, 0.0f64, 0.0f64);
    let mut energy = [0.0f64; 2];
    let (mut diverged, mut evaluated, mut flat_evaluated) = (0, 0, 0);
    for (state, flat_state) in &states {
        let start = split(state, model)?;
        let (Ok(one), Ok(full)) = (
            trajectory(model, stepper, state, &single),
            trajectory(model, stepper, state, cfg),
        ) else {
            diverged += 1;
            continue;
        };
        evaluated += 1;

        let back = trajectory(model, stepper, &one, &single.reversed()).and_then(|s| split(&s, model));
        self_adjoint = self_adjoint.max(residual(&start, back));

        let twice = trajectory(model, stepper, &full.clone().flipped(), cfg).and_then(|s| split(&s.flipped(), model));
        involution = involution.max(residual(&start, twice));

        let h0 = state.hamiltonian(model)?;
        let drift = |s: Result<PhasePoint>| s.and_then(|s| s.hamiltonian(model)).map_or(f64::INFINITY, |h| (h - h0).abs());
        energy[0] = energy[0].max(drift(Ok(full)));
        energy[1] = energy[1].max(drift(trajectory(model, stepper, state, &halved)));

        if let Some(reference) = stepper.euclidean_counterpart() {
            if let Ok(theirs) = trajectory(&flat, &reference, flat_state, cfg) {
                flat_evaluated += 1;
                let ours = trajectory(&flat, stepper, flat_state, cfg).and_then(|s| split(&s, &flat));
                euclidean = euclidean.max(residual(&split(&theirs, &flat)?, ours));
            }
        }
    }

    let mut checks = vec![
        PropertyCheck::below(CHECK_SELF_ADJOINT, self_adjoint, tol, evaluated),
        PropertyCheck::below(CHECK_INVOLUTION, involution, tol, evaluated),
    ];
    if stepper.euclidean_counterpart().is_some() {
        checks.push(PropertyCheck::below(
            CHECK_EUCLIDEAN,
            euclidean,
            tolerances.euclidean_degeneracy,
            flat_evaluated,
        ));
    }
    checks.push(PropertyCheck::within(
        CHECK_ENERGY,
        energy[0] / energy[1],
        tolerances.energy_ratio,
        evaluated,
    ));
    Ok(PropertyReport {
        stepper: stepper.name().to_string(),
        trials: states.len(),
        diverged,
        checks,
    })
}

/// RNG stream offsets so reference draws and projection directions never
/// share a stream with a chain.
const REFERENCE_STREAM: u64 = 1 << 32;
const DIRECTION_STREAM: u64 = 2 << 32;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustnessRow {
    pub method: Method,
    pub trial: u64,
    pub ks_mean: f64,
    pub acceptance_rate: f64,
    pub min_ess: f64,
    pub esjd: f64,
    pub divergences: usize,
    #[serde(skip)]
    pub wall_clock_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustnessReport {
    pub delta: f64,
    pub rows: Vec<RobustnessRow>,
    /// Mean over trials of each method's `ks_mean`, in first-seen order.
    pub ks_by_method: Vec<(Method, f64)>,
}

impl RobustnessReport {
    pub fn ks_mean(&self, method: Method) -> Option<f64> {
        self.ks_by_method.iter().find(|(m, _)| *m == method).map(|(_, v)| *v)
    }

    /// Whether both Lagrangian chains beat RMHMC. `None` if any is missing.
    pub fn ordering_holds(&self) -> Option<bool> {
        let rmhmc = self.ks_mean(Method::Rmhmc)?;
        Some(self.ks_mean(Method::Lmc)? < rmhmc && self.ks_mean(Method::Ilmc)? < rmhmc)
    }
}

/// I.i.d. reference draws for trial `trial`, shared by every method.
pub fn robustness_reference(
    reference: &dyn ReferenceSampler,
    count: usize,
    seed: u64,
    trial: u64,
) -> Result<Vec<Vec<f64>>> {
    reference.sample(count, &mut chain_rng(seed, REFERENCE_STREAM + trial))
}

/// One chain of the robustness experiment on an already-misspecified model.
pub fn run_robustness_trial(
    model: &dyn MetricModel,
    iid: &[Vec<f64>],
    chain: &ChainConfig,
    trial: u64,
) -> Result<RobustnessRow> {
    let cfg = chain.clone().with_chain_index(trial);
    let out = run_chain(model, &cfg)?;
    let ks = ks_ergodicity(
        &out.samples,
        iid,
        DEFAULT_KS_DIRECTIONS,
        &mut chain_rng(chain.seed, DIRECTION_STREAM + trial),
    )?;
    let ess = diagnostics::ess_per_coordinate(&out.samples)?;
    Ok(RobustnessRow {
        method: chain.method,
        trial,
        ks_mean: ks.mean,
        acceptance_rate: out.acceptance_rate(),
        min_ess: ess.iter().copied().fold(f64::INFINITY, f64::min),
        esjd: diagnostics::esjd(&out.records)?,
        divergences: out.records.iter().filter(|r| r.diverged).count(),
        wall_clock_secs: out.records.iter().map(|r| r.wall_clock_nanos).sum::<u64>() as f64 * 1e-9,
    })
}

/// Groups rows by method and averages their KS means.
pub fn summarize_robustness(delta: f64, mut rows: Vec<RobustnessRow>) -> RobustnessReport {
    rows.sort_by_key(|r| (r.method, r.trial));
    let mut ks_by_method: Vec<(Method, f64, usize)> = Vec::new();
    for row in &rows {
        match ks_by_method.iter_mut().find(|(m, _, _)| *m == row.method) {
            Some(entry) => {
                entry.1 += row.ks_mean;
                entry.2 += 1;
            }
            None => ks_by_method.push((row.method, row.ks_mean, 1)),
        }
    }
    RobustnessReport {
        delta,
        rows,
        ks_by_method: ks_by_method.into_iter().map(|(m, s, n)| (m, s / n as f64)).collect(),
    }
}

/// Runs every chain configuration for `trials` trials on `base` with all
/// metric partials scaled by `1 + delta`, scoring each against i.i.d. draws
/// from the unperturbed target.
pub fn run_robustness_experiment<M: MetricModel + Clone>(
    base: &M,
    reference: &dyn ReferenceSampler,
    delta: f64,
    chains: &[ChainConfig],
    trials: u64,
) -> Result<RobustnessReport> {
    if chains.is_empty() || trials == 0 {
        return Err(GeomcError::invalid("chains", "need at least one chain and one trial"));
    }
    let model = MisspecifiedModel::new(base.clone(), delta);
    let count = chains.iter().map(|c| c.num_samples).max().unwrap_or(0);
    let mut rows = Vec::new();
    for trial in 0..trials {
        let iid = robustness_reference(reference, count, chains[0].seed, trial)?;
        for chain in chains {
            rows.push(run_robustness_trial(&model, &iid, chain, trial)?);
        }
    }
    Ok(summarize_robustness(delta, rows))
}

/// Steppers that are wrong or trivially exact on purpose.
pub mod fixtures {
    use super::*;
    use crate::integrators::StepResult;

    /// Explicit Euler on Hamilton's equations. First order, so its local
    /// error has slope 2.
    #[derive(Debug, Clone, Copy, Default)]
    pub struct EulerStepper;

    impl Stepper for EulerStepper {
        fn name(&self) -> &'static str {
            "euler"
        }

        fn uses_velocity(&self) -> bool {
            false
        }

        fn step(&self, model: &dyn MetricModel, state: &PhasePoint, cfg: &IntegratorConfig) -> Result<StepResult> {
            let eps = cfg.step_size;
            let geom = state.geometry();
            let p = state.momentum(model)?;
            let v = geom.solve_metric(model, &p)?;
            let partials = geom.partials(model)?;
            let q_new: Vec<f64> = state.q().iter().zip(&v).map(|(q, v)| q + eps * v).collect();
            let p_new: Vec<f64> = p
                .iter()
                .zip(geom.grad_potential(model)?)
                .zip(partials)
                .map(|((p, gu), gk)| p - eps * (gu - 0.5 * gk.bilinear(&v, &v)))
                .collect();
            let next = PhasePoint::from_momentum(model, q_new, p_new)?;
            Ok(plain(next))
        }
    }

    /// Euclidean leapfrog without its closing half kick.
    #[derive(Debug, Clone, Copy, Default)]
    pub struct BrokenLeapfrog;

    impl Stepper for BrokenLeapfrog {
        fn name(&self) -> &'static str {
            "broken-leapfrog"
        }

        fn uses_velocity(&self) -> bool {
            false
        }

        fn step(&self, model: &dyn MetricModel, state: &PhasePoint, cfg: &IntegratorConfig) -> Result<StepResult> {
            let eps = cfg.step_size;
            let grad = model.grad_log_density(state.q());
            let p_half: Vec<f64> = state
                .momentum(model)?
                .iter()
                .zip(&grad)
                .map(|(p, g)| p + 0.5 * eps * g)
                .collect();
            let q_new: Vec<f64> = state.q().iter().zip(&p_half).map(|(q, p)| q + eps * p).collect();
            Ok(plain(PhasePoint::from_momentum(model, q_new, p_half)?))
        }
    }

    /// The exact flow of the geodesic system; ignores the model argument.
    #[derive(Debug, Clone, Copy, Default)]
    pub struct ExactGeodesicStepper;

    impl Stepper for ExactGeodesicStepper {
        fn name(&self) -> &'static str {
            "exact-geodesic"
        }

        fn uses_velocity(&self) -> bool {
            false
        }

        fn step(&self, _model: &dyn MetricModel, state: &PhasePoint, cfg: &IntegratorConfig) -> Result<StepResult> {
            let q0 = state.q()[0];
            let p0 = state.momentum(&GeodesicModel)?[0];
            let (q, v) = GeodesicModel::exact_flow(q0, p0, cfg.step_size);
            Ok(plain(PhasePoint::from_velocity(&GeodesicModel, vec![q], vec![v])?.ensure_momentum(&GeodesicModel)?))
        }
    }

    fn plain(next: PhasePoint) -> StepResult {
        StepResult {
            next,
            log_abs_jacobian: 0.0,
            metric_log_det_ratio: 0.0,
            fixed_point_iters: 0,
            omega_determinants: 0,
            diverged: false,
        }
    }
}
