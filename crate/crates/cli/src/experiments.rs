use anyhow::{bail, Context, Result};
use geomc::diagnostics::build_report;
use geomc::integrators::{Integrator, IntegratorConfig, Stepper};
use geomc::models::{
    k_step_esjd_from_propagators, one_step_esjd_closed_form, BananaModel, BananaReference, EuclideanView,
    HarmonicModel, LeapfrogVariant, LogisticModel, MisspecifiedModel, ReferenceSampler, StudentTModel,
};
use geomc::sampler::{chain_rng, resample_momentum, run_chain, ChainConfig, Method};
use geomc::verification::fixtures::{BrokenLeapfrog, EulerStepper};
use geomc::verification::{
    default_order_grid, finite_difference_jacobian, robustness_reference, run_order_study, run_property_suite,
    run_robustness_trial, summarize_robustness, OrderSystem, PropertyTolerances, DEFAULT_FD_STEP,
};
use geomc::{GeomcError, MetricModel, PhasePoint, PointGeometry};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig, MethodConfig, MethodName, ModelConfig, ModelName};

/// RNG streams for draws that are not chains. Chains use streams `0..trials`.
const POSITION_STREAM: u64 = 1 << 40;
const MOMENTUM_STREAM: u64 = 2 << 40;
const ESJD_STREAM: u64 = 3 << 40;

const SLOPE_RANGE: (f64, f64) = (2.8, 3.2);
const JACOBIAN_TOL: f64 = 1e-4;
const ESJD_REL_TOL: f64 = 0.02;
const PROPAGATOR_FLOOR: f64 = -1e-12;
const ROBUST_KS_MAX: f64 = 0.05;

/// One line of `results.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub experiment: &'static str,
    pub model: String,
    pub method: String,
    pub trial: u64,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub rows: Vec<Row>,
    /// Wall-clock measurements, kept apart so `rows` is reproducible.
    pub timing: Vec<Row>,
    /// `(method, samples)` for the sample files.
    pub samples: Vec<(String, Vec<Vec<f64>>)>,
    /// Thresholds that were missed, as human-readable messages.
    pub failures: Vec<String>,
}

struct Emitter<'a> {
    experiment: &'static str,
    model: &'a str,
    rows: Vec<Row>,
}

impl<'a> Emitter<'a> {
    fn new(experiment: Experiment, model: &'a str) -> Self {
        Self {
            experiment: experiment.name(),
            model,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, method: &str, trial: u64, metric: impl Into<String>, value: f64) {
        self.rows.push(Row {
            experiment: self.experiment,
            model: self.model.to_string(),
            method: method.to_string(),
            trial,
            metric: metric.into(),
            value,
        });
    }
}

struct LoadedModel {
    model: Box<dyn MetricModel>,
    reference: Option<Box<dyn ReferenceSampler>>,
    initial: Vec<f64>,
}

fn load_model(cfg: &ModelConfig) -> Result<LoadedModel> {
    Ok(match cfg.name {
        ModelName::Banana => {
            let model = BananaModel::paper_default();
            let reference = BananaReference::new(&model)?;
            LoadedModel {
                model: Box::new(model),
                reference: Some(Box::new(reference)),
                initial: vec![0.5, 0.5],
            }
        }
        ModelName::StudentT => {
            let dim = cfg.dim.unwrap_or(20);
            let model = StudentTModel::multiscale(dim, cfg.dof.unwrap_or(5e3), cfg.last_scale.unwrap_or(1e2))?;
            LoadedModel {
                model: Box::new(model.clone()),
                reference: Some(Box::new(model)),
                initial: vec![0.0; dim],
            }
        }
        ModelName::Harmonic => {
            let dim = cfg.dim.unwrap_or(1);
            let model = HarmonicModel::new(cfg.omega.unwrap_or(1.0), dim)?;
            LoadedModel {
                model: Box::new(model),
                reference: Some(Box::new(model)),
                initial: vec![0.0; dim],
            }
        }
        ModelName::LogisticBreast | ModelName::LogisticThyroid | ModelName::Logistic => {
            let alpha = cfg.alpha.unwrap_or(geomc::models::DEFAULT_PRIOR_PRECISION);
            let seed = cfg.data_seed.unwrap_or(0);
            let model = match cfg.name {
                ModelName::LogisticBreast => LogisticModel::synthetic(277, 10, seed, alpha)?,
                ModelName::LogisticThyroid => LogisticModel::synthetic(215, 6, seed, alpha)?,
                _ => {
                    let path = cfg.data.as_ref().expect("validated");
                    LogisticModel::from_csv(path, alpha).with_context(|| format!("loading {}", path.display()))?
                }
            };
            let dim = model.dim();
            LoadedModel {
                model: Box::new(model),
                reference: None,
                initial: vec![0.0; dim],
            }
        }
        ModelName::Geodesic => bail!("the geodesic system is only used by order-study"),
    })
}

fn integrator_config(cfg: &ExperimentConfig, method: &MethodConfig) -> IntegratorConfig {
    IntegratorConfig::new(method.step_size, method.num_steps)
        .with_fixed_point(cfg.integrator.fixed_point_tol, cfg.integrator.fixed_point_max_iters)
}

fn stepper(name: MethodName) -> Box<dyn Stepper> {
    match name {
        MethodName::Chain(m) => Box::new(m.integrator()),
        MethodName::BrokenLeapfrog => Box::new(BrokenLeapfrog),
        MethodName::Euler => Box::new(EulerStepper),
    }
}

/// Euclidean steppers ignore the metric, so they are run on the
/// identity-metric view of the model.
fn is_euclidean(name: MethodName) -> bool {
    matches!(name, MethodName::Chain(Method::Hmc) | MethodName::BrokenLeapfrog)
}

/// Positions spread over the target: i.i.d. draws where the model has a
/// reference sampler, otherwise a thinned ILMC chain.
fn spread_positions(cfg: &ExperimentConfig, loaded: &LoadedModel, count: usize, trial: u64) -> Result<Vec<Vec<f64>>> {
    if let Some(reference) = &loaded.reference {
        return Ok(reference.sample(count, &mut chain_rng(cfg.seed, POSITION_STREAM + trial))?);
    }
    const THIN: usize = 10;
    let (eps, k) = (0.5, 10);
    let chain = ChainConfig::new(
        Method::Ilmc,
        IntegratorConfig::new(eps, k),
        count * THIN,
        cfg.seed,
        loaded.initial.clone(),
    )
    .with_chain_index(POSITION_STREAM + trial);
    let out = run_chain(&*loaded.model, &chain)?;
    Ok(out.samples.into_iter().step_by(THIN).collect())
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .context("building the worker pool")?;
    pool.install(|| match cfg.experiment {
        Experiment::OrderStudy => order_study(cfg),
        Experiment::Properties => properties(cfg),
        Experiment::JacobianCheck => jacobian_check(cfg),
        Experiment::HarmonicEsjd => harmonic_esjd(cfg),
        Experiment::Sample => sample(cfg),
        Experiment::Robustness => robustness(cfg),
    })
}

fn order_study(cfg: &ExperimentConfig) -> Result<Outcome> {
    let calibration = OrderSystem::Harmonic {
        omega: 1.0,
        q0: 1.0,
        p0: 0.5,
    };
    let grid = default_order_grid();
    let studies: Vec<_> = cfg
        .methods
        .par_iter()
        .map(|m| {
            let system = if is_euclidean(m.name) { calibration } else { OrderSystem::default() };
            run_order_study(&*stepper(m.name), system, &grid).map(|r| (m.name, system, r))
        })
        .collect::<std::result::Result<_, GeomcError>>()?;

    let mut outcome = Outcome::default();
    for (name, system, study) in studies {
        let model = match system {
            OrderSystem::Harmonic { .. } => "harmonic",
            _ => "geodesic",
        };
        let mut out = Emitter::new(cfg.experiment, model);
        for (i, (eps, err)) in study.step_sizes.iter().zip(&study.local_errors).enumerate() {
            out.push(name.name(), i as u64, "step_size", *eps);
            out.push(name.name(), i as u64, "local_error", *err);
        }
        match study.fitted_slope {
            Some(slope) => {
                out.push(name.name(), 0, "slope", slope);
                if !(SLOPE_RANGE.0..=SLOPE_RANGE.1).contains(&slope) {
                    outcome.failures.push(format!(
                        "{name}: local-error slope {slope} outside [{}, {}]",
                        SLOPE_RANGE.0, SLOPE_RANGE.1
                    ));
                }
            }
            None => {
                out.push(name.name(), 0, "slope", f64::NAN);
                outcome.failures.push(format!("{name}: local errors at round-off, no slope"));
            }
        }
        outcome.rows.extend(out.rows);
    }
    Ok(outcome)
}

fn properties(cfg: &ExperimentConfig) -> Result<Outcome> {
    let loaded = load_model(&cfg.model)?;
    let flat = EuclideanView::new(&*loaded.model);
    let model_name = cfg.model.name.name();
    let jobs: Vec<(u64, &MethodConfig)> = (0..cfg.trials).flat_map(|t| cfg.methods.iter().map(move |m| (t, m))).collect();
    let positions: Vec<Vec<Vec<f64>>> = (0..cfg.trials)
        .map(|t| spread_positions(cfg, &loaded, cfg.samples, t))
        .collect::<Result<_>>()?;
    let reports: Vec<_> = jobs
        .par_iter()
        .map(|&(trial, m)| {
            let target: &dyn MetricModel = if is_euclidean(m.name) { &flat } else { &*loaded.model };
            run_property_suite(
                target,
                &*stepper(m.name),
                &integrator_config(cfg, m),
                &positions[trial as usize],
                cfg.seed.wrapping_add(trial),
                &PropertyTolerances::default(),
            )
        })
        .collect::<std::result::Result<_, GeomcError>>()?;

    let mut outcome = Outcome::default();
    let mut out = Emitter::new(cfg.experiment, model_name);
    for (&(trial, m), report) in jobs.iter().zip(&reports) {
        let method = m.name.name();
        for check in &report.checks {
            out.push(method, trial, check.name, check.value);
            out.push(method, trial, format!("{}.passed", check.name), f64::from(u8::from(check.passed)));
            if !check.passed {
                outcome.failures.push(format!(
                    "{method} trial {trial}: {} = {} outside its tolerance",
                    check.name, check.value
                ));
            }
        }
        out.push(method, trial, "diverged", report.diverged as f64);
    }
    outcome.rows = out.rows;
    Ok(outcome)
}

enum JacobianOutcome {
    Checked { analytic: f64, fd: f64, det_rel: f64, log_rel: f64 },
    Diverged,
}

fn jacobian_states(
    cfg: &ExperimentConfig,
    loaded: &LoadedModel,
    target: &dyn MetricModel,
    count: usize,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let positions = spread_positions(cfg, loaded, count, 0)?;
    let mut rng = chain_rng(cfg.seed, MOMENTUM_STREAM);
    positions
        .into_iter()
        .map(|q| {
            let geom = PointGeometry::new(target, q.clone())?;
            let p = resample_momentum(target, &geom, &mut rng)?;
            Ok((q, p))
        })
        .collect()
}

fn check_jacobians(
    target: &dyn MetricModel,
    stepper: &dyn Stepper,
    states: &[(Vec<f64>, Vec<f64>)],
    icfg: &IntegratorConfig,
) -> Result<Vec<JacobianOutcome>> {
    states
        .par_iter()
        .map(|(q, p)| match finite_difference_jacobian(target, stepper, q, p, icfg, DEFAULT_FD_STEP) {
            Ok(c) => Ok(JacobianOutcome::Checked {
                analytic: c.analytic_log_abs_det,
                fd: c.fd_log_abs_det,
                det_rel: c.det_rel_error,
                log_rel: c.rel_error,
            }),
            Err(e) if e.is_divergence() => Ok(JacobianOutcome::Diverged),
            Err(e) => Err(e.into()),
        })
        .collect()
}

/// Volume-changing maps are judged on `|det_analytic / det_fd - 1|`,
/// volume-preserving ones on `|log det_fd|`.
fn jacobian_error(name: MethodName, outcome: &JacobianOutcome) -> Option<f64> {
    match outcome {
        JacobianOutcome::Checked { fd, det_rel, .. } => Some(match name {
            MethodName::Chain(Method::Lmc | Method::Ilmc) => *det_rel,
            _ => fd.abs(),
        }),
        JacobianOutcome::Diverged => None,
    }
}

fn jacobian_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let loaded = load_model(&cfg.model)?;
    let misspecified = MisspecifiedModel::new(&*loaded.model, cfg.delta);
    let model: &dyn MetricModel = if cfg.delta == 0.0 { &*loaded.model } else { &misspecified };
    let flat = EuclideanView::new(model);
    let mut outcome = Outcome::default();
    let mut out = Emitter::new(cfg.experiment, cfg.model.name.name());
    for m in &cfg.methods {
        let target: &dyn MetricModel = if is_euclidean(m.name) { &flat } else { model };
        let states = jacobian_states(cfg, &loaded, target, cfg.samples)?;
        let checks = check_jacobians(target, &*stepper(m.name), &states, &integrator_config(cfg, m))?;
        let method = m.name.name();
        let (mut worst, mut evaluated) = (0.0f64, 0usize);
        for (i, check) in checks.iter().enumerate() {
            let trial = i as u64;
            match check {
                JacobianOutcome::Checked {
                    analytic,
                    fd,
                    det_rel,
                    log_rel,
                } => {
                    out.push(method, trial, "analytic_log_abs_det", *analytic);
                    out.push(method, trial, "fd_log_abs_det", *fd);
                    out.push(method, trial, "det_rel_error", *det_rel);
                    out.push(method, trial, "rel_error", *log_rel);
                }
                JacobianOutcome::Diverged => out.push(method, trial, "diverged", 1.0),
            }
            if let Some(err) = jacobian_error(m.name, check) {
                worst = worst.max(err);
                evaluated += 1;
            }
        }
        if evaluated == 0 {
            outcome.failures.push(format!("{method}: every state diverged"));
        } else if worst >= JACOBIAN_TOL {
            outcome
                .failures
                .push(format!("{method}: Jacobian error {worst} not below {JACOBIAN_TOL}"));
        }
    }
    outcome.rows = out.rows;
    Ok(outcome)
}

fn esjd_grid(omega: f64) -> Vec<f64> {
    (0..10).map(|i| 0.1 + 0.2 * i as f64).filter(|eps| eps * omega < 2.0).collect()
}

fn empirical_one_step_esjd(omega: f64, eps: f64, integrator: Integrator, n: usize, seed: u64, stream: u64) -> Result<f64> {
    let model = HarmonicModel::new(omega, 1)?;
    let icfg = IntegratorConfig::new(eps, 1);
    let mut rng = chain_rng(seed, stream);
    let mut total = 0.0;
    for _ in 0..n {
        let q: f64 = StandardNormal.sample(&mut rng);
        let p: f64 = StandardNormal.sample(&mut rng);
        let state = PhasePoint::from_momentum(&model, vec![q / omega], vec![p])?;
        let out = geomc::integrators::integrate_trajectory(&model, &integrator, &state, &icfg)?;
        total += (out.next.q()[0] - state.q()[0]).powi(2);
    }
    Ok(total / n as f64)
}

fn harmonic_esjd(cfg: &ExperimentConfig) -> Result<Outcome> {
    let omega = cfg.model.omega.unwrap_or(1.0);
    let max_k = cfg.methods.iter().map(|m| m.num_steps).max().unwrap_or(1);
    let grid = esjd_grid(omega);
    let variants = [
        ("leapfrog", LeapfrogVariant::Standard, Integrator::StandardLeapfrog),
        ("inverted-leapfrog", LeapfrogVariant::Inverted, Integrator::InvertedLeapfrog),
    ];
    let jobs: Vec<(usize, usize)> = (0..grid.len()).flat_map(|e| (0..variants.len()).map(move |v| (e, v))).collect();
    let empirical: Vec<f64> = jobs
        .par_iter()
        .map(|&(e, v)| {
            let stream = ESJD_STREAM + (e * variants.len() + v) as u64;
            empirical_one_step_esjd(omega, grid[e], variants[v].2, cfg.samples, cfg.seed, stream)
        })
        .collect::<Result<_>>()?;

    let mut outcome = Outcome::default();
    let mut out = Emitter::new(cfg.experiment, "harmonic");
    let mut worst_gap = f64::INFINITY;
    for (e, &eps) in grid.iter().enumerate() {
        for (v, (name, variant, _)) in variants.iter().enumerate() {
            let exact = one_step_esjd_closed_form(omega, eps, *variant)?;
            let measured = empirical[e * variants.len() + v];
            out.push(name, 0, format!("one_step_esjd_closed_form@eps={eps}"), exact);
            out.push(name, 0, format!("one_step_esjd_empirical@eps={eps}"), measured);
            let rel = (measured / exact - 1.0).abs();
            if rel > ESJD_REL_TOL {
                outcome.failures.push(format!(
                    "{name} at eps={eps}: empirical one-step ESJD {measured} is {rel} away from {exact}"
                ));
            }
        }
        for k in 1..=max_k {
            let a = k_step_esjd_from_propagators(omega, eps, k, LeapfrogVariant::Standard)?;
            let b = k_step_esjd_from_propagators(omega, eps, k, LeapfrogVariant::Inverted)?;
            out.push("leapfrog", k as u64, format!("k_step_esjd@eps={eps}"), a);
            out.push("inverted-leapfrog", k as u64, format!("k_step_esjd@eps={eps}"), b);
            out.push("difference", k as u64, format!("k_step_esjd@eps={eps}"), a - b);
            worst_gap = worst_gap.min(a - b);
        }
    }
    if worst_gap < PROPAGATOR_FLOOR {
        outcome
            .failures
            .push(format!("leapfrog minus inverted k-step ESJD reaches {worst_gap}"));
    }
    outcome.rows = out.rows;
    Ok(outcome)
}

struct ChainSummary {
    method: Method,
    trial: u64,
    rows: Vec<(&'static str, f64)>,
    timing: Vec<(&'static str, f64)>,
    samples: Option<Vec<Vec<f64>>>,
}

fn run_sample_chain(cfg: &ExperimentConfig, loaded: &LoadedModel, m: &MethodConfig, trial: u64) -> Result<ChainSummary> {
    let method = m.name.chain().expect("validated");
    let chain = ChainConfig::new(method, integrator_config(cfg, m), cfg.samples, cfg.seed, loaded.initial.clone())
        .with_chain_index(trial);
    let out = run_chain(&*loaded.model, &chain)?;
    let iid = match &loaded.reference {
        Some(r) => Some(robustness_reference(&**r, cfg.samples, cfg.seed, trial)?),
        None => None,
    };
    let transitions = out.records.len() as f64;
    let mut rows = vec![
        ("acceptance_rate", out.acceptance_rate()),
        (
            "divergences",
            out.records.iter().filter(|r| r.diverged).count() as f64,
        ),
        (
            "mean_fixed_point_iters",
            out.records.iter().map(|r| r.fixed_point_iters as f64).sum::<f64>() / transitions,
        ),
        (
            "mean_omega_determinants",
            out.records.iter().map(|r| r.omega_determinants as f64).sum::<f64>() / transitions,
        ),
    ];
    let mut timing = Vec::new();
    match build_report(&out.records, &out.samples, iid.as_deref(), cfg.seed.wrapping_add(trial)) {
        Ok(report) => {
            rows.push(("esjd", report.esjd));
            rows.push(("min_ess", report.min_ess));
            rows.push(("mean_ess", report.mean_ess));
            if let Some(ks) = &report.ks {
                rows.push(("ks_mean", ks.mean));
            }
            timing.push(("wall_clock_secs", report.wall_clock_secs));
            timing.push(("min_ess_per_sec", report.ess_per_second_min));
            timing.push(("mean_ess_per_sec", report.ess_per_second_mean));
        }
        // A chain stuck at its start has no autocorrelation to speak of.
        Err(GeomcError::DegenerateChain | GeomcError::ChainTooShort { .. }) => {
            rows.push(("esjd", geomc::diagnostics::esjd(&out.records)?));
            rows.push(("min_ess", f64::NAN));
            rows.push(("mean_ess", f64::NAN));
        }
        Err(e) => return Err(e.into()),
    }
    Ok(ChainSummary {
        method,
        trial,
        rows,
        timing,
        samples: (trial == 0).then_some(out.samples),
    })
}

fn sample(cfg: &ExperimentConfig) -> Result<Outcome> {
    let loaded = load_model(&cfg.model)?;
    let jobs: Vec<(&MethodConfig, u64)> = cfg.methods.iter().flat_map(|m| (0..cfg.trials).map(move |t| (m, t))).collect();
    let summaries: Vec<ChainSummary> = jobs
        .par_iter()
        .map(|&(m, trial)| run_sample_chain(cfg, &loaded, m, trial))
        .collect::<Result<_>>()?;
    let mut outcome = Outcome::default();
    let mut out = Emitter::new(cfg.experiment, cfg.model.name.name());
    let mut times = Emitter::new(cfg.experiment, cfg.model.name.name());
    for s in summaries {
        for (metric, value) in &s.rows {
            out.push(s.method.name(), s.trial, *metric, *value);
        }
        for (metric, value) in &s.timing {
            times.push(s.method.name(), s.trial, *metric, *value);
        }
        if let Some(samples) = s.samples {
            outcome.samples.push((s.method.name().to_string(), samples));
        }
    }
    outcome.rows = out.rows;
    outcome.timing = times.rows;
    Ok(outcome)
}

fn robustness(cfg: &ExperimentConfig) -> Result<Outcome> {
    let loaded = load_model(&cfg.model)?;
    let reference = loaded
        .reference
        .as_deref()
        .context("robustness needs a model with an i.i.d. reference sampler")?;
    let model = MisspecifiedModel::new(&*loaded.model, cfg.delta);
    let jobs: Vec<(u64, &MethodConfig)> = (0..cfg.trials).flat_map(|t| cfg.methods.iter().map(move |m| (t, m))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(trial, m)| {
            let iid = robustness_reference(reference, cfg.samples, cfg.seed, trial)?;
            let chain = ChainConfig::new(
                m.name.chain().expect("validated"),
                integrator_config(cfg, m),
                cfg.samples,
                cfg.seed,
                loaded.initial.clone(),
            );
            run_robustness_trial(&model, &iid, &chain, trial)
        })
        .collect::<std::result::Result<Vec<_>, GeomcError>>()?;
    let report = summarize_robustness(cfg.delta, rows);

    let mut outcome = Outcome::default();
    let mut out = Emitter::new(cfg.experiment, cfg.model.name.name());
    let mut times = Emitter::new(cfg.experiment, cfg.model.name.name());
    let position = |method: Method| cfg.methods.iter().position(|m| m.name == MethodName::Chain(method));
    let mut ordered = report.rows.clone();
    ordered.sort_by_key(|r| (position(r.method), r.trial));
    for row in &ordered {
        let method = row.method.name();
        out.push(method, row.trial, "ks_mean", row.ks_mean);
        out.push(method, row.trial, "acceptance_rate", row.acceptance_rate);
        out.push(method, row.trial, "min_ess", row.min_ess);
        out.push(method, row.trial, "esjd", row.esjd);
        out.push(method, row.trial, "divergences", row.divergences as f64);
        times.push(method, row.trial, "wall_clock_secs", row.wall_clock_secs);
    }
    for m in &cfg.methods {
        let method = m.name.chain().expect("validated");
        if let Some(ks) = report.ks_mean(method) {
            out.push(method.name(), 0, "ks_mean_over_trials", ks);
            if matches!(method, Method::Lmc | Method::Ilmc) && ks >= ROBUST_KS_MAX {
                outcome
                    .failures
                    .push(format!("{method}: mean KS {ks} not below {ROBUST_KS_MAX} under misspecification"));
            }
        }
    }
    if report.ordering_holds() == Some(false) {
        outcome
            .failures
            .push("RMHMC is not the least ergodic method under misspecification".to_string());
    }

    // The Lagrangian volume correction stays exact for the perturbed map.
    let lmc = MethodConfig {
        name: MethodName::Chain(Method::Lmc),
        step_size: 0.1,
        num_steps: 1,
    };
    let states = jacobian_states(cfg, &loaded, &model, cfg.samples.min(100))?;
    let checks = check_jacobians(&model, &Integrator::LagrangianLeapfrog, &states, &integrator_config(cfg, &lmc))?;
    let worst = checks
        .iter()
        .filter_map(|c| jacobian_error(lmc.name, c))
        .fold(0.0f64, f64::max);
    out.push("lmc", 0, "misspecified_max_det_rel_error", worst);
    if worst >= JACOBIAN_TOL {
        outcome
            .failures
            .push(format!("lmc: misspecified Jacobian error {worst} not below {JACOBIAN_TOL}"));
    }
    outcome.rows = out.rows;
    outcome.timing = times.rows;
    Ok(outcome)
}
