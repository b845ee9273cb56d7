//! Involutive Metropolis-Hastings with a momentum refresh.
//!
//! Each transition draws `p ~ Normal(0, G(q))`, runs `k` integrator steps,
//! flips the momentum and accepts with
//! `α = min{1, exp(H(q, p) - H(q̃, p̃) + log |J|)}`. The flip leaves `H` and
//! the position unchanged and momentum is refreshed every transition, so only
//! positions are stored.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{GeomcError, Result};
use crate::geometry::{MetricModel, PhasePoint, PointGeometry};
use crate::integrators::{integrate_trajectory, Integrator, IntegratorConfig, StepResult};
use crate::models::EuclideanView;

/// Energy increase beyond which a proposal counts as diverged.
pub const ENERGY_DIVERGENCE: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Euclidean HMC: identity metric, standard leapfrog.
    Hmc,
    /// Riemannian-manifold HMC: generalized leapfrog.
    Rmhmc,
    /// Lagrangian Monte Carlo: Lagrangian leapfrog.
    Lmc,
    /// Inverted Lagrangian Monte Carlo.
    Ilmc,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Hmc, Method::Rmhmc, Method::Lmc, Method::Ilmc];

    pub fn integrator(self) -> Integrator {
        match self {
            Method::Hmc => Integrator::StandardLeapfrog,
            Method::Rmhmc => Integrator::GeneralizedLeapfrog,
            Method::Lmc => Integrator::LagrangianLeapfrog,
            Method::Ilmc => Integrator::InvertedLagrangianLeapfrog,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Hmc => "hmc",
            Method::Rmhmc => "rmhmc",
            Method::Lmc => "lmc",
            Method::Ilmc => "ilmc",
        }
    }

    pub fn is_geometric(self) -> bool {
        self != Method::Hmc
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = GeomcError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hmc" => Ok(Method::Hmc),
            "rmhmc" => Ok(Method::Rmhmc),
            "lmc" => Ok(Method::Lmc),
            "ilmc" => Ok(Method::Ilmc),
            _ => Err(GeomcError::invalid("method", format!("unknown method `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainConfig {
    pub method: Method,
    #[serde(skip)]
    pub integrator: IntegratorConfig,
    pub num_samples: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Selects the RNG stream, so chains sharing a seed stay independent.
    pub chain_index: u64,
    pub initial_position: Vec<f64>,
}

impl ChainConfig {
    /// Burn-in defaults to 10% of the retained samples.
    pub fn new(method: Method, integrator: IntegratorConfig, num_samples: usize, seed: u64, initial: Vec<f64>) -> Self {
        Self {
            method,
            integrator,
            num_samples,
            burn_in: num_samples / 10,
            seed,
            chain_index: 0,
            initial_position: initial,
        }
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_chain_index(mut self, index: u64) -> Self {
        self.chain_index = index;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_samples == 0 {
            return Err(GeomcError::invalid("num_samples", "must be at least 1"));
        }
        self.integrator.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainRecord {
    pub accepted: bool,
    pub accept_prob: f64,
    pub log_abs_jacobian: f64,
    pub current_energy: f64,
    /// `+∞` for a diverged proposal.
    pub proposal_energy: f64,
    /// `‖q̃ - q‖²` of the proposal, whether or not it was accepted.
    pub sq_jump_distance: f64,
    pub wall_clock_nanos: u64,
    pub fixed_point_iters: usize,
    pub omega_determinants: usize,
    pub diverged: bool,
}

#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub method: Method,
    /// Post-burn-in positions, one row per transition.
    pub samples: Vec<Vec<f64>>,
    /// Records for the post-burn-in transitions.
    pub records: Vec<ChainRecord>,
}

impl ChainOutput {
    pub fn acceptance_rate(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().filter(|r| r.accepted).count() as f64 / self.records.len() as f64
    }
}

/// `min{1, exp(current - proposal + log_abs_jacobian)}`; a NaN ratio gives 0.
pub fn acceptance_probability(current_energy: f64, proposal_energy: f64, log_abs_jacobian: f64) -> f64 {
    let log_ratio = current_energy - proposal_energy + log_abs_jacobian;
    if log_ratio >= 0.0 {
        1.0
    } else if log_ratio.is_nan() {
        0.0
    } else {
        log_ratio.exp()
    }
}

/// Independent stream `chain_index` of the generator seeded with `seed`.
pub fn chain_rng(seed: u64, chain_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain_index);
    rng
}

/// `p = L z` with `G(q) = L Lᵀ` and `z` standard normal.
pub fn resample_momentum<M: MetricModel + ?Sized>(
    model: &M,
    geometry: &PointGeometry,
    rng: &mut dyn RngCore,
) -> Result<Vec<f64>> {
    let z: Vec<f64> = (0..geometry.dim())
        .map(|_| StandardNormal.sample(&mut *rng))
        .collect();
    Ok(geometry.factors(model)?.cholesky.mul_lower(&z))
}

/// One full transition from `current`. Returns the next position.
///
/// Divergences and failures of the model at the proposal are recorded as
/// rejections with `diverged = true`; other errors are returned.
pub fn transition_step(
    model: &dyn MetricModel,
    method: Method,
    current: PointGeometry,
    cfg: &IntegratorConfig,
    rng: &mut dyn RngCore,
) -> Result<(PointGeometry, ChainRecord)> {
    let started = Instant::now();
    let euclidean;
    let target: &dyn MetricModel = if method == Method::Hmc {
        euclidean = EuclideanView::new(model);
        &euclidean
    } else {
        model
    };

    let p = resample_momentum(target, &current, rng)?;
    let state = PhasePoint::with_momentum(current, p)?;
    let current_energy = state.hamiltonian(target)?;
    let trajectory = integrate_trajectory(target, &method.integrator(), &state, cfg)?;
    let proposal = evaluate_proposal(target, &trajectory, current_energy);
    let u: f64 = rng.random();

    let (record, next) = match proposal {
        Some((proposal_energy, log_abs_jacobian)) => {
            let accept_prob = acceptance_probability(current_energy, proposal_energy, log_abs_jacobian);
            let accepted = u < accept_prob;
            let sq_jump_distance = squared_distance(trajectory.next.q(), state.q());
            let record = ChainRecord {
                accepted,
                accept_prob,
                log_abs_jacobian,
                current_energy,
                proposal_energy,
                sq_jump_distance,
                wall_clock_nanos: 0,
                fixed_point_iters: trajectory.fixed_point_iters,
                omega_determinants: trajectory.omega_determinants,
                diverged: false,
            };
            let next = if accepted { trajectory.next } else { state };
            (record, next)
        }
        None => {
            let record = ChainRecord {
                accepted: false,
                accept_prob: 0.0,
                log_abs_jacobian: 0.0,
                current_energy,
                proposal_energy: f64::INFINITY,
                sq_jump_distance: 0.0,
                wall_clock_nanos: 0,
                fixed_point_iters: trajectory.fixed_point_iters,
                omega_determinants: trajectory.omega_determinants,
                diverged: true,
            };
            (record, state)
        }
    };
    let record = ChainRecord {
        wall_clock_nanos: started.elapsed().as_nanos() as u64,
        ..record
    };
    Ok((next.into_geometry(), record))
}

/// Energy and log-Jacobian of a finished trajectory, or `None` if it diverged.
fn evaluate_proposal(model: &dyn MetricModel, trajectory: &StepResult, current_energy: f64) -> Option<(f64, f64)> {
    if trajectory.diverged {
        return None;
    }
    let energy = trajectory.next.hamiltonian(model).ok()?;
    let ok = energy.is_finite()
        && trajectory.log_abs_jacobian.is_finite()
        && energy - current_energy <= ENERGY_DIVERGENCE;
    ok.then_some((energy, trajectory.log_abs_jacobian))
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Runs `burn_in + num_samples` transitions and keeps the last `num_samples`.
pub fn run_chain(model: &dyn MetricModel, cfg: &ChainConfig) -> Result<ChainOutput> {
    cfg.validate()?;
    let mut rng = chain_rng(cfg.seed, cfg.chain_index);
    let mut current = PointGeometry::new(model, cfg.initial_position.clone())?;
    let mut samples = Vec::with_capacity(cfg.num_samples);
    let mut records = Vec::with_capacity(cfg.num_samples);
    for t in 0..cfg.burn_in + cfg.num_samples {
        let (next, record) = transition_step(model, cfg.method, current, &cfg.integrator, &mut rng)?;
        current = next;
        if t >= cfg.burn_in {
            samples.push(current.q().to_vec());
            records.push(record);
        }
    }
    Ok(ChainOutput {
        method: cfg.method,
        samples,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::models::HarmonicModel;

    struct Scaled(f64);

    impl MetricModel for Scaled {
        fn dim(&self) -> usize {
            1
        }
        fn log_density(&self, q: &[f64]) -> f64 {
            -0.5 * q[0] * q[0]
        }
        fn grad_log_density(&self, q: &[f64]) -> Vec<f64> {
            vec![-q[0]]
        }
        fn metric(&self, _q: &[f64]) -> DenseMatrix {
            DenseMatrix::from_diagonal(&[self.0])
        }
        fn metric_partials(&self, _q: &[f64]) -> Vec<DenseMatrix> {
            vec![DenseMatrix::zeros(1)]
        }
    }

    #[test]
    fn momentum_variance_follows_the_metric() {
        let model = Scaled(4.0);
        let geom = PointGeometry::new(&model, vec![0.3]).unwrap();
        let mut rng = chain_rng(11, 0);
        let n = 100_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| resample_momentum(&model, &geom, &mut rng).unwrap()[0])
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        assert!((var - 4.0).abs() < 0.15, "{var}");
    }

    #[test]
    fn fixed_seed_reproduces_momentum() {
        let model = Scaled(2.0);
        let geom = PointGeometry::new(&model, vec![0.0]).unwrap();
        let a = resample_momentum(&model, &geom, &mut chain_rng(5, 3)).unwrap();
        let b = resample_momentum(&model, &geom, &mut chain_rng(5, 3)).unwrap();
        let c = resample_momentum(&model, &geom, &mut chain_rng(5, 4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn tiny_steps_are_always_accepted() {
        let model = HarmonicModel::new(1.0, 2).unwrap();
        for method in Method::ALL {
            let cfg = ChainConfig::new(method, IntegratorConfig::new(1e-8, 1), 50, 1, vec![0.4, -0.2]);
            let out = run_chain(&model, &cfg).unwrap();
            assert!(out.records.iter().all(|r| r.accept_prob >= 1.0 - 1e-6), "{method}");
        }
    }

    #[test]
    fn single_sample_chain() {
        let model = HarmonicModel::new(1.0, 1).unwrap();
        let cfg = ChainConfig::new(Method::Hmc, IntegratorConfig::new(0.1, 10), 1, 1, vec![0.0]);
        assert_eq!(cfg.burn_in, 0);
        let out = run_chain(&model, &cfg).unwrap();
        assert_eq!(out.samples.len(), 1);
        assert_eq!(out.records.len(), 1);
    }

    #[test]
    fn acceptance_probability_edge_cases() {
        assert_eq!(acceptance_probability(1.0, 0.5, 0.0), 1.0);
        assert_eq!(acceptance_probability(0.0, f64::INFINITY, 0.0), 0.0);
        assert_eq!(acceptance_probability(f64::NAN, 0.0, 0.0), 0.0);
        assert!((acceptance_probability(0.0, 1.0, 0.25) - (-0.75f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("nuts".parse::<Method>().is_err());
    }
}
