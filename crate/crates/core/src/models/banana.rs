//! Banana-shaped posterior: `y_i ~ Normal(θ₁ + θ₂², σ²_y)`, `θ ~ Normal(0, σ²_θ Id)`.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::ReferenceSampler;
use crate::error::{GeomcError, Result};
use crate::geometry::MetricModel;
use crate::linalg::DenseMatrix;

/// Observations generated once with [`generate_banana_data`]`(0, 100, ...)`.
const DEFAULT_DATA: &str = include_str!("../../data/banana_y.csv");

pub const DEFAULT_SIGMA_SQ: f64 = 2.0;
pub const DEFAULT_N: usize = 100;

/// Parameter values used to generate the synthetic observations.
pub fn default_true_theta() -> [f64; 2] {
    [0.5, (1.0f64 - 0.5).sqrt()]
}

/// Draws `n` observations `y_i = θ₁ + θ₂² + σ_y z_i` from a seeded stream.
pub fn generate_banana_data(seed: u64, n: usize, theta: [f64; 2], sigma_sq_y: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean = theta[0] + theta[1] * theta[1];
    let sd = sigma_sq_y.sqrt();
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            mean + sd * z
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct BananaModel {
    y: Vec<f64>,
    sigma_sq_theta: f64,
    sigma_sq_y: f64,
    sum_y: f64,
    sum_y_sq: f64,
}

impl BananaModel {
    pub fn new(y: Vec<f64>, sigma_sq_theta: f64, sigma_sq_y: f64) -> Result<Self> {
        if y.is_empty() {
            return Err(GeomcError::invalid("y", "at least one observation is required"));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(GeomcError::NonFinite { what: "banana observations" });
        }
        if !(sigma_sq_theta > 0.0 && sigma_sq_y > 0.0) {
            return Err(GeomcError::invalid("sigma_sq", "variances must be positive"));
        }
        let sum_y = y.iter().sum();
        let sum_y_sq = y.iter().map(|v| v * v).sum();
        Ok(Self {
            y,
            sigma_sq_theta,
            sigma_sq_y,
            sum_y,
            sum_y_sq,
        })
    }

    /// The bundled fixture: n = 100, σ²_θ = σ²_y = 2.
    pub fn paper_default() -> Self {
        let y = DEFAULT_DATA
            .lines()
            .skip(1)
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.trim().parse::<f64>().expect("bundled banana fixture is valid"))
            .collect();
        Self::new(y, DEFAULT_SIGMA_SQ, DEFAULT_SIGMA_SQ).expect("bundled banana fixture is valid")
    }

    pub fn observations(&self) -> &[f64] {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn sigma_sq_theta(&self) -> f64 {
        self.sigma_sq_theta
    }

    pub fn sigma_sq_y(&self) -> f64 {
        self.sigma_sq_y
    }

    pub fn mean_y(&self) -> f64 {
        self.sum_y / self.n() as f64
    }

    fn data_precision(&self) -> f64 {
        self.n() as f64 / self.sigma_sq_y
    }

    /// Mean and variance of `θ₁ | θ₂, y` (normal likelihood, normal prior).
    pub fn conditional_theta1(&self, theta2: f64) -> (f64, f64) {
        let precision = self.data_precision() + 1.0 / self.sigma_sq_theta;
        let mean = self.data_precision() * (self.mean_y() - theta2 * theta2) / precision;
        (mean, 1.0 / precision)
    }

    /// Unnormalized log marginal density of `θ₂`.
    pub fn log_marginal_theta2(&self, theta2: f64) -> f64 {
        let spread = self.sigma_sq_theta + self.sigma_sq_y / self.n() as f64;
        let gap = self.mean_y() - theta2 * theta2;
        -0.5 * theta2 * theta2 / self.sigma_sq_theta - 0.5 * gap * gap / spread
    }
}

impl MetricModel for BananaModel {
    fn dim(&self) -> usize {
        2
    }

    fn log_density(&self, q: &[f64]) -> f64 {
        let mu = q[0] + q[1] * q[1];
        let n = self.n() as f64;
        let rss = self.sum_y_sq - 2.0 * mu * self.sum_y + n * mu * mu;
        -0.5 * rss / self.sigma_sq_y - 0.5 * (q[0] * q[0] + q[1] * q[1]) / self.sigma_sq_theta
    }

    fn grad_log_density(&self, q: &[f64]) -> Vec<f64> {
        let mu = q[0] + q[1] * q[1];
        let d_mu = (self.sum_y - self.n() as f64 * mu) / self.sigma_sq_y;
        vec![
            d_mu - q[0] / self.sigma_sq_theta,
            2.0 * q[1] * d_mu - q[1] / self.sigma_sq_theta,
        ]
    }

    /// Fisher information `(n/σ²_y) ∇μ ∇μᵀ` with `∇μ = (1, 2θ₂)`, plus the prior precision.
    fn metric(&self, q: &[f64]) -> DenseMatrix {
        let s = self.data_precision();
        let t = q[1];
        let prior = 1.0 / self.sigma_sq_theta;
        let mut g = DenseMatrix::zeros(2);
        g[(0, 0)] = s + prior;
        g[(0, 1)] = 2.0 * s * t;
        g[(1, 0)] = 2.0 * s * t;
        g[(1, 1)] = 4.0 * s * t * t + prior;
        g
    }

    fn metric_partials(&self, q: &[f64]) -> Vec<DenseMatrix> {
        let s = self.data_precision();
        let mut d2 = DenseMatrix::zeros(2);
        d2[(0, 1)] = 2.0 * s;
        d2[(1, 0)] = 2.0 * s;
        d2[(1, 1)] = 8.0 * s * q[1];
        vec![DenseMatrix::zeros(2), d2]
    }
}

/// Exact posterior draws: `θ₂` by inverse CDF on a tabulated marginal, then
/// `θ₁ | θ₂` from its Gaussian conditional.
#[derive(Debug, Clone)]
pub struct BananaReference {
    model: BananaModel,
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

impl BananaReference {
    const GRID_POINTS: usize = 200_001;
    /// Log-density drop at which the grid is truncated.
    const LOG_DROP: f64 = 60.0;
    const MAX_TAIL_MASS: f64 = 1e-10;

    pub fn new(model: &BananaModel) -> Result<Self> {
        let logp = |t: f64| model.log_marginal_theta2(t);

        // Expand symmetric bounds until both ends are LOG_DROP below the peak.
        let mut bound = 1.0;
        let peak = loop {
            let peak = (0..=2000)
                .map(|i| logp(-bound + 2.0 * bound * i as f64 / 2000.0))
                .fold(f64::NEG_INFINITY, f64::max);
            if logp(bound).max(logp(-bound)) < peak - Self::LOG_DROP {
                break peak;
            }
            bound *= 2.0;
            if bound > 1e6 {
                return Err(GeomcError::GridUnderflow { mass: 1.0 });
            }
        };

        let n = Self::GRID_POINTS;
        let h = 2.0 * bound / (n - 1) as f64;
        let grid: Vec<f64> = (0..n).map(|i| -bound + h * i as f64).collect();
        let density: Vec<f64> = grid.iter().map(|&t| (logp(t) - peak).exp()).collect();
        let mut cdf = Vec::with_capacity(n);
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in density.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            cdf.push(acc);
        }
        let total = acc;
        // Tails decay at least geometrically past the bound; this over-estimates them.
        let tail = (density[0] + density[n - 1]) * bound / total;
        if tail > Self::MAX_TAIL_MASS {
            return Err(GeomcError::GridUnderflow { mass: tail });
        }
        for c in &mut cdf {
            *c /= total;
        }
        cdf[n - 1] = 1.0;
        Ok(Self {
            model: model.clone(),
            grid,
            cdf,
        })
    }

    /// Marginal CDF of `θ₂` (piecewise linear between grid nodes).
    pub fn cdf_theta2(&self, t: f64) -> f64 {
        let n = self.grid.len();
        if t <= self.grid[0] {
            return 0.0;
        }
        if t >= self.grid[n - 1] {
            return 1.0;
        }
        let i = self.grid.partition_point(|&g| g <= t) - 1;
        let w = (t - self.grid[i]) / (self.grid[i + 1] - self.grid[i]);
        self.cdf[i] + w * (self.cdf[i + 1] - self.cdf[i])
    }

    fn quantile_theta2(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let w = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.grid[i - 1] + w * (self.grid[i] - self.grid[i - 1])
    }
}

impl ReferenceSampler for BananaReference {
    fn sample(&self, count: usize, rng: &mut dyn RngCore) -> Result<Vec<Vec<f64>>> {
        Ok((0..count)
            .map(|_| {
                let u: f64 = rng.random();
                let theta2 = self.quantile_theta2(u);
                let (mean, var) = self.model.conditional_theta1(theta2);
                let z: f64 = StandardNormal.sample(&mut *rng);
                vec![mean + var.sqrt() * z, theta2]
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_matches_seeded_generator() {
        let model = BananaModel::paper_default();
        let regenerated = generate_banana_data(0, DEFAULT_N, default_true_theta(), DEFAULT_SIGMA_SQ);
        assert_eq!(model.n(), DEFAULT_N);
        for (a, b) in model.observations().iter().zip(&regenerated) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn conditional_matches_completed_square() {
        // log p(θ₁ | θ₂) is quadratic in θ₁: recover mean/variance from three evaluations.
        let model = BananaModel::paper_default();
        for &t2 in &[-1.2, 0.0, 0.4, 2.0] {
            let f = |t1: f64| model.log_density(&[t1, t2]);
            let (a, b, c) = (f(-1.0), f(0.0), f(1.0));
            let curvature = a - 2.0 * b + c; // = -1/var
            let slope = 0.5 * (c - a); // = mean/var at θ₁ = 0
            let var = -1.0 / curvature;
            let mean = slope * var;
            let (m, v) = model.conditional_theta1(t2);
            assert!((m - mean).abs() < 1e-9 * m.abs().max(1.0));
            assert!((v - var).abs() < 1e-9 * v);
        }
    }

    #[test]
    fn marginal_is_log_integral_of_joint() {
        // Differences of the log marginal must match the log of ∫ exp(L) dθ₁.
        let model = BananaModel::paper_default();
        let integral = |t2: f64| {
            let (m, v) = model.conditional_theta1(t2);
            let sd = v.sqrt();
            let (lo, hi, n) = (m - 12.0 * sd, m + 12.0 * sd, 4000);
            let h = (hi - lo) / n as f64;
            let base = model.log_density(&[m, t2]);
            let s: f64 = (0..=n)
                .map(|i| {
                    let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                    w * (model.log_density(&[lo + h * i as f64, t2]) - base).exp()
                })
                .sum();
            base + (s * h).ln()
        };
        let reference = integral(0.3) - model.log_marginal_theta2(0.3);
        for &t2 in &[-1.5, -0.2, 0.9, 1.7] {
            let gap = integral(t2) - model.log_marginal_theta2(t2);
            assert!((gap - reference).abs() < 1e-8);
        }
    }

    #[test]
    fn grid_cdf_endpoints() {
        let reference = BananaReference::new(&BananaModel::paper_default()).unwrap();
        assert_eq!(reference.cdf_theta2(f64::NEG_INFINITY), 0.0);
        assert_eq!(reference.cdf_theta2(f64::INFINITY), 1.0);
        assert!(reference.cdf_theta2(-1e3) < 1e-10);
        assert!((1.0 - reference.cdf_theta2(1e3)).abs() < 1e-10);
        // Symmetric marginal.
        assert!((reference.cdf_theta2(0.0) - 0.5).abs() < 1e-9);
    }
}
