//! The quadratic Hamiltonian `H = ω² |q|²/2 + |p|²/2` and the closed-form
//! jump statistics of leapfrog and inverted leapfrog on it.

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use super::ReferenceSampler;
use crate::error::{GeomcError, Result};
use crate::geometry::MetricModel;
use crate::linalg::DenseMatrix;

/// Isotropic Gaussian `q ~ Normal(0, Id/ω²)` with the Euclidean metric.
#[derive(Debug, Clone, Copy)]
pub struct HarmonicModel {
    omega: f64,
    dim: usize,
}

impl HarmonicModel {
    pub fn new(omega: f64, dim: usize) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(GeomcError::invalid("omega", "frequency must be positive"));
        }
        if dim == 0 {
            return Err(GeomcError::invalid("dim", "dimension must be positive"));
        }
        Ok(Self { omega, dim })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

impl MetricModel for HarmonicModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density(&self, q: &[f64]) -> f64 {
        -0.5 * self.omega * self.omega * q.iter().map(|x| x * x).sum::<f64>()
    }

    fn grad_log_density(&self, q: &[f64]) -> Vec<f64> {
        q.iter().map(|x| -self.omega * self.omega * x).collect()
    }

    fn metric(&self, _q: &[f64]) -> DenseMatrix {
        DenseMatrix::identity(self.dim)
    }

    fn metric_partials(&self, _q: &[f64]) -> Vec<DenseMatrix> {
        vec![DenseMatrix::zeros(self.dim); self.dim]
    }
}

impl ReferenceSampler for HarmonicModel {
    fn sample(&self, count: usize, rng: &mut dyn RngCore) -> Result<Vec<Vec<f64>>> {
        let sd = 1.0 / self.omega;
        Ok((0..count)
            .map(|_| {
                (0..self.dim)
                    .map(|_| sd * Distribution::<f64>::sample(&StandardNormal, &mut *rng))
                    .collect()
            })
            .collect())
    }
}

/// Order of the updates in a Euclidean leapfrog step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LeapfrogVariant {
    /// Half kick, drift, half kick.
    Standard,
    /// Half drift, kick, half drift.
    Inverted,
}

fn check_stable(omega: f64, eps: f64) -> Result<()> {
    let value = eps * eps * omega * omega;
    if value >= 4.0 || !value.is_finite() {
        return Err(GeomcError::UnstableRegime { value });
    }
    Ok(())
}

/// One-step propagator `R` with `(q̃, p̃) = R (q, p)` on the 1-D oscillator.
pub fn propagator(omega: f64, eps: f64, variant: LeapfrogVariant) -> [[f64; 2]; 2] {
    let w2e2 = omega * omega * eps * eps;
    let diag = 1.0 - 0.5 * w2e2;
    let shrink = 1.0 - 0.25 * w2e2;
    match variant {
        LeapfrogVariant::Standard => [[diag, eps], [-eps * omega * omega * shrink, diag]],
        LeapfrogVariant::Inverted => [[diag, eps * shrink], [-eps * omega * omega, diag]],
    }
}

/// `E[(q̃ - q)²]` for one step started at stationarity.
///
/// Both expressions are read off the propagators: `q̃ - q = (R₁₁ - 1) q + R₁₂ p`
/// with `Var q = 1/ω²`, `Var p = 1`.
pub fn one_step_esjd_closed_form(omega: f64, eps: f64, variant: LeapfrogVariant) -> Result<f64> {
    check_stable(omega, eps)?;
    let e2 = eps * eps;
    let quartic = e2 * e2 * omega * omega / 4.0;
    Ok(match variant {
        LeapfrogVariant::Standard => quartic + e2,
        LeapfrogVariant::Inverted => {
            let shrink = 1.0 - e2 * omega * omega / 4.0;
            quartic + e2 * shrink * shrink
        }
    })
}

fn mat_mul(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// `E[(Proj_q Φᵏ(q, p) - q)²]` at stationarity from the propagator power.
///
/// With `A = Rᵏ` and `Σ = diag(1/ω², 1)`, the stationary k-step covariance is
/// `A Σ Aᵀ`, so the jump is `Var q̃ + Var q - 2 Cov(q̃, q)`.
pub fn k_step_esjd_from_propagators(omega: f64, eps: f64, k: usize, variant: LeapfrogVariant) -> Result<f64> {
    check_stable(omega, eps)?;
    if k == 0 {
        return Err(GeomcError::invalid("k", "number of steps must be positive"));
    }
    if omega == 0.0 {
        // Free particle: q̃ - q = kε p.
        return Ok((k as f64 * eps).powi(2));
    }
    let r = propagator(omega, eps, variant);
    let mut a = [[1.0, 0.0], [0.0, 1.0]];
    for _ in 0..k {
        a = mat_mul(&r, &a);
    }
    let var_q = 1.0 / (omega * omega);
    let var_q_tilde = a[0][0] * a[0][0] * var_q + a[0][1] * a[0][1];
    let cov = a[0][0] * var_q;
    Ok(var_q_tilde + var_q - 2.0 * cov)
}
