//! Bayesian logistic regression with the Fisher-information metric.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{GeomcError, Result};
use crate::geometry::MetricModel;
use crate::linalg::DenseMatrix;

/// Prior precision used when none is given (prior variance 100).
pub const DEFAULT_PRIOR_PRECISION: f64 = 0.01;

/// `β ~ Normal(0, α⁻¹ Id)`, `y_i ~ Bernoulli(σ(x_iᵀ β))`.
///
/// Metric: `G(β) = Xᵀ Λ(β) X + α Id` with `Λ_ii = σ_i (1 - σ_i)`.
#[derive(Debug, Clone)]
pub struct LogisticModel {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    alpha: f64,
}

fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + eˢ)` without overflow.
fn softplus(s: f64) -> f64 {
    if s > 0.0 {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

impl LogisticModel {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<f64>, alpha: f64) -> Result<Self> {
        if x.is_empty() {
            return Err(GeomcError::invalid("x", "design matrix has no rows"));
        }
        let d = x[0].len();
        if d == 0 || x.iter().any(|r| r.len() != d) {
            return Err(GeomcError::invalid("x", "design matrix rows must share a positive width"));
        }
        if y.len() != x.len() {
            return Err(GeomcError::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        if y.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(GeomcError::invalid("y", "labels must be 0 or 1"));
        }
        if x.iter().flatten().any(|v| !v.is_finite()) {
            return Err(GeomcError::NonFinite { what: "design matrix" });
        }
        if !(alpha > 0.0) {
            return Err(GeomcError::invalid("alpha", "prior precision must be positive"));
        }
        Ok(Self { x, y, alpha })
    }

    /// Standard-normal covariates, coefficients `~ Normal(0, 1/d)`, Bernoulli labels.
    pub fn synthetic(n: usize, d: usize, seed: u64, alpha: f64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 / (d as f64).sqrt();
        let beta: Vec<f64> = (0..d)
            .map(|_| scale * Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect();
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let row: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let s: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum();
            y.push(if rng.random::<f64>() < sigmoid(s) { 1.0 } else { 0.0 });
            x.push(row);
        }
        Self::new(x, y, alpha)
    }

    /// Synthetic stand-in shaped like the 277-row, 10-covariate breast-cancer data.
    pub fn breast_like(seed: u64) -> Result<Self> {
        Self::synthetic(277, 10, seed, DEFAULT_PRIOR_PRECISION)
    }

    /// Synthetic stand-in shaped like the 215-row, 6-covariate thyroid data.
    pub fn thyroid_like(seed: u64) -> Result<Self> {
        Self::synthetic(215, 6, seed, DEFAULT_PRIOR_PRECISION)
    }

    /// Loads a CSV with a header row; every column but the last is a covariate,
    /// the last is the 0/1 label.
    pub fn from_csv(path: impl AsRef<Path>, alpha: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| GeomcError::Data(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_str(&text, alpha)
    }

    pub fn from_csv_str(text: &str, alpha: f64) -> Result<Self> {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (lineno, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let values: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| GeomcError::Data(format!("line {}: {e}", lineno + 1)))?;
            let Some((label, covariates)) = values.split_last() else {
                continue;
            };
            if covariates.is_empty() {
                return Err(GeomcError::Data(format!("line {}: no covariates", lineno + 1)));
            }
            x.push(covariates.to_vec());
            y.push(*label);
        }
        Self::new(x, y, alpha)
    }

    pub fn num_observations(&self) -> usize {
        self.x.len()
    }

    pub fn prior_precision(&self) -> f64 {
        self.alpha
    }

    fn linear_predictors(&self, beta: &[f64]) -> impl Iterator<Item = f64> + '_ {
        let beta = beta.to_vec();
        self.x
            .iter()
            .map(move |row| row.iter().zip(&beta).map(|(a, b)| a * b).sum())
    }
}

impl MetricModel for LogisticModel {
    fn dim(&self) -> usize {
        self.x[0].len()
    }

    fn log_density(&self, beta: &[f64]) -> f64 {
        let lik: f64 = self
            .linear_predictors(beta)
            .zip(&self.y)
            .map(|(s, y)| y * s - softplus(s))
            .sum();
        lik - 0.5 * self.alpha * beta.iter().map(|b| b * b).sum::<f64>()
    }

    fn grad_log_density(&self, beta: &[f64]) -> Vec<f64> {
        let mut grad: Vec<f64> = beta.iter().map(|b| -self.alpha * b).collect();
        for ((row, s), y) in self.x.iter().zip(self.linear_predictors(beta)).zip(&self.y) {
            let r = y - sigmoid(s);
            for (g, xv) in grad.iter_mut().zip(row) {
                *g += r * xv;
            }
        }
        grad
    }

    fn metric(&self, beta: &[f64]) -> DenseMatrix {
        let d = self.dim();
        let mut g = DenseMatrix::identity(d).scaled(self.alpha);
        for (row, s) in self.x.iter().zip(self.linear_predictors(beta)) {
            let p = sigmoid(s);
            let w = p * (1.0 - p);
            for i in 0..d {
                for j in 0..d {
                    g[(i, j)] += w * row[i] * row[j];
                }
            }
        }
        g
    }

    fn metric_partials(&self, beta: &[f64]) -> Vec<DenseMatrix> {
        let d = self.dim();
        let mut out = vec![DenseMatrix::zeros(d); d];
        for (row, s) in self.x.iter().zip(self.linear_predictors(beta)) {
            let p = sigmoid(s);
            let w = p * (1.0 - p) * (1.0 - 2.0 * p);
            for (k, gk) in out.iter_mut().enumerate() {
                let wk = w * row[k];
                if wk == 0.0 {
                    continue;
                }
                for i in 0..d {
                    for j in 0..d {
                        gk[(i, j)] += wk * row[i] * row[j];
                    }
                }
            }
        }
        out
    }
}
