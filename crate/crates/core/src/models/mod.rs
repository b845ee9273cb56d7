//! Target distributions, their i.i.d. reference samplers, and metric wrappers.

mod banana;
mod geodesic;
mod harmonic;
mod logistic;
mod misspecified;
mod student_t;

pub use banana::{
    default_true_theta, generate_banana_data, BananaModel, BananaReference, DEFAULT_N as BANANA_DEFAULT_N,
    DEFAULT_SIGMA_SQ as BANANA_DEFAULT_SIGMA_SQ,
};
pub use geodesic::GeodesicModel;
pub use harmonic::{
    k_step_esjd_from_propagators, one_step_esjd_closed_form, propagator, HarmonicModel, LeapfrogVariant,
};
pub use logistic::{LogisticModel, DEFAULT_PRIOR_PRECISION};
pub use misspecified::MisspecifiedModel;
pub use student_t::StudentTModel;

use rand::RngCore;

use crate::error::Result;
use crate::geometry::MetricModel;
use crate::linalg::DenseMatrix;

/// Exact i.i.d. draws from a model's target, used as the ergodicity baseline.
pub trait ReferenceSampler: Send + Sync {
    fn sample(&self, count: usize, rng: &mut dyn RngCore) -> Result<Vec<Vec<f64>>>;
}

/// The same target with the identity metric; Euclidean HMC runs on this.
#[derive(Debug, Clone)]
pub struct EuclideanView<M> {
    base: M,
}

impl<M: MetricModel> EuclideanView<M> {
    pub fn new(base: M) -> Self {
        Self { base }
    }

    pub fn base(&self) -> &M {
        &self.base
    }
}

impl<M: MetricModel> MetricModel for EuclideanView<M> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn log_density(&self, q: &[f64]) -> f64 {
        self.base.log_density(q)
    }

    fn grad_log_density(&self, q: &[f64]) -> Vec<f64> {
        self.base.grad_log_density(q)
    }

    fn metric(&self, _q: &[f64]) -> DenseMatrix {
        DenseMatrix::identity(self.dim())
    }

    fn metric_partials(&self, _q: &[f64]) -> Vec<DenseMatrix> {
        vec![DenseMatrix::zeros(self.dim()); self.dim()]
    }

    fn in_domain(&self, q: &[f64]) -> bool {
        self.base.in_domain(q)
    }
}
