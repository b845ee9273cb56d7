//! Geometric MCMC: Riemannian-manifold HMC, Lagrangian Monte Carlo and its
//! inverted variant, sharing one involutive Metropolis kernel.

pub mod error;
pub mod geometry;
pub mod diagnostics;
pub mod integrators;
pub mod linalg;
pub mod models;
pub mod sampler;
pub mod verification;

pub use error::{GeomcError, Result};
pub use geometry::{MetricModel, PhasePoint, PointGeometry, RiemannianTarget};
pub use linalg::{CholeskyFactors, DenseMatrix, LogDet, PluFactors};
