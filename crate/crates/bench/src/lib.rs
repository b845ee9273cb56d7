//! Shared fixtures for the benchmarks.

use geomc::models::{BananaModel, BananaReference, ReferenceSampler, StudentTModel};
use geomc::sampler::{chain_rng, resample_momentum};
use geomc::{DenseMatrix, MetricModel, PhasePoint, PointGeometry};
use rand::Rng;

/// Phase points with positions drawn from the exact banana posterior.
pub fn banana_states(count: usize, seed: u64) -> (BananaModel, Vec<PhasePoint>) {
    let model = BananaModel::paper_default();
    let positions = BananaReference::new(&model)
        .expect("default banana is valid")
        .sample(count, &mut chain_rng(seed, 0))
        .expect("reference sampler");
    let states = momenta(&model, positions, seed);
    (model, states)
}

/// The multiscale Student-t target with its stationary phase points.
pub fn student_t_states(dim: usize, count: usize, seed: u64) -> (StudentTModel, Vec<PhasePoint>) {
    let model = StudentTModel::multiscale(dim, 5e3, 1e2).expect("valid parameters");
    let positions = model.sample(count, &mut chain_rng(seed, 0)).expect("reference sampler");
    let states = momenta(&model, positions, seed);
    (model, states)
}

fn momenta(model: &dyn MetricModel, positions: Vec<Vec<f64>>, seed: u64) -> Vec<PhasePoint> {
    let mut rng = chain_rng(seed, 1);
    positions
        .into_iter()
        .map(|q| {
            let geom = PointGeometry::new(model, q).expect("finite position");
            let p = resample_momentum(model, &geom, &mut rng).expect("positive definite metric");
            PhasePoint::with_momentum(geom, p).expect("matching dimension")
        })
        .collect()
}

/// `Id + A` with small random `A`, the shape of matrix the Lagrangian steps factor.
pub fn perturbed_identity(dim: usize, seed: u64) -> DenseMatrix {
    let mut rng = chain_rng(seed, 0);
    DenseMatrix::from_fn(dim, |i, j| {
        let noise: f64 = rng.random_range(-0.1..0.1);
        if i == j { 1.0 + noise } else { noise }
    })
}
