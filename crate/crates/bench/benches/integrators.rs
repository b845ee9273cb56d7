use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use geomc::integrators::{integrate_trajectory, Integrator, IntegratorConfig};
use geomc::sampler::{run_chain, ChainConfig, Method};
use geomc_bench::{banana_states, perturbed_identity, student_t_states};
use std::hint::black_box;

fn single_steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("step/banana");
    let (model, states) = banana_states(64, 1);
    let cfg = IntegratorConfig::new(0.04, 1);
    for integrator in [
        Integrator::GeneralizedLeapfrog,
        Integrator::LagrangianLeapfrog,
        Integrator::InvertedLagrangianLeapfrog,
    ] {
        group.bench_function(integrator.to_string(), |b| {
            let mut i = 0;
            b.iter(|| {
                i = (i + 1) % states.len();
                black_box(integrate_trajectory(&model, &integrator, &states[i], &cfg).unwrap())
            })
        });
    }
    group.finish();
}

fn student_t_trajectories(c: &mut Criterion) {
    let mut group = c.benchmark_group("trajectory/student-t");
    group.sample_size(20);
    let cfg = IntegratorConfig::new(0.7, 20);
    for dim in [5, 20] {
        let (model, states) = student_t_states(dim, 16, 2);
        for integrator in [
            Integrator::GeneralizedLeapfrog,
            Integrator::LagrangianLeapfrog,
            Integrator::InvertedLagrangianLeapfrog,
        ] {
            group.bench_with_input(BenchmarkId::new(integrator.to_string(), dim), &states, |b, states| {
                let mut i = 0;
                b.iter(|| {
                    i = (i + 1) % states.len();
                    black_box(integrate_trajectory(&model, &integrator, &states[i], &cfg).unwrap())
                })
            });
        }
    }
    group.finish();
}

fn factorizations(c: &mut Criterion) {
    let mut group = c.benchmark_group("plu");
    for dim in [2, 10, 20, 50] {
        let m = perturbed_identity(dim, 3);
        let rhs = vec![1.0; dim];
        group.bench_with_input(BenchmarkId::new("factor+solve+logdet", dim), &m, |b, m| {
            b.iter(|| {
                let lu = m.plu().unwrap();
                black_box((lu.solve(&rhs).unwrap(), lu.log_abs_det()))
            })
        });
    }
    group.finish();
}

fn chains(c: &mut Criterion) {
    let mut group = c.benchmark_group("chain/banana-200");
    group.sample_size(10);
    let (model, _) = banana_states(1, 4);
    for (method, eps, k) in [
        (Method::Hmc, 0.1, 10),
        (Method::Rmhmc, 0.04, 20),
        (Method::Lmc, 0.1, 20),
        (Method::Ilmc, 0.1, 20),
    ] {
        let cfg = ChainConfig::new(method, IntegratorConfig::new(eps, k), 200, 5, vec![0.5, 0.5]);
        group.bench_function(method.name(), |b| b.iter(|| black_box(run_chain(&model, &cfg).unwrap())));
    }
    group.finish();
}

criterion_group!(benches, single_steps, student_t_trajectories, factorizations, chains);
criterion_main!(benches);
