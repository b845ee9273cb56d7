use geomc::diagnostics::ks_ergodicity;
use geomc::geometry::{finite_difference_gradient, finite_difference_partials};
use geomc::integrators::{integrate_trajectory, Integrator, IntegratorConfig};
use geomc::models::{
    default_true_theta, generate_banana_data, k_step_esjd_from_propagators, one_step_esjd_closed_form, propagator,
    BananaModel, BananaReference, EuclideanView, GeodesicModel, HarmonicModel, LeapfrogVariant, LogisticModel,
    MisspecifiedModel, ReferenceSampler, StudentTModel,
};
use geomc::sampler::chain_rng;
use geomc::{DenseMatrix, GeomcError, MetricModel, PhasePoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn catalog() -> Vec<(&'static str, Box<dyn MetricModel>, f64)> {
    // (name, model, spread of the broad Gaussian used to draw test points)
    vec![
        ("banana", Box::new(BananaModel::paper_default()), 2.0),
        ("logistic-breast", Box::new(LogisticModel::breast_like(1).unwrap()), 1.0),
        ("logistic-thyroid", Box::new(LogisticModel::thyroid_like(2).unwrap()), 1.0),
        ("student-t", Box::new(StudentTModel::multiscale(20, 5e3, 1e2).unwrap()), 5.0),
        ("student-t-heavy", Box::new(StudentTModel::multiscale(4, 3.0, 4.0).unwrap()), 5.0),
        ("harmonic", Box::new(HarmonicModel::new(2.0, 3).unwrap()), 2.0),
    ]
}

fn broad_draw(dim: usize, spread: f64, rng: &mut impl Rng) -> Vec<f64> {
    (0..dim)
        .map(|_| spread * Distribution::<f64>::sample(&StandardNormal, rng))
        .collect()
}

fn mean_and_var(xs: impl Iterator<Item = f64>) -> (f64, f64, usize) {
    let v: Vec<f64> = xs.collect();
    let n = v.len();
    let mean = v.iter().sum::<f64>() / n as f64;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var, n)
}

#[test]
fn gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for (name, model, spread) in catalog() {
        for _ in 0..25 {
            let q = broad_draw(model.dim(), spread, &mut rng);
            let exact = model.grad_log_density(&q);
            let fd = finite_difference_gradient(model.as_ref(), &q, 1e-5);
            let scale = exact.iter().fold(1.0f64, |a, b| a.max(b.abs()));
            for (a, b) in exact.iter().zip(&fd) {
                assert!((a - b).abs() <= 1e-6 * scale, "{name}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn metric_partials_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for (name, model, spread) in catalog() {
        for _ in 0..25 {
            let q = broad_draw(model.dim(), spread, &mut rng);
            let exact = model.metric_partials(&q);
            let fd = finite_difference_partials(model.as_ref(), &q, 1e-5);
            let scale = exact.iter().fold(1.0f64, |a, g| a.max(g.max_abs()));
            for (k, (a, b)) in exact.iter().zip(&fd).enumerate() {
                let gap = a.max_abs_diff(b);
                assert!(gap <= 1e-5 * scale, "{name}: g_{k} off by {gap:e}");
            }
        }
    }
}

#[test]
fn metrics_are_positive_definite_on_broad_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for (name, model, spread) in catalog() {
        for _ in 0..1000 {
            let q = broad_draw(model.dim(), spread, &mut rng);
            let g = model.metric(&q);
            assert!(g.is_symmetric(1e-12), "{name}");
            assert!(g.cholesky().is_ok(), "{name}: metric not PD at {q:?}");
            assert!(model.log_density(&q).is_finite(), "{name}");
        }
    }
}

#[test]
fn banana_fixture_is_the_seed_zero_draw() {
    let model = BananaModel::paper_default();
    assert_eq!(model.n(), 100);
    assert_eq!((model.sigma_sq_theta(), model.sigma_sq_y()), (2.0, 2.0));
    let regenerated = generate_banana_data(0, 100, default_true_theta(), 2.0);
    for (a, b) in model.observations().iter().zip(&regenerated) {
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
    }
}

#[test]
fn banana_metric_is_fisher_plus_prior_precision() {
    let model = BananaModel::paper_default();
    for theta2 in [-1.5, 0.0, 0.7] {
        let q = [0.3, theta2];
        let w = 100.0 / 2.0;
        let expected = DenseMatrix::from_rows(&[
            vec![w + 0.5, w * 2.0 * theta2],
            vec![w * 2.0 * theta2, w * 4.0 * theta2 * theta2 + 0.5],
        ])
        .unwrap();
        assert!(model.metric(&q).max_abs_diff(&expected) < 1e-12);
    }
}

#[test]
fn banana_reference_cdf_endpoints() {
    let reference = BananaReference::new(&BananaModel::paper_default()).unwrap();
    assert!(reference.cdf_theta2(-1e6).abs() <= 1e-10);
    assert!((reference.cdf_theta2(1e6) - 1.0).abs() <= 1e-10);
    assert!(reference.cdf_theta2(f64::NEG_INFINITY).abs() <= 1e-10);
    assert!((reference.cdf_theta2(f64::INFINITY) - 1.0).abs() <= 1e-10);
    // The posterior is symmetric in θ₂.
    assert!((reference.cdf_theta2(0.0) - 0.5).abs() < 1e-6);
}

#[test]
fn banana_conditional_is_the_conjugate_normal() {
    let model = BananaModel::paper_default();
    let y = model.observations();
    for theta2 in [-1.0, 0.2, 0.9] {
        // θ₁ ~ N(0, 2) prior; y_i - θ₂² ~ N(θ₁, 2) likelihood.
        let precision = 1.0 / 2.0 + y.len() as f64 / 2.0;
        let mean = y.iter().map(|v| v - theta2 * theta2).sum::<f64>() / 2.0 / precision;
        let (m, v) = model.conditional_theta1(theta2);
        assert!((m - mean).abs() < 1e-12);
        assert!((v - 1.0 / precision).abs() < 1e-15);
    }

    // Draws at a fixed θ₂ slice reproduce the conditional moments.
    let reference = BananaReference::new(&model).unwrap();
    let draws = reference.sample(100_000, &mut chain_rng(5, 0)).unwrap();
    let residual = draws.iter().map(|d| {
        let (m, v) = model.conditional_theta1(d[1]);
        (d[0] - m) / v.sqrt()
    });
    let (mean, var, n) = mean_and_var(residual);
    assert!(mean.abs() < 3.0 / (n as f64).sqrt());
    assert!((var - 1.0).abs() < 3.0 * (2.0 / n as f64).sqrt());
}

#[test]
fn banana_reference_batches_agree() {
    let reference = BananaReference::new(&BananaModel::paper_default()).unwrap();
    let a = reference.sample(100_000, &mut chain_rng(6, 0)).unwrap();
    let b = reference.sample(100_000, &mut chain_rng(6, 1)).unwrap();
    let ks = ks_ergodicity(&a, &b, 100, &mut chain_rng(6, 2)).unwrap();
    assert!(ks.mean < 0.01, "mean KS {}", ks.mean);
}

#[test]
fn student_t_reference_moments() {
    let model = StudentTModel::multiscale(20, 5e3, 1e2).unwrap();
    let draws = model.sample(100_000, &mut chain_rng(7, 0)).unwrap();
    for (k, s) in model.scale().iter().enumerate() {
        let (mean, var, n) = mean_and_var(draws.iter().map(|d| d[k]));
        assert!((var / s - 1.0).abs() < 0.05, "coordinate {k}: variance {var} vs {s}");
        assert!(mean.abs() < 3.0 * (var / n as f64).sqrt(), "coordinate {k}: mean {mean}");
    }

    let heavy = StudentTModel::multiscale(3, 6.0, 4.0).unwrap();
    let draws = heavy.sample(400_000, &mut chain_rng(7, 1)).unwrap();
    let (_, var, _) = mean_and_var(draws.iter().map(|d| d[2]));
    let expected = 4.0 * 6.0 / 4.0;
    assert!((var / expected - 1.0).abs() < 0.05, "variance {var} vs {expected}");
}

#[test]
fn student_t_log_density_follows_the_density_formula() {
    let model = StudentTModel::multiscale(20, 5e3, 1e2).unwrap();
    let formula = |x: &[f64]| {
        let r: f64 = x.iter().zip(model.scale()).map(|(v, s)| v * v / s).sum();
        -(5e3 + 20.0) / 2.0 * (1.0 + r / 5e3).ln()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let a = broad_draw(20, 3.0, &mut rng);
    let b = broad_draw(20, 3.0, &mut rng);
    let got = model.log_density(&a) - model.log_density(&b);
    let want = formula(&a) - formula(&b);
    assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0));
}

#[test]
fn logistic_shapes_and_csv_loader() {
    let breast = LogisticModel::breast_like(0).unwrap();
    assert_eq!((breast.num_observations(), breast.dim()), (277, 10));
    let thyroid = LogisticModel::thyroid_like(0).unwrap();
    assert_eq!((thyroid.num_observations(), thyroid.dim()), (215, 6));

    let csv = "a,b,label\n0.5,1.0,1\n-1.0,2.0,0\n0.0,0.0,1\n";
    let model = LogisticModel::from_csv_str(csv, 0.01).unwrap();
    assert_eq!((model.num_observations(), model.dim()), (3, 2));
    let g = model.metric(&[0.0, 0.0]);
    // σ(0) = 1/2 so Λ = ¼ Id.
    let expected = DenseMatrix::from_rows(&[vec![0.25 * 1.25 + 0.01, 0.25 * -1.5], vec![0.25 * -1.5, 0.25 * 5.0 + 0.01]])
        .unwrap();
    assert!(g.max_abs_diff(&expected) < 1e-14);

    assert!(LogisticModel::from_csv_str("a,label\n1.0,2\n", 0.01).is_err());
    assert!(LogisticModel::from_csv_str("a,label\nx,1\n", 0.01).is_err());
}

#[test]
fn misspecification_only_touches_the_partials() {
    let base = BananaModel::paper_default();
    let q = [0.4, -0.9];
    let same = MisspecifiedModel::new(base.clone(), 0.0);
    assert_eq!(same.metric_partials(&q), base.metric_partials(&q));

    let wrong = MisspecifiedModel::new(base.clone(), 0.3);
    assert_eq!(wrong.metric(&q), base.metric(&q));
    assert_eq!(wrong.log_density(&q), base.log_density(&q));
    for (g, h) in wrong.metric_partials(&q).iter().zip(base.metric_partials(&q)) {
        assert!(g.max_abs_diff(&h.scaled(1.3)) < 1e-12);
        assert!(g.is_symmetric(0.0));
    }

    let one = MisspecifiedModel::with_selected(base.clone(), 0.3, vec![1]);
    let parts = one.metric_partials(&q);
    assert_eq!(parts[0], base.metric_partials(&q)[0]);
}

#[test]
fn esjd_closed_form_examples() {
    for variant in [LeapfrogVariant::Standard, LeapfrogVariant::Inverted] {
        for eps in [0.1, 0.7, 1.9] {
            assert!((one_step_esjd_closed_form(0.0, eps, variant).unwrap() - eps * eps).abs() < 1e-15);
        }
    }
    assert!((one_step_esjd_closed_form(1.0, 1.0, LeapfrogVariant::Standard).unwrap() - 1.25).abs() < 1e-15);
    // ε⁴ω²/4 + ε²(1 - ε²ω²/4)² at ω = ε = 1.
    assert!((one_step_esjd_closed_form(1.0, 1.0, LeapfrogVariant::Inverted).unwrap() - 0.8125).abs() < 1e-15);
    assert!(matches!(
        one_step_esjd_closed_form(1.0, 2.0, LeapfrogVariant::Standard),
        Err(GeomcError::UnstableRegime { .. })
    ));
    assert!(k_step_esjd_from_propagators(2.0, 1.0, 3, LeapfrogVariant::Inverted).is_err());
}

#[test]
fn propagators_reproduce_one_integrator_step() {
    let model = HarmonicModel::new(1.7, 1).unwrap();
    let eps = 0.3;
    for (variant, integrator) in [
        (LeapfrogVariant::Standard, Integrator::StandardLeapfrog),
        (LeapfrogVariant::Inverted, Integrator::InvertedLeapfrog),
    ] {
        let r = propagator(1.7, eps, variant);
        let state = PhasePoint::from_momentum(&model, vec![0.8], vec![-0.4]).unwrap();
        let out = integrate_trajectory(&model, &integrator, &state, &IntegratorConfig::new(eps, 1)).unwrap();
        let p = out.next.momentum(&model).unwrap()[0];
        assert!((out.next.q()[0] - (r[0][0] * 0.8 + r[0][1] * -0.4)).abs() < 1e-15);
        assert!((p - (r[1][0] * 0.8 + r[1][1] * -0.4)).abs() < 1e-15);
    }
}

#[test]
fn one_step_propagator_esjd_is_the_closed_form() {
    for variant in [LeapfrogVariant::Standard, LeapfrogVariant::Inverted] {
        for omega in [0.5, 1.0, 2.0] {
            for eps in [0.1, 0.5, 0.9] {
                let a = k_step_esjd_from_propagators(omega, eps, 1, variant).unwrap();
                let b = one_step_esjd_closed_form(omega, eps, variant).unwrap();
                assert!((a - b).abs() <= 1e-12 * b, "{variant:?} ω={omega} ε={eps}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn propagator_esjd_ballistic_limit() {
    for variant in [LeapfrogVariant::Standard, LeapfrogVariant::Inverted] {
        for k in [1usize, 10, 50] {
            let eps = 1e-3;
            let t = k as f64 * eps;
            let got = k_step_esjd_from_propagators(1.0, eps, k, variant).unwrap();
            assert!((got - t * t).abs() <= t.powi(4), "{variant:?} k={k}");
        }
    }
}

#[test]
fn empirical_one_step_esjd_matches_closed_form() {
    let model = HarmonicModel::new(1.0, 1).unwrap();
    let mut rng = chain_rng(24, 0);
    for (variant, integrator) in [
        (LeapfrogVariant::Standard, Integrator::StandardLeapfrog),
        (LeapfrogVariant::Inverted, Integrator::InvertedLeapfrog),
    ] {
        let eps = 1.0;
        let cfg = IntegratorConfig::new(eps, 1);
        let n = 1_000_000;
        let mut total = 0.0;
        for _ in 0..n {
            let q: f64 = StandardNormal.sample(&mut rng);
            let p: f64 = StandardNormal.sample(&mut rng);
            let state = PhasePoint::from_momentum(&model, vec![q], vec![p]).unwrap();
            let out = integrate_trajectory(&model, &integrator, &state, &cfg).unwrap();
            total += (out.next.q()[0] - q).powi(2);
        }
        let empirical = total / n as f64;
        let exact = one_step_esjd_closed_form(1.0, eps, variant).unwrap();
        assert!((empirical / exact - 1.0).abs() < 0.01, "{variant:?}: {empirical} vs {exact}");
    }
}

#[test]
fn leapfrog_jumps_at_least_as_far_as_inverted() {
    for i in 0..10 {
        let eps = 0.1 + 0.2 * i as f64;
        for k in 1..=100 {
            let a = k_step_esjd_from_propagators(1.0, eps, k, LeapfrogVariant::Standard).unwrap();
            let b = k_step_esjd_from_propagators(1.0, eps, k, LeapfrogVariant::Inverted).unwrap();
            assert!(a - b >= -1e-12, "ε={eps} k={k}: {a} < {b}");
        }
    }
}

#[test]
fn geodesic_exact_flow_solves_the_geodesic_equation() {
    // a = v²/q along q_t = q₀ exp(q₀ p₀ t).
    let (q0, p0) = (1.3, 0.4);
    let h = 1e-4;
    for t in [0.0, 0.5, 2.0] {
        let (q, v) = GeodesicModel::exact_flow(q0, p0, t);
        let (_, vp) = GeodesicModel::exact_flow(q0, p0, t + h);
        let (_, vm) = GeodesicModel::exact_flow(q0, p0, t - h);
        let accel = (vp - vm) / (2.0 * h);
        assert!((accel - v * v / q).abs() < 1e-6 * (v * v / q));
    }
}

#[test]
fn euclidean_view_keeps_the_target_and_drops_the_metric() {
    let base = BananaModel::paper_default();
    let flat = EuclideanView::new(&base);
    let q = [0.1, 0.8];
    assert_eq!(flat.log_density(&q), base.log_density(&q));
    assert_eq!(flat.metric(&q), DenseMatrix::identity(2));
    assert!(flat.metric_partials(&q).iter().all(|g| g.max_abs() == 0.0));
}
