use geomc::diagnostics::{
    acceptance_rate, build_report, esjd, ess, ess_per_coordinate, ks_ergodicity, ks_two_sample,
};
use geomc::integrators::IntegratorConfig;
use geomc::models::{one_step_esjd_closed_form, HarmonicModel, LeapfrogVariant, ReferenceSampler};
use geomc::sampler::{chain_rng, run_chain, ChainConfig, ChainRecord, Method};
use geomc::GeomcError;
use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};

fn record(accept_prob: f64, sq_jump_distance: f64) -> ChainRecord {
    ChainRecord {
        accepted: accept_prob > 0.5,
        accept_prob,
        log_abs_jacobian: 0.0,
        current_energy: 0.0,
        proposal_energy: 0.0,
        sq_jump_distance,
        wall_clock_nanos: 1_000,
        fixed_point_iters: 0,
        omega_determinants: 0,
        diverged: false,
    }
}

fn normals(n: usize, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = chain_rng(seed, stream);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

#[test]
fn esjd_examples() {
    assert_eq!(esjd(&[record(0.0, 3.0), record(0.0, 1.0)]).unwrap(), 0.0);
    assert_eq!(esjd(&[record(1.0, 2.5)]).unwrap(), 2.5);
    assert_eq!(esjd(&[record(0.5, 2.0), record(1.0, 1.0)]).unwrap(), 1.0);
    assert!(matches!(esjd(&[]), Err(GeomcError::EmptyChain)));
    assert_eq!(acceptance_rate(&[record(1.0, 0.0), record(0.0, 0.0)]).unwrap(), 0.5);
}

#[test]
fn harmonic_chain_esjd_matches_closed_form() {
    let model = HarmonicModel::new(1.0, 1).unwrap();
    let eps = 0.2;
    let cfg = ChainConfig::new(Method::Hmc, IntegratorConfig::new(eps, 1), 1_000_000, 70, vec![0.0]);
    let out = run_chain(&model, &cfg).unwrap();
    let exact = one_step_esjd_closed_form(1.0, eps, LeapfrogVariant::Standard).unwrap();
    let weighted = esjd(&out.records).unwrap();
    assert!((weighted / exact - 1.0).abs() < 0.02, "{weighted} vs {exact}");
    let proposed = out.records.iter().map(|r| r.sq_jump_distance).sum::<f64>() / out.records.len() as f64;
    assert!((proposed / exact - 1.0).abs() < 0.02, "{proposed} vs {exact}");
}

#[test]
fn iid_ess_is_close_to_the_sample_size() {
    let x = normals(10_000, 71, 0);
    let n_eff = ess(&x).unwrap();
    assert!((9_000.0..=11_000.0).contains(&n_eff), "{n_eff}");
}

#[test]
fn ar1_ess_matches_the_closed_form() {
    let phi: f64 = 0.5;
    let z = normals(100_000, 72, 0);
    let mut x = Vec::with_capacity(z.len());
    let mut prev = 0.0;
    for e in z {
        prev = phi * prev + (1.0 - phi * phi).sqrt() * e;
        x.push(prev);
    }
    let ratio = ess(&x).unwrap() / x.len() as f64;
    let expected = (1.0 - phi) / (1.0 + phi);
    assert!((ratio / expected - 1.0).abs() < 0.1, "{ratio} vs {expected}");
}

#[test]
fn antithetic_chain_ess_is_not_capped() {
    let phi: f64 = -0.5;
    let z = normals(100_000, 73, 0);
    let mut x = Vec::with_capacity(z.len());
    let mut prev = 0.0;
    for e in z {
        prev = phi * prev + e;
        x.push(prev);
    }
    let ratio = ess(&x).unwrap() / x.len() as f64;
    let expected = (1.0 - phi) / (1.0 + phi);
    assert!((ratio / expected - 1.0).abs() < 0.1, "{ratio} vs {expected}");
}

#[test]
fn ess_error_cases() {
    assert!(matches!(ess(&vec![1.0; 500]), Err(GeomcError::DegenerateChain)));
    assert!(matches!(ess(&[0.0, 1.0, 2.0]), Err(GeomcError::ChainTooShort { .. })));
}

#[test]
fn ks_examples() {
    let a = normals(1_000, 74, 0);
    assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
    assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 1.0);
    assert_eq!(ks_two_sample(&[1.0, 2.0, 3.0, 4.0], &[3.0, 4.0]).unwrap(), 0.5);
    // Ties across the samples step both CDFs together.
    assert_eq!(ks_two_sample(&[1.0, 1.0, 2.0], &[1.0, 2.0, 2.0]).unwrap(), 1.0 / 3.0);

    let rows: Vec<Vec<f64>> = a.chunks(2).map(|c| c.to_vec()).collect();
    let same = ks_ergodicity(&rows, &rows, 10, &mut chain_rng(74, 1)).unwrap();
    assert!(same.stats.iter().all(|s| *s == 0.0));
    assert_eq!(same.mean, 0.0);
}

#[test]
fn ks_detects_a_unit_shift() {
    let a: Vec<Vec<f64>> = normals(100_000, 75, 0).into_iter().map(|x| vec![x]).collect();
    let b: Vec<Vec<f64>> = normals(100_000, 75, 1).into_iter().map(|x| vec![x + 1.0]).collect();
    let ks = ks_ergodicity(&a, &b, 1, &mut chain_rng(75, 2)).unwrap();
    // sup_x Φ(x) - Φ(x - 1) = 2Φ(½) - 1.
    assert!((ks.mean - 0.3829).abs() < 0.02, "{}", ks.mean);
}

#[test]
fn ks_null_batches_are_close() {
    let gauss = HarmonicModel::new(1.0, 4).unwrap();
    let a = gauss.sample(100_000, &mut chain_rng(76, 0)).unwrap();
    let b = gauss.sample(100_000, &mut chain_rng(76, 1)).unwrap();
    let ks = ks_ergodicity(&a, &b, 100, &mut chain_rng(76, 2)).unwrap();
    assert_eq!(ks.stats.len(), 100);
    assert!(ks.mean < 0.01, "{}", ks.mean);
}

#[test]
fn ks_rejects_mismatched_dimensions() {
    let a = vec![vec![0.0, 1.0]; 5];
    let b = vec![vec![0.0]; 5];
    assert!(matches!(
        ks_ergodicity(&a, &b, 3, &mut chain_rng(0, 0)),
        Err(GeomcError::DimensionMismatch { .. })
    ));
    assert!(matches!(ks_ergodicity(&[], &b, 3, &mut chain_rng(0, 0)), Err(GeomcError::EmptyChain)));
}

#[test]
fn hmc_on_a_gaussian_is_ergodic() {
    let model = HarmonicModel::new(1.0, 2).unwrap();
    let cfg = ChainConfig::new(Method::Hmc, IntegratorConfig::new(0.1, 10), 100_000, 77, vec![0.0, 0.0]);
    let out = run_chain(&model, &cfg).unwrap();
    let iid = model.sample(100_000, &mut chain_rng(77, 1 << 32)).unwrap();
    let ks = ks_ergodicity(&out.samples, &iid, 100, &mut chain_rng(77, 2 << 32)).unwrap();
    assert!(ks.mean < 0.02, "{}", ks.mean);
}

#[test]
fn report_aggregates_and_is_deterministic() {
    let model = HarmonicModel::new(1.0, 2).unwrap();
    let cfg = ChainConfig::new(Method::Lmc, IntegratorConfig::new(0.3, 5), 2_000, 78, vec![0.0, 0.0]);
    let out = run_chain(&model, &cfg).unwrap();
    let iid = model.sample(2_000, &mut chain_rng(78, 1)).unwrap();

    let without = build_report(&out.records, &out.samples, None, 5).unwrap();
    assert!(without.ks.is_none());
    assert!(without.min_ess <= without.mean_ess);
    assert_eq!(without.ess_per_coordinate, ess_per_coordinate(&out.samples).unwrap());
    assert_eq!(without.num_samples, 2_000);
    assert!(without.wall_clock_secs > 0.0);

    let with = build_report(&out.records, &out.samples, Some(&iid), 5).unwrap();
    let again = build_report(&out.records, &out.samples, Some(&iid), 5).unwrap();
    let ks = with.ks.as_ref().unwrap();
    assert_eq!(ks.stats.len(), 100);
    assert!(ks.stats.iter().all(|s| (0.0..=1.0).contains(s)));
    assert_eq!(with.ks, again.ks);
}

proptest! {
    #[test]
    fn ks_statistic_is_a_probability_gap(
        a in prop::collection::vec(-10.0f64..10.0, 1..60),
        b in prop::collection::vec(-10.0f64..10.0, 1..60),
    ) {
        let d = ks_two_sample(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(d, ks_two_sample(&b, &a).unwrap());
    }

    #[test]
    fn esjd_ignores_everything_but_jumps_and_probabilities(alpha in 0.0f64..1.0, jump in 0.0f64..10.0, energy in -5.0f64..5.0) {
        let mut r = record(alpha, jump);
        let base = esjd(&[r.clone()]).unwrap();
        r.current_energy = energy;
        r.log_abs_jacobian = -energy;
        prop_assert_eq!(esjd(&[r]).unwrap(), base);
    }
}
