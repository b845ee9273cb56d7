//! Chain-quality measures: ESJD, Geyer ESS, random-projection KS.

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{GeomcError, Result};
use crate::sampler::{chain_rng, ChainRecord};

/// Fewest samples [`ess`] accepts.
pub const MIN_ESS_SAMPLES: usize = 100;
pub const DEFAULT_KS_DIRECTIONS: usize = 100;

/// Mean over transitions of `α · ‖q̃ - q‖²`.
pub fn esjd(records: &[ChainRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(GeomcError::EmptyChain);
    }
    let total: f64 = records.iter().map(|r| r.accept_prob * r.sq_jump_distance).sum();
    Ok(total / records.len() as f64)
}

pub fn acceptance_rate(records: &[ChainRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(GeomcError::EmptyChain);
    }
    Ok(records.iter().filter(|r| r.accepted).count() as f64 / records.len() as f64)
}

/// Effective sample size `N / (1 + 2 Σ ρ_t)` of a scalar chain.
///
/// Autocovariances are summed directly. The sum over lags is truncated with
/// Geyer's initial positive sequence: consecutive pairs `ρ_{2m} + ρ_{2m+1}`
/// are added while positive. No upper cap is applied, so antithetic chains
/// may report more than `N`.
pub fn ess(x: &[f64]) -> Result<f64> {
    let n = x.len();
    if n < MIN_ESS_SAMPLES {
        return Err(GeomcError::ChainTooShort {
            len: n,
            min: MIN_ESS_SAMPLES,
        });
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let autocov = |lag: usize| -> f64 {
        centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64
    };
    let c0 = autocov(0);
    if !(c0 > 0.0) {
        return Err(GeomcError::DegenerateChain);
    }
    let mut tau = -1.0;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = (autocov(lag) + autocov(lag + 1)) / c0;
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        lag += 2;
    }
    Ok(n as f64 / tau)
}

/// ESS of every coordinate of a sample matrix (rows are draws).
pub fn ess_per_coordinate(samples: &[Vec<f64>]) -> Result<Vec<f64>> {
    let dim = samples.first().map_or(0, Vec::len);
    (0..dim)
        .map(|j| ess(&samples.iter().map(|row| row[j]).collect::<Vec<_>>()))
        .collect()
}

/// Exact two-sample Kolmogorov-Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(GeomcError::EmptyChain);
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(GeomcError::NonFinite { what: "KS sample" });
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut sup: f64 = 0.0;
    while i < a.len() && j < b.len() {
        // Step both empirical CDFs past every copy of the smaller value.
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(sup)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsSummary {
    pub stats: Vec<f64>,
    pub mean: f64,
}

/// KS statistics of 1-D projections onto `num_directions` uniformly random
/// unit vectors.
pub fn ks_ergodicity(
    chain: &[Vec<f64>],
    iid: &[Vec<f64>],
    num_directions: usize,
    rng: &mut dyn RngCore,
) -> Result<KsSummary> {
    if chain.is_empty() || iid.is_empty() {
        return Err(GeomcError::EmptyChain);
    }
    if num_directions == 0 {
        return Err(GeomcError::invalid("num_directions", "must be positive"));
    }
    let dim = chain[0].len();
    if let Some(bad) = chain.iter().chain(iid).find(|r| r.len() != dim) {
        return Err(GeomcError::DimensionMismatch {
            expected: dim,
            found: bad.len(),
        });
    }
    let project = |rows: &[Vec<f64>], u: &[f64]| -> Vec<f64> {
        rows.iter()
            .map(|r| r.iter().zip(u).map(|(a, b)| a * b).sum())
            .collect()
    };
    let mut stats = Vec::with_capacity(num_directions);
    for _ in 0..num_directions {
        let u = random_direction(dim, rng);
        stats.push(ks_two_sample(&project(chain, &u), &project(iid, &u))?);
    }
    let mean = stats.iter().sum::<f64>() / stats.len() as f64;
    Ok(KsSummary { stats, mean })
}

fn random_direction(dim: usize, rng: &mut dyn RngCore) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut *rng)).collect();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return g.into_iter().map(|v| v / norm).collect();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub num_samples: usize,
    pub esjd: f64,
    pub ess_per_coordinate: Vec<f64>,
    pub min_ess: f64,
    pub mean_ess: f64,
    /// Seconds spent inside transitions, excluding diagnostics.
    pub wall_clock_secs: f64,
    pub ess_per_second_min: f64,
    pub ess_per_second_mean: f64,
    pub acceptance_rate: f64,
    pub divergences: usize,
    pub ks: Option<KsSummary>,
}

/// Aggregates all diagnostics. KS directions come from `seed`; the KS block
/// is omitted when no i.i.d. reference is given.
pub fn build_report(
    records: &[ChainRecord],
    samples: &[Vec<f64>],
    iid: Option<&[Vec<f64>]>,
    seed: u64,
) -> Result<DiagnosticsReport> {
    let esjd = esjd(records)?;
    let acceptance_rate = acceptance_rate(records)?;
    let ess_per_coordinate = ess_per_coordinate(samples)?;
    let min_ess = ess_per_coordinate.iter().copied().fold(f64::INFINITY, f64::min);
    let mean_ess = ess_per_coordinate.iter().sum::<f64>() / ess_per_coordinate.len() as f64;
    let nanos: u64 = records.iter().map(|r| r.wall_clock_nanos).sum();
    let wall_clock_secs = nanos as f64 * 1e-9;
    let per_second = |ess: f64| {
        if wall_clock_secs > 0.0 {
            ess / wall_clock_secs
        } else {
            f64::INFINITY
        }
    };
    let ks = match iid {
        Some(reference) => Some(ks_ergodicity(
            samples,
            reference,
            DEFAULT_KS_DIRECTIONS,
            &mut chain_rng(seed, 0),
        )?),
        None => None,
    };
    Ok(DiagnosticsReport {
        num_samples: samples.len(),
        esjd,
        min_ess,
        mean_ess,
        ess_per_second_min: per_second(min_ess),
        ess_per_second_mean: per_second(mean_ess),
        ess_per_coordinate,
        wall_clock_secs,
        acceptance_rate,
        divergences: records.iter().filter(|r| r.diverged).count(),
        ks,
    })
}
