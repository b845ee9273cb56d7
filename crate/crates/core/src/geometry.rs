//! Riemannian machinery shared by every integrator.
//!
//! A [`MetricModel`] supplies the log-density, its gradient, the metric and the
//! metric's coordinate partials. Everything else (potential, Christoffel
//! symbols, `Ω`, Legendre maps, energies) is derived here, always with
//! `U(q) = -L(q) + ½ log det G(q)` so that the position marginal of
//! `exp(-H)` is the target.
//!
//! Partials are taken as given: nothing here checks that they really are the
//! derivatives of `G`. The robustness experiment relies on this.

use std::cell::OnceCell;
use std::sync::Arc;

use crate::error::{GeomcError, Result};
use crate::linalg::{dot, CholeskyFactors, DenseMatrix, PluFactors};

/// A target density together with a Riemannian metric on its domain.
///
/// Implementations must be pure: chains evaluate one model from several
/// threads at once.
pub trait MetricModel: Send + Sync {
    fn dim(&self) -> usize;

    /// Log-density up to an additive constant.
    fn log_density(&self, q: &[f64]) -> f64;

    fn grad_log_density(&self, q: &[f64]) -> Vec<f64>;

    /// Symmetric positive-definite metric `G(q)`.
    fn metric(&self, q: &[f64]) -> DenseMatrix;

    /// `g_k(q)`, nominally `∂G/∂q^(k)`, one symmetric matrix per coordinate.
    fn metric_partials(&self, q: &[f64]) -> Vec<DenseMatrix>;

    /// Whether `q` lies in the support of the model.
    fn in_domain(&self, _q: &[f64]) -> bool {
        true
    }
}

impl<T: MetricModel + ?Sized> MetricModel for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn log_density(&self, q: &[f64]) -> f64 {
        (**self).log_density(q)
    }
    fn grad_log_density(&self, q: &[f64]) -> Vec<f64> {
        (**self).grad_log_density(q)
    }
    fn metric(&self, q: &[f64]) -> DenseMatrix {
        (**self).metric(q)
    }
    fn metric_partials(&self, q: &[f64]) -> Vec<DenseMatrix> {
        (**self).metric_partials(q)
    }
    fn in_domain(&self, q: &[f64]) -> bool {
        (**self).in_domain(q)
    }
}

macro_rules! forward_metric_model {
    ($ptr:ident) => {
        impl<T: MetricModel + ?Sized> MetricModel for $ptr<T> {
            fn dim(&self) -> usize {
                (**self).dim()
            }
            fn log_density(&self, q: &[f64]) -> f64 {
                (**self).log_density(q)
            }
            fn grad_log_density(&self, q: &[f64]) -> Vec<f64> {
                (**self).grad_log_density(q)
            }
            fn metric(&self, q: &[f64]) -> DenseMatrix {
                (**self).metric(q)
            }
            fn metric_partials(&self, q: &[f64]) -> Vec<DenseMatrix> {
                (**self).metric_partials(q)
            }
            fn in_domain(&self, q: &[f64]) -> bool {
                (**self).in_domain(q)
            }
        }
    };
}

forward_metric_model!(Box);
forward_metric_model!(Arc);

/// Christoffel symbols `Γ^k_{ij}` at one point, stored densely as `[k][i][j]`.
#[derive(Debug, Clone)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    /// Builds `Γ^k_{ij} = ½ Σ_l G⁻¹_{kl} (g_{i,lj} + g_{j,li} - g_{l,ij})`.
    ///
    /// Lower-index symmetry is exact regardless of what the partials look like.
    pub fn from_partials(metric_lu: &PluFactors, partials: &[DenseMatrix]) -> Result<Self> {
        Self::from_inverse(&metric_lu.inverse()?, partials)
    }

    /// As [`Christoffel::from_partials`] with `G⁻¹` already formed.
    pub fn from_inverse(metric_inverse: &DenseMatrix, partials: &[DenseMatrix]) -> Result<Self> {
        let m = metric_inverse.dim();
        if partials.len() != m {
            return Err(GeomcError::DimensionMismatch {
                expected: m,
                found: partials.len(),
            });
        }
        // a[l][i][j] = ½ (b[l][i][j] + b[l][j][i] - g_{l,ij}) with b[l][i][j] = g_{i,lj},
        // then Γ^k = Σ_l G⁻¹_{kl} a[l]. g_l is symmetrized so that a[l] is
        // exactly symmetric.
        let mm = m * m;
        let mut a = vec![0.0; m * mm];
        let mut b = vec![0.0; mm];
        for l in 0..m {
            for (i, g) in partials.iter().enumerate() {
                b[i * m..(i + 1) * m].copy_from_slice(g.row(l));
            }
            let gl = partials[l].as_slice();
            let out = &mut a[l * mm..(l + 1) * mm];
            for i in 0..m {
                for j in 0..m {
                    out[i * m + j] = 0.5 * (b[i * m + j] + b[j * m + i]) - 0.25 * (gl[i * m + j] + gl[j * m + i]);
                }
            }
        }
        let mut data = vec![0.0; m * mm];
        for k in 0..m {
            let out = &mut data[k * mm..(k + 1) * mm];
            for (l, &w) in metric_inverse.row(k).iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                for (o, x) in out.iter_mut().zip(&a[l * mm..(l + 1) * mm]) {
                    *o += w * x;
                }
            }
        }
        Ok(Self { dim: m, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Γ^k_{ij}`.
    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.dim + i) * self.dim + j]
    }

    /// `Ω_{ij}(ε, q, v) = (ε/2) Σ_k Γ^i_{kj} v^(k)`.
    pub fn omega(&self, eps: f64, v: &[f64]) -> DenseMatrix {
        let m = self.dim;
        let mut out = DenseMatrix::zeros(m);
        let half = 0.5 * eps;
        for i in 0..m {
            for (k, &vk) in v.iter().enumerate() {
                if vk == 0.0 {
                    continue;
                }
                let base = (i * m + k) * m;
                for j in 0..m {
                    out[(i, j)] += half * self.data[base + j] * vk;
                }
            }
        }
        out
    }

    /// `Σ_ij Γ^k_{ij} v^i v^j`, the geodesic acceleration term.
    pub fn contract(&self, v: &[f64]) -> Vec<f64> {
        let m = self.dim;
        (0..m)
            .map(|k| {
                (0..m)
                    .map(|i| v[i] * dot(&self.data[(k * m + i) * m..(k * m + i + 1) * m], v))
                    .sum()
            })
            .collect()
    }
}

/// Metric evaluated at one point with both factorizations.
#[derive(Debug, Clone)]
pub struct MetricFactors {
    pub metric: DenseMatrix,
    pub lu: PluFactors,
    pub cholesky: CholeskyFactors,
    /// `log det G(q)`, from the PLU factors.
    pub log_det: f64,
}

impl MetricFactors {
    pub fn new(metric: DenseMatrix) -> Result<Self> {
        // Cholesky doubles as the positive-definiteness check.
        let cholesky = metric.cholesky()?;
        let lu = metric.plu()?;
        let log_det = lu.log_abs_det()?.log_abs;
        Ok(Self {
            metric,
            lu,
            cholesky,
            log_det,
        })
    }
}

/// Everything the integrators need at one position, computed on first use.
///
/// Getters take the model explicitly; callers must pass the model the point
/// was created with.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    q: Vec<f64>,
    factors: OnceCell<MetricFactors>,
    log_density: OnceCell<f64>,
    partials: OnceCell<Vec<DenseMatrix>>,
    grad_potential: OnceCell<Vec<f64>>,
    christoffel: OnceCell<Christoffel>,
    metric_inverse: OnceCell<DenseMatrix>,
}

fn cached<'a, T>(cell: &'a OnceCell<T>, init: impl FnOnce() -> Result<T>) -> Result<&'a T> {
    if let Some(v) = cell.get() {
        return Ok(v);
    }
    let value = init()?;
    Ok(cell.get_or_init(|| value))
}

impl PointGeometry {
    pub fn new<M: MetricModel + ?Sized>(model: &M, q: Vec<f64>) -> Result<Self> {
        if q.len() != model.dim() {
            return Err(GeomcError::DimensionMismatch {
                expected: model.dim(),
                found: q.len(),
            });
        }
        if q.iter().any(|x| !x.is_finite()) {
            return Err(GeomcError::NonFinite { what: "position" });
        }
        if !model.in_domain(&q) {
            return Err(GeomcError::OutOfDomain { q });
        }
        Ok(Self {
            q,
            factors: OnceCell::new(),
            log_density: OnceCell::new(),
            partials: OnceCell::new(),
            grad_potential: OnceCell::new(),
            christoffel: OnceCell::new(),
            metric_inverse: OnceCell::new(),
        })
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn factors<M: MetricModel + ?Sized>(&self, model: &M) -> Result<&MetricFactors> {
        cached(&self.factors, || MetricFactors::new(model.metric(&self.q)))
    }

    pub fn metric<M: MetricModel + ?Sized>(&self, model: &M) -> Result<&DenseMatrix> {
        Ok(&self.factors(model)?.metric)
    }

    pub fn log_det_metric<M: MetricModel + ?Sized>(&self, model: &M) -> Result<f64> {
        Ok(self.factors(model)?.log_det)
    }

    pub fn log_density<M: MetricModel + ?Sized>(&self, model: &M) -> Result<f64> {
        cached(&self.log_density, || {
            let l = model.log_density(&self.q);
            if l.is_finite() {
                Ok(l)
            } else {
                Err(GeomcError::NonFinite { what: "log-density" })
            }
        })
        .copied()
    }

    /// `U(q) = -L(q) + ½ log det G(q)`.
    pub fn potential<M: MetricModel + ?Sized>(&self, model: &M) -> Result<f64> {
        Ok(-self.log_density(model)? + 0.5 * self.log_det_metric(model)?)
    }

    pub fn partials<M: MetricModel + ?Sized>(&self, model: &M) -> Result<&[DenseMatrix]> {
        cached(&self.partials, || {
            let g = model.metric_partials(&self.q);
            if g.len() != self.dim() {
                return Err(GeomcError::DimensionMismatch {
                    expected: self.dim(),
                    found: g.len(),
                });
            }
            if g.iter().any(|m| !m.is_finite()) {
                return Err(GeomcError::NonFinite { what: "metric partials" });
            }
            Ok(g)
        })
        .map(Vec::as_slice)
    }

    /// `G(q)⁻¹`, formed column by column from the PLU factors.
    pub fn metric_inverse<M: MetricModel + ?Sized>(&self, model: &M) -> Result<&DenseMatrix> {
        cached(&self.metric_inverse, || self.factors(model)?.lu.inverse())
    }

    /// `∇U = -∇L + ½ [tr(G⁻¹ g_k)]_k`.
    pub fn grad_potential<M: MetricModel + ?Sized>(&self, model: &M) -> Result<&[f64]> {
        cached(&self.grad_potential, || {
            let inv = self.metric_inverse(model)?;
            let partials = self.partials(model)?;
            let grad_l = model.grad_log_density(&self.q);
            if grad_l.len() != self.dim() {
                return Err(GeomcError::DimensionMismatch {
                    expected: self.dim(),
                    found: grad_l.len(),
                });
            }
            // tr(G⁻¹ g_k) = Σ_ij (G⁻¹)ᵀ_ij (g_k)_ij.
            let inv_t = inv.transpose();
            let out: Vec<f64> = partials
                .iter()
                .zip(&grad_l)
                .map(|(g, gl)| -gl + 0.5 * dot(inv_t.as_slice(), g.as_slice()))
                .collect();
            if out.iter().any(|x| !x.is_finite()) {
                return Err(GeomcError::NonFinite { what: "potential gradient" });
            }
            Ok(out)
        })
        .map(Vec::as_slice)
    }

    pub fn christoffel<M: MetricModel + ?Sized>(&self, model: &M) -> Result<&Christoffel> {
        cached(&self.christoffel, || {
            Christoffel::from_inverse(self.metric_inverse(model)?, self.partials(model)?)
        })
    }

    pub fn omega<M: MetricModel + ?Sized>(&self, model: &M, eps: f64, v: &[f64]) -> Result<DenseMatrix> {
        Ok(self.christoffel(model)?.omega(eps, v))
    }

    /// `G(q)⁻¹ b` via the PLU factors.
    pub fn solve_metric<M: MetricModel + ?Sized>(&self, model: &M, b: &[f64]) -> Result<Vec<f64>> {
        self.factors(model)?.lu.solve(b)
    }

    /// `p = G(q) v`.
    pub fn legendre<M: MetricModel + ?Sized>(&self, model: &M, v: &[f64]) -> Result<Vec<f64>> {
        Ok(self.metric(model)?.mul_vec(v))
    }

    /// `v = G(q)⁻¹ p`.
    pub fn inverse_legendre<M: MetricModel + ?Sized>(&self, model: &M, p: &[f64]) -> Result<Vec<f64>> {
        self.solve_metric(model, p)
    }

    /// `½ pᵀ G⁻¹ p`.
    pub fn kinetic_energy<M: MetricModel + ?Sized>(&self, model: &M, p: &[f64]) -> Result<f64> {
        Ok(0.5 * dot(p, &self.solve_metric(model, p)?))
    }
}

/// A phase-space point in momentum and/or velocity form.
///
/// Lagrangian integrators carry velocity between steps; Hamiltonian ones carry
/// momentum. Whichever is missing is derived through the metric on request.
#[derive(Debug, Clone)]
pub struct PhasePoint {
    geometry: PointGeometry,
    momentum: Option<Vec<f64>>,
    velocity: Option<Vec<f64>>,
}

impl PhasePoint {
    pub fn from_momentum<M: MetricModel + ?Sized>(model: &M, q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        let geometry = PointGeometry::new(model, q)?;
        Self::with_momentum(geometry, p)
    }

    pub fn from_velocity<M: MetricModel + ?Sized>(model: &M, q: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let geometry = PointGeometry::new(model, q)?;
        Self::with_velocity(geometry, v)
    }

    pub fn with_momentum(geometry: PointGeometry, p: Vec<f64>) -> Result<Self> {
        check_vector(&geometry, &p, "momentum")?;
        Ok(Self {
            geometry,
            momentum: Some(p),
            velocity: None,
        })
    }

    pub fn with_velocity(geometry: PointGeometry, v: Vec<f64>) -> Result<Self> {
        check_vector(&geometry, &v, "velocity")?;
        Ok(Self {
            geometry,
            momentum: None,
            velocity: Some(v),
        })
    }

    pub fn q(&self) -> &[f64] {
        self.geometry.q()
    }

    pub fn geometry(&self) -> &PointGeometry {
        &self.geometry
    }

    pub fn into_geometry(self) -> PointGeometry {
        self.geometry
    }

    pub fn stored_momentum(&self) -> Option<&[f64]> {
        self.momentum.as_deref()
    }

    pub fn stored_velocity(&self) -> Option<&[f64]> {
        self.velocity.as_deref()
    }

    pub fn momentum<M: MetricModel + ?Sized>(&self, model: &M) -> Result<Vec<f64>> {
        match (&self.momentum, &self.velocity) {
            (Some(p), _) => Ok(p.clone()),
            (None, Some(v)) => self.geometry.legendre(model, v),
            (None, None) => unreachable!("phase point without momentum or velocity"),
        }
    }

    pub fn velocity<M: MetricModel + ?Sized>(&self, model: &M) -> Result<Vec<f64>> {
        match (&self.velocity, &self.momentum) {
            (Some(v), _) => Ok(v.clone()),
            (None, Some(p)) => self.geometry.inverse_legendre(model, p),
            (None, None) => unreachable!("phase point without momentum or velocity"),
        }
    }

    /// Fills in the momentum if only the velocity is stored.
    pub fn ensure_momentum<M: MetricModel + ?Sized>(mut self, model: &M) -> Result<Self> {
        if self.momentum.is_none() {
            self.momentum = Some(self.momentum(model)?);
        }
        Ok(self)
    }

    /// Fills in the velocity if only the momentum is stored.
    pub fn ensure_velocity<M: MetricModel + ?Sized>(mut self, model: &M) -> Result<Self> {
        if self.velocity.is_none() {
            self.velocity = Some(self.velocity(model)?);
        }
        Ok(self)
    }

    /// Momentum flip `F(q, p) = (q, -p)`; the velocity flips with it.
    pub fn flipped(mut self) -> Self {
        for x in self.momentum.iter_mut().chain(self.velocity.iter_mut()).flatten() {
            *x = -*x;
        }
        self
    }

    pub fn kinetic_energy<M: MetricModel + ?Sized>(&self, model: &M) -> Result<f64> {
        match (&self.momentum, &self.velocity) {
            (Some(p), _) => self.geometry.kinetic_energy(model, p),
            (None, Some(v)) => Ok(0.5 * self.geometry.metric(model)?.bilinear(v, v)),
            (None, None) => unreachable!("phase point without momentum or velocity"),
        }
    }

    /// `H(q, p) = U(q) + K(q, p)`.
    pub fn hamiltonian<M: MetricModel + ?Sized>(&self, model: &M) -> Result<f64> {
        Ok(self.geometry.potential(model)? + self.kinetic_energy(model)?)
    }
}

fn check_vector(geometry: &PointGeometry, x: &[f64], what: &'static str) -> Result<()> {
    if x.len() != geometry.dim() {
        return Err(GeomcError::DimensionMismatch {
            expected: geometry.dim(),
            found: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(GeomcError::NonFinite { what });
    }
    Ok(())
}

/// A model viewed as a distribution over phase space, `π(q, p) ∝ exp(-H)`.
#[derive(Debug, Clone)]
pub struct RiemannianTarget<M> {
    model: M,
}

impl<M: MetricModel> RiemannianTarget<M> {
    pub fn new(model: M) -> Self {
        Self { model }
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn potential(&self, q: &[f64]) -> Result<f64> {
        potential(&self.model, q)
    }

    pub fn hamiltonian(&self, q: &[f64], p: &[f64]) -> Result<f64> {
        hamiltonian(&self.model, q, p)
    }
}

pub fn potential<M: MetricModel + ?Sized>(model: &M, q: &[f64]) -> Result<f64> {
    PointGeometry::new(model, q.to_vec())?.potential(model)
}

pub fn christoffel<M: MetricModel + ?Sized>(model: &M, q: &[f64]) -> Result<Christoffel> {
    Ok(PointGeometry::new(model, q.to_vec())?.christoffel(model)?.clone())
}

pub fn omega<M: MetricModel + ?Sized>(eps: f64, model: &M, q: &[f64], v: &[f64]) -> Result<DenseMatrix> {
    PointGeometry::new(model, q.to_vec())?.omega(model, eps, v)
}

pub fn legendre<M: MetricModel + ?Sized>(model: &M, q: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    PointGeometry::new(model, q.to_vec())?.legendre(model, v)
}

pub fn inverse_legendre<M: MetricModel + ?Sized>(model: &M, q: &[f64], p: &[f64]) -> Result<Vec<f64>> {
    PointGeometry::new(model, q.to_vec())?.inverse_legendre(model, p)
}

/// `H(q, p) = U(q) + ½ pᵀ G⁻¹(q) p`.
pub fn hamiltonian<M: MetricModel + ?Sized>(model: &M, q: &[f64], p: &[f64]) -> Result<f64> {
    PhasePoint::from_momentum(model, q.to_vec(), p.to_vec())?.hamiltonian(model)
}

/// Central-difference partials of the metric. Test and verification use only.
pub fn finite_difference_partials<M: MetricModel + ?Sized>(model: &M, q: &[f64], h: f64) -> Vec<DenseMatrix> {
    (0..q.len())
        .map(|k| {
            let mut plus = q.to_vec();
            let mut minus = q.to_vec();
            plus[k] += h;
            minus[k] -= h;
            let (gp, gm) = (model.metric(&plus), model.metric(&minus));
            DenseMatrix::from_fn(q.len(), |i, j| (gp[(i, j)] - gm[(i, j)]) / (2.0 * h))
        })
        .collect()
}

/// Central-difference gradient of the log-density. Test and verification use only.
pub fn finite_difference_gradient<M: MetricModel + ?Sized>(model: &M, q: &[f64], h: f64) -> Vec<f64> {
    (0..q.len())
        .map(|k| {
            let mut plus = q.to_vec();
            let mut minus = q.to_vec();
            plus[k] += h;
            minus[k] -= h;
            (model.log_density(&plus) - model.log_density(&minus)) / (2.0 * h)
        })
        .collect()
}
