use crate::geometry::MetricModel;
use crate::linalg::DenseMatrix;

/// Wraps a model and deliberately corrupts its metric partials.
///
/// Selected `g_k` are multiplied by `1 + δ`; the metric, density and gradient
/// are untouched, so the target is unchanged but `g_k ≠ ∂G/∂q^(k)`. Scaling
/// keeps each `g_k` symmetric.
#[derive(Debug, Clone)]
pub struct MisspecifiedModel<M> {
    base: M,
    delta: f64,
    /// Coordinates whose partials are scaled; `None` scales all of them.
    selected: Option<Vec<usize>>,
}

impl<M: MetricModel> MisspecifiedModel<M> {
    pub const DEFAULT_DELTA: f64 = 0.3;

    pub fn new(base: M, delta: f64) -> Self {
        Self {
            base,
            delta,
            selected: None,
        }
    }

    pub fn with_selected(base: M, delta: f64, selected: Vec<usize>) -> Self {
        Self {
            base,
            delta,
            selected: Some(selected),
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn base(&self) -> &M {
        &self.base
    }

    fn is_selected(&self, k: usize) -> bool {
        self.selected.as_ref().map_or(true, |s| s.contains(&k))
    }
}

impl<M: MetricModel> MetricModel for MisspecifiedModel<M> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn log_density(&self, q: &[f64]) -> f64 {
        self.base.log_density(q)
    }

    fn grad_log_density(&self, q: &[f64]) -> Vec<f64> {
        self.base.grad_log_density(q)
    }

    fn metric(&self, q: &[f64]) -> DenseMatrix {
        self.base.metric(q)
    }

    fn metric_partials(&self, q: &[f64]) -> Vec<DenseMatrix> {
        self.base
            .metric_partials(q)
            .into_iter()
            .enumerate()
            .map(|(k, g)| if self.is_selected(k) { g.scaled(1.0 + self.delta) } else { g })
            .collect()
    }

    fn in_domain(&self, q: &[f64]) -> bool {
        self.base.in_domain(q)
    }
}
