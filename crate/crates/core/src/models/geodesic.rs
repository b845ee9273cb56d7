use crate::geometry::MetricModel;
use crate::linalg::DenseMatrix;

/// Geodesic motion on the half-line `q > 0` with metric `G(q) = 1/q²`.
///
/// The log-density is chosen as `L(q) = -ln q`, which makes the potential
/// `U = -L + ½ ln G` vanish identically, so `H(q, p) = q² p² / 2` and the
/// dynamics are pure geodesic flow with an exact solution.
#[derive(Debug, Clone, Copy, Default)]
pub struct GeodesicModel;

impl GeodesicModel {
    /// Exact `(q_t, v_t)` starting from `(q0, p0)` in momentum form.
    pub fn exact_flow(q0: f64, p0: f64, t: f64) -> (f64, f64) {
        let growth = (q0 * p0 * t).exp();
        (q0 * growth, q0 * q0 * p0 * growth)
    }
}

impl MetricModel for GeodesicModel {
    fn dim(&self) -> usize {
        1
    }

    fn log_density(&self, q: &[f64]) -> f64 {
        -q[0].ln()
    }

    fn grad_log_density(&self, q: &[f64]) -> Vec<f64> {
        vec![-1.0 / q[0]]
    }

    fn metric(&self, q: &[f64]) -> DenseMatrix {
        DenseMatrix::from_diagonal(&[1.0 / (q[0] * q[0])])
    }

    fn metric_partials(&self, q: &[f64]) -> Vec<DenseMatrix> {
        vec![DenseMatrix::from_diagonal(&[-2.0 / (q[0] * q[0] * q[0])])]
    }

    fn in_domain(&self, q: &[f64]) -> bool {
        q[0] > 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_flow_solves_the_geodesic_equation() {
        // a = v²/q along the flow, checked by central differences in t.
        let (q0, p0, t, h) = (1.3, 0.7, 0.4, 1e-4);
        let (q, v) = GeodesicModel::exact_flow(q0, p0, t);
        let (qp, vp) = GeodesicModel::exact_flow(q0, p0, t + h);
        let (qm, vm) = GeodesicModel::exact_flow(q0, p0, t - h);
        assert!(((qp - qm) / (2.0 * h) - v).abs() < 1e-7);
        assert!(((vp - vm) / (2.0 * h) - v * v / q).abs() < 1e-7);
        assert_eq!(GeodesicModel::exact_flow(1.0, 1.0, 0.5), (0.5f64.exp(), 0.5f64.exp()));
    }
}
