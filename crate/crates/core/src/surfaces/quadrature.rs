//! Tensor-product quadrature over box charts.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use super::ChartAxis;
use crate::error::{GeometryError, Result};

/// Grid rule requested for a chart.
///
/// `Auto` uses the periodic trapezoid rule on periodic axes and
/// Gauss-Legendre elsewhere. `PeriodicTrapezoid` uses equispaced nodes on
/// every axis (midpoints on bounded axes, so poles are never sampled).
/// `GaussLegendre` uses Gauss-Legendre on every axis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    #[default]
    Auto,
    PeriodicTrapezoid,
    GaussLegendre,
}

/// Nodes and weights along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisNodes {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl AxisNodes {
    /// lo + iL/N with weights L/N.
    pub fn trapezoid(axis: &ChartAxis, count: usize) -> Self {
        let step = axis.length() / count as f64;
        Self {
            nodes: (0..count).map(|i| axis.lo + i as f64 * step).collect(),
            weights: vec![step; count],
        }
    }

    pub fn midpoint(axis: &ChartAxis, count: usize) -> Self {
        let step = axis.length() / count as f64;
        Self {
            nodes: (0..count).map(|i| axis.lo + (i as f64 + 0.5) * step).collect(),
            weights: vec![step; count],
        }
    }

    /// Gauss-Legendre nodes mapped to [lo, hi], ascending.
    pub fn gauss_legendre(axis: &ChartAxis, count: NonZeroUsize) -> Self {
        let rule = GaussLegendre::new(count);
        let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let half = 0.5 * axis.length();
        let mid = 0.5 * (axis.lo + axis.hi);
        Self {
            nodes: pairs.iter().map(|(x, _)| mid + half * x).collect(),
            weights: pairs.iter().map(|(_, w)| half * w).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Tensor-product grid; flat indices are row-major with axis 0 slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    rule: QuadratureRule,
    axes: Vec<AxisNodes>,
}

impl QuadratureGrid {
    /// `count` nodes per axis.
    pub fn new(axes: &[ChartAxis], count: usize, rule: QuadratureRule) -> Result<Self> {
        Self::with_counts(axes, &vec![count; axes.len()], rule)
    }

    pub fn with_counts(axes: &[ChartAxis], counts: &[usize], rule: QuadratureRule) -> Result<Self> {
        if counts.len() != axes.len() {
            return Err(GeometryError::DimensionMismatch { expected: axes.len(), got: counts.len() });
        }
        let axes = axes
            .iter()
            .zip(counts)
            .map(|(axis, &count)| {
                let nz = NonZeroUsize::new(count)
                    .ok_or_else(|| GeometryError::Domain("quadrature needs at least one node per axis".into()))?;
                if !(axis.length() > 0.0 && axis.length().is_finite()) {
                    return Err(GeometryError::Domain(format!("empty chart axis [{}, {}]", axis.lo, axis.hi)));
                }
                Ok(match (rule, axis.periodic) {
                    (QuadratureRule::Auto, true) => AxisNodes::trapezoid(axis, count),
                    (QuadratureRule::Auto, false) | (QuadratureRule::GaussLegendre, _) => {
                        AxisNodes::gauss_legendre(axis, nz)
                    }
                    (QuadratureRule::PeriodicTrapezoid, true) => AxisNodes::trapezoid(axis, count),
                    (QuadratureRule::PeriodicTrapezoid, false) => AxisNodes::midpoint(axis, count),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rule, axes })
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    pub fn axes(&self) -> &[AxisNodes] {
        &self.axes
    }

    pub fn counts(&self) -> Vec<usize> {
        self.axes.iter().map(AxisNodes::len).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(AxisNodes::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes.len()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            idx[k] = flat % axis.len();
            flat /= axis.len();
        }
        idx
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.nodes[i])
            .collect()
    }

    pub fn weight(&self, flat: usize) -> f64 {
        self.multi_index(flat)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.weights[i])
            .product()
    }

    pub fn nodes(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// Sum of all weights (the chart volume).
    pub fn total_weight(&self) -> f64 {
        self.axes.iter().map(|a| a.weights.iter().sum::<f64>()).product()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn weights_sum_to_volume() {
        let axes = [ChartAxis::bounded(0.0, PI), ChartAxis::periodic(0.0, 2.0 * PI)];
        for rule in [QuadratureRule::Auto, QuadratureRule::PeriodicTrapezoid, QuadratureRule::GaussLegendre] {
            let g = QuadratureGrid::new(&axes, 17, rule).unwrap();
            assert_eq!(g.len(), 289);
            assert_abs_diff_eq!(g.total_weight(), 2.0 * PI * PI, epsilon = 1e-12);
            let sum: f64 = (0..g.len()).map(|i| g.weight(i)).sum();
            assert_abs_diff_eq!(sum, 2.0 * PI * PI, epsilon = 1e-12);
            assert!((0..g.len()).all(|i| g.weight(i) > 0.0));
        }
    }

    #[test]
    fn row_major_ordering() {
        let axes = [ChartAxis::periodic(0.0, 3.0), ChartAxis::periodic(0.0, 2.0)];
        let g = QuadratureGrid::with_counts(&axes, &[3, 2], QuadratureRule::Auto).unwrap();
        assert_eq!(g.multi_index(0), vec![0, 0]);
        assert_eq!(g.multi_index(1), vec![0, 1]);
        assert_eq!(g.multi_index(2), vec![1, 0]);
        assert_eq!(g.node(5), vec![2.0, 1.0]);
    }

    #[test]
    fn legendre_integrates_polynomials() {
        let axis = ChartAxis::bounded(-1.0, 2.0);
        let a = AxisNodes::gauss_legendre(&axis, NonZeroUsize::new(4).unwrap());
        let integral: f64 = a.nodes.iter().zip(&a.weights).map(|(x, w)| w * x.powi(7)).sum();
        assert_abs_diff_eq!(integral, (256.0 - 1.0) / 8.0, epsilon = 1e-12);
        assert!(a.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(a.nodes.iter().all(|&x| x > -1.0 && x < 2.0));
    }

    #[test]
    fn trapezoid_is_spectral_on_periodic_functions() {
        let axis = ChartAxis::periodic(0.0, 2.0 * PI);
        let a = AxisNodes::trapezoid(&axis, 16);
        let integral: f64 = a.nodes.iter().zip(&a.weights).map(|(x, w)| w * x.cos().powi(4)).sum();
        assert_abs_diff_eq!(integral, 3.0 * PI / 4.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_nodes_rejected() {
        let axes = [ChartAxis::bounded(0.0, 1.0)];
        assert!(QuadratureGrid::new(&axes, 0, QuadratureRule::Auto).is_err());
    }
}
