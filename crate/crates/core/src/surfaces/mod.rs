//! Parametric immersed hypersurfaces f : U ⊂ ℝ^n → S^{n+1}.

mod chart;
mod families;
mod quadrature;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

pub use families::{make_clifford, make_geodesic_sphere, make_perturbed_sphere};
pub use quadrature::{AxisNodes, QuadratureGrid, QuadratureRule};

use crate::error::{GeometryError, Result};
use crate::sphere::{SpherePoint, TangentVector};

pub type PointFn = Arc<dyn Fn(&[f64]) -> DVector<f64> + Send + Sync>;
pub type FirstDerivFn = Arc<dyn Fn(&[f64]) -> Vec<DVector<f64>> + Send + Sync>;
/// Second partials indexed `[i][j]`.
pub type SecondDerivFn = Arc<dyn Fn(&[f64]) -> Vec<Vec<DVector<f64>>> + Send + Sync>;

/// Smallest singular value of the tangent map below which a point is
/// considered degenerate.
pub const IMMERSION_TOL: f64 = 1e-8;

/// One coordinate axis of a box chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartAxis {
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
}

impl ChartAxis {
    pub fn periodic(lo: f64, hi: f64) -> Self {
        Self { lo, hi, periodic: true }
    }

    pub fn bounded(lo: f64, hi: f64) -> Self {
        Self { lo, hi, periodic: false }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Declared topology of a closed hypersurface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Sphere,
    Torus,
    Other { euler: i64 },
    Unknown,
}

/// Finite-difference steps for first and second derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdSteps {
    pub first: f64,
    pub second: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        Self { first: 1e-5, second: 1e-4 }
    }
}

/// A smooth map of ℝ^{n+2} defined near the sphere, together with its differential.
pub trait AmbientMap: Send + Sync {
    fn map_point(&self, x: &DVector<f64>) -> DVector<f64>;
    fn differential(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64>;
}

/// Tangent vectors ∂_i f at a chart point together with g_ij = <∂_i f, ∂_j f>.
#[derive(Debug, Clone)]
pub struct TangentFrame {
    pub partials: Vec<DVector<f64>>,
    pub metric: DMatrix<f64>,
    pub sigma_min: f64,
}

impl TangentFrame {
    /// The n+2 × n matrix with columns ∂_i f.
    pub fn jacobian(&self) -> DMatrix<f64> {
        DMatrix::from_columns(&self.partials)
    }

    /// Coefficients c with Σ c_i ∂_i f = orthogonal projection of `w` on span{∂_i f}.
    pub fn coefficients(&self, w: &DVector<f64>) -> DVector<f64> {
        let rhs = DVector::from_iterator(self.partials.len(), self.partials.iter().map(|d| d.dot(w)));
        self.metric
            .clone()
            .cholesky()
            .map(|c| c.solve(&rhs))
            .unwrap_or_else(|| self.metric.clone().lu().solve(&rhs).unwrap_or(rhs))
    }
}

/// A chart-based immersion into the unit sphere.
#[derive(Clone)]
pub struct ParametricImmersion {
    name: String,
    ambient_dim: usize,
    axes: Vec<ChartAxis>,
    eval: PointFn,
    d1: Option<FirstDerivFn>,
    d2: Option<SecondDerivFn>,
    orientation_sign: f64,
    topology: Topology,
    fd: FdSteps,
    center: Option<SpherePoint>,
}

impl fmt::Debug for ParametricImmersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametricImmersion")
            .field("name", &self.name)
            .field("n", &self.n())
            .field("ambient_dim", &self.ambient_dim)
            .field("axes", &self.axes)
            .field("analytic_d1", &self.d1.is_some())
            .field("analytic_d2", &self.d2.is_some())
            .field("orientation_sign", &self.orientation_sign)
            .field("topology", &self.topology)
            .finish()
    }
}

impl ParametricImmersion {
    pub fn new(name: impl Into<String>, ambient_dim: usize, axes: Vec<ChartAxis>, eval: PointFn) -> Self {
        assert_eq!(axes.len() + 2, ambient_dim, "a hypersurface chart has ambient_dim - 2 axes");
        Self {
            name: name.into(),
            ambient_dim,
            axes,
            eval,
            d1: None,
            d2: None,
            orientation_sign: 1.0,
            topology: Topology::Unknown,
            fd: FdSteps::default(),
            center: None,
        }
    }

    pub fn with_first_derivatives(mut self, d1: FirstDerivFn) -> Self {
        self.d1 = Some(d1);
        self
    }

    pub fn with_second_derivatives(mut self, d2: SecondDerivFn) -> Self {
        self.d2 = Some(d2);
        self
    }

    /// Drops analytic derivatives so everything goes through finite differences.
    pub fn without_analytic_derivatives(mut self) -> Self {
        self.d1 = None;
        self.d2 = None;
        self
    }

    pub fn with_topology(mut self, topology: Topology) -> Self {
        self.topology = topology;
        self
    }

    /// Sets the orientation sign (only its sign is kept).
    pub fn with_orientation(mut self, sign: f64) -> Self {
        self.orientation_sign = if sign < 0.0 { -1.0 } else { 1.0 };
        self
    }

    /// Same immersion with the opposite unit normal.
    pub fn flipped(self) -> Self {
        let sign = -self.orientation_sign;
        self.with_orientation(sign)
    }

    pub fn with_fd_steps(mut self, fd: FdSteps) -> Self {
        self.fd = fd;
        self
    }

    pub fn with_center(mut self, center: Option<SpherePoint>) -> Self {
        self.center = center;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Intrinsic dimension n.
    pub fn n(&self) -> usize {
        self.axes.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn axes(&self) -> &[ChartAxis] {
        &self.axes
    }

    pub fn orientation_sign(&self) -> f64 {
        self.orientation_sign
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn fd_steps(&self) -> FdSteps {
        self.fd
    }

    /// Natural centre of the family, if it has one (geodesic and perturbed spheres).
    pub fn center(&self) -> Option<&SpherePoint> {
        self.center.as_ref()
    }

    pub fn has_analytic_first(&self) -> bool {
        self.d1.is_some()
    }

    pub fn has_analytic_second(&self) -> bool {
        self.d2.is_some()
    }

    /// Raw ambient value f(u).
    pub fn eval(&self, u: &[f64]) -> DVector<f64> {
        (self.eval)(u)
    }

    /// f(u) as a sphere point; rounding drift is normalised away.
    pub fn point(&self, u: &[f64]) -> Result<SpherePoint> {
        let v = self.eval(u);
        let dev = (v.norm() - 1.0).abs();
        if dev > 1e-10 {
            return Err(GeometryError::NotUnit(dev));
        }
        SpherePoint::normalize(v)
    }

    fn shifted(u: &[f64], i: usize, h: f64) -> Vec<f64> {
        let mut out = u.to_vec();
        out[i] += h;
        out
    }

    /// ∂_i f(u), analytic when available, otherwise central differences.
    pub fn partials(&self, u: &[f64]) -> Vec<DVector<f64>> {
        if let Some(d1) = &self.d1 {
            return d1(u);
        }
        let h = self.fd.first;
        (0..self.n())
            .map(|i| (self.eval(&Self::shifted(u, i, h)) - self.eval(&Self::shifted(u, i, -h))) / (2.0 * h))
            .collect()
    }

    /// ∂_i ∂_j f(u). Analytic if supplied; otherwise central differences of
    /// the analytic first derivatives, or of f itself.
    pub fn second_partials(&self, u: &[f64]) -> Vec<Vec<DVector<f64>>> {
        if let Some(d2) = &self.d2 {
            return d2(u);
        }
        let n = self.n();
        let h = self.fd.second;
        if let Some(d1) = &self.d1 {
            let diffs: Vec<Vec<DVector<f64>>> = (0..n)
                .map(|j| {
                    let up = d1(&Self::shifted(u, j, h));
                    let dn = d1(&Self::shifted(u, j, -h));
                    up.iter().zip(dn.iter()).map(|(a, b)| (a - b) / (2.0 * h)).collect()
                })
                .collect();
            // diffs[j][i] = ∂_j ∂_i f; symmetrise
            return (0..n)
                .map(|i| (0..n).map(|j| (&diffs[j][i] + &diffs[i][j]) * 0.5).collect())
                .collect();
        }
        let f0 = self.eval(u);
        let mut out = vec![vec![DVector::zeros(self.ambient_dim); n]; n];
        for i in 0..n {
            let fp = self.eval(&Self::shifted(u, i, h));
            let fm = self.eval(&Self::shifted(u, i, -h));
            out[i][i] = (fp - &f0 * 2.0 + fm) / (h * h);
            for j in (i + 1)..n {
                let mut pp = u.to_vec();
                pp[i] += h;
                pp[j] += h;
                let mut pm = u.to_vec();
                pm[i] += h;
                pm[j] -= h;
                let mut mp = u.to_vec();
                mp[i] -= h;
                mp[j] += h;
                let mut mm = u.to_vec();
                mm[i] -= h;
                mm[j] -= h;
                let d = (self.eval(&pp) - self.eval(&pm) - self.eval(&mp) + self.eval(&mm)) / (4.0 * h * h);
                out[j][i] = d.clone();
                out[i][j] = d;
            }
        }
        out
    }

    /// Tangent vectors and metric, rejecting degenerate points.
    pub fn tangent_frame(&self, u: &[f64]) -> Result<TangentFrame> {
        let partials = self.partials(u);
        let n = partials.len();
        let metric = DMatrix::from_fn(n, n, |i, j| partials[i].dot(&partials[j]));
        let eig = SymmetricEigen::new(metric.clone());
        let sigma_min = eig.eigenvalues.min().max(0.0).sqrt();
        if !(sigma_min >= IMMERSION_TOL) {
            return Err(GeometryError::ImmersionDegenerate { u: u.to_vec(), sigma_min });
        }
        Ok(TangentFrame { partials, metric, sigma_min })
    }

    /// Unit normal η(u), tangent to the sphere and orthogonal to every ∂_i f,
    /// with det[∂_1 f, …, ∂_n f, η, f] · orientation_sign > 0.
    pub fn unit_normal(&self, u: &[f64]) -> Result<TangentVector> {
        let frame = self.tangent_frame(u)?;
        let p = self.point(u)?;
        let normal = normal_from_frame(&frame.partials, p.coords(), self.orientation_sign)
            .ok_or_else(|| GeometryError::ImmersionDegenerate { u: u.to_vec(), sigma_min: 0.0 })?;
        Ok(TangentVector::new_unchecked(p, normal))
    }

    /// C ∘ f for an ambient map C preserving the sphere. First derivatives
    /// are pushed forward through the differential; second derivatives fall
    /// back to differences of those.
    pub fn compose(&self, name: impl Into<String>, map: Arc<dyn AmbientMap>) -> ParametricImmersion {
        let inner = self.clone();
        let eval_map = map.clone();
        let eval: PointFn = Arc::new(move |u: &[f64]| eval_map.map_point(&inner.eval(u)));
        let inner = self.clone();
        let d1: FirstDerivFn = Arc::new(move |u: &[f64]| {
            let x = inner.eval(u);
            inner.partials(u).iter().map(|d| map.differential(&x, d)).collect()
        });
        ParametricImmersion {
            name: name.into(),
            ambient_dim: self.ambient_dim,
            axes: self.axes.clone(),
            eval,
            d1: Some(d1),
            d2: None,
            orientation_sign: self.orientation_sign,
            topology: self.topology,
            fd: self.fd,
            center: None,
        }
    }

    /// R ∘ f for an orthogonal matrix R (applied to the value and all derivatives).
    pub fn rotated(&self, rotation: &DMatrix<f64>) -> ParametricImmersion {
        let rot = Arc::new(rotation.clone());
        let inner = self.clone();
        let r = rot.clone();
        let eval: PointFn = Arc::new(move |u: &[f64]| &*r * inner.eval(u));
        let d1 = self.d1.as_ref().map(|d1| {
            let d1 = d1.clone();
            let r = rot.clone();
            Arc::new(move |u: &[f64]| d1(u).iter().map(|d| &*r * d).collect::<Vec<_>>()) as FirstDerivFn
        });
        let d2 = self.d2.as_ref().map(|d2| {
            let d2 = d2.clone();
            let r = rot.clone();
            Arc::new(move |u: &[f64]| {
                d2(u).iter()
                    .map(|row| row.iter().map(|d| &*r * d).collect::<Vec<_>>())
                    .collect::<Vec<_>>()
            }) as SecondDerivFn
        });
        let orientation = self.orientation_sign * rotation.determinant().signum();
        ParametricImmersion {
            name: self.name.clone(),
            ambient_dim: self.ambient_dim,
            axes: self.axes.clone(),
            eval,
            d1,
            d2,
            orientation_sign: orientation,
            topology: self.topology,
            fd: self.fd,
            center: self.center.as_ref().map(|c| SpherePoint::new_unchecked(rotation * c.coords())),
        }
    }
}

/// Generalised cross product: N_k = det[∂_1 f, …, ∂_n f, e_k, f], normalised
/// and multiplied by `sign`. None when the columns are (numerically) dependent.
pub(crate) fn normal_from_frame(partials: &[DVector<f64>], p: &DVector<f64>, sign: f64) -> Option<DVector<f64>> {
    let dim = p.len();
    let n = partials.len();
    let mut m = DMatrix::zeros(dim, dim);
    for (j, d) in partials.iter().enumerate() {
        m.set_column(j, d);
    }
    m.set_column(n + 1, p);
    let mut normal = DVector::zeros(dim);
    for k in 0..dim {
        let minor = m.clone().remove_row(k).remove_column(n);
        let sgn = if (k + n).is_multiple_of(2) { 1.0 } else { -1.0 };
        normal[k] = sgn * minor.determinant();
    }
    let norm = normal.norm();
    if !(norm > 1e-300) {
        return None;
    }
    // clean up the components along f and ∂f introduced by rounding
    let mut eta = normal / norm;
    eta -= p * eta.dot(p);
    let eta = eta.normalize();
    Some(eta * sign)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_orientation_convention() {
        // equator of S^2 traced by θ ↦ (cos θ, sin θ, 0): at θ = 0, ∂f = e2, f = e1
        let partials = vec![DVector::from_column_slice(&[0.0, 1.0, 0.0])];
        let p = DVector::from_column_slice(&[1.0, 0.0, 0.0]);
        let eta = normal_from_frame(&partials, &p, 1.0).unwrap();
        let m = DMatrix::from_columns(&[partials[0].clone(), eta.clone(), p.clone()]);
        assert!(m.determinant() > 0.0);
        let flipped = normal_from_frame(&partials, &p, -1.0).unwrap();
        assert_eq!(flipped, -eta);
    }

    #[test]
    fn degenerate_frame_is_rejected() {
        let eval: PointFn = Arc::new(|_u: &[f64]| DVector::from_column_slice(&[1.0, 0.0, 0.0]));
        let imm = ParametricImmersion::new("constant", 3, vec![ChartAxis::periodic(0.0, 1.0)], eval);
        assert!(matches!(imm.tangent_frame(&[0.2]), Err(GeometryError::ImmersionDegenerate { .. })));
        assert!(imm.unit_normal(&[0.2]).is_err());
    }
}
