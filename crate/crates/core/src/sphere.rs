//! Embedded geometry of the unit sphere S^{n+1} ⊂ ℝ^{n+2}.
//!
//! Points and tangent vectors are stored as ambient coordinate vectors. The
//! dimension is a runtime value, so the same code serves S³, S⁵, and so on.

use nalgebra::DVector;

use crate::error::{GeometryError, Result};

/// A vector of ℝ^{n+2}.
pub type AmbientVector = DVector<f64>;

/// Tolerance on | |p| - 1 | accepted by [`SpherePoint::new`].
pub const UNIT_TOL: f64 = 1e-12;
/// Tolerance on |<v, p>| accepted by [`TangentVector::new`].
pub const TANGENT_TOL: f64 = 1e-10;
/// Points with 1 + <p,q> below this are treated as antipodal.
pub const ANTIPODAL_TOL: f64 = 1e-10;

/// A point of the unit sphere, stored by its ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint(AmbientVector);

impl SpherePoint {
    /// Wraps `v`, which must already be a unit vector (within [`UNIT_TOL`]).
    pub fn new(v: AmbientVector) -> Result<Self> {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let dev = (v.norm() - 1.0).abs();
        if dev > UNIT_TOL {
            return Err(GeometryError::NotUnit(dev));
        }
        Ok(Self(v))
    }

    /// Normalises a nonzero finite vector onto the sphere.
    pub fn normalize(v: AmbientVector) -> Result<Self> {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let norm = v.norm();
        if norm < 1e-300 {
            return Err(GeometryError::Domain("cannot normalise the zero vector".into()));
        }
        Ok(Self(v / norm))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(coords))
    }

    /// The standard basis vector e_k of ℝ^dim (zero-based `k`).
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index out of range");
        let mut v = DVector::zeros(dim);
        v[k] = 1.0;
        Self(v)
    }

    pub(crate) fn new_unchecked(v: AmbientVector) -> Self {
        Self(v)
    }

    pub fn coords(&self) -> &AmbientVector {
        &self.0
    }

    pub fn into_coords(self) -> AmbientVector {
        self.0
    }

    /// Ambient dimension n+2.
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn antipode(&self) -> SpherePoint {
        Self(-&self.0)
    }
}

/// A vector tangent to the sphere at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: SpherePoint,
    vec: AmbientVector,
}

impl TangentVector {
    pub fn new(base: SpherePoint, vec: AmbientVector) -> Result<Self> {
        if vec.len() != base.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: base.dim(),
                got: vec.len(),
            });
        }
        if vec.iter().any(|x| !x.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let normal = vec.dot(base.coords()).abs();
        if normal > TANGENT_TOL * vec.norm().max(1.0) {
            return Err(GeometryError::NotTangent(normal));
        }
        Ok(Self { base, vec })
    }

    pub(crate) fn new_unchecked(base: SpherePoint, vec: AmbientVector) -> Self {
        Self { base, vec }
    }

    pub fn zero(base: SpherePoint) -> Self {
        let vec = DVector::zeros(base.dim());
        Self { base, vec }
    }

    pub fn base(&self) -> &SpherePoint {
        &self.base
    }

    pub fn vec(&self) -> &AmbientVector {
        &self.vec
    }

    pub fn into_vec(self) -> AmbientVector {
        self.vec
    }

    pub fn norm(&self) -> f64 {
        self.vec.norm()
    }
}

/// Great-circle distance arccos<p,q>, with the inner product clamped to [-1, 1].
pub fn geodesic_distance(p: &SpherePoint, q: &SpherePoint) -> f64 {
    p.dot(q).clamp(-1.0, 1.0).acos()
}

/// Riemannian exponential map of the round sphere.
pub fn exp_map(v: &TangentVector) -> SpherePoint {
    let len = v.norm();
    let p = v.base();
    if len < 1e-14 {
        return p.clone();
    }
    let out = p.coords() * len.cos() + v.vec() * (len.sin() / len);
    // renormalise to absorb rounding from the two-term sum
    let norm = out.norm();
    SpherePoint::new_unchecked(out / norm)
}

/// Orthogonal projection of an ambient vector onto T_pS^{n+1}.
pub fn tangent_project(p: &SpherePoint, w: &AmbientVector) -> TangentVector {
    let vec = w - p.coords() * w.dot(p.coords());
    TangentVector::new_unchecked(p.clone(), vec)
}

pub(crate) fn check_non_antipodal(p: &SpherePoint, q: &SpherePoint) -> Result<f64> {
    let gap = 1.0 + p.dot(q);
    if gap <= ANTIPODAL_TOL {
        return Err(GeometryError::AntipodalPoints { gap });
    }
    Ok(gap)
}

/// Closed-form parallel transport on raw coordinates:
/// v - <v,q>/(1 + <q,p>) (q + p). The caller guarantees non-antipodal input.
pub(crate) fn transport_raw(p: &AmbientVector, q: &AmbientVector, v: &AmbientVector) -> AmbientVector {
    let coeff = v.dot(q) / (1.0 + q.dot(p));
    v - (q + p) * coeff
}

/// Parallel transport τ_p^q along the minimising geodesic from p to q.
pub fn parallel_transport(q: &SpherePoint, v: &TangentVector) -> Result<TangentVector> {
    let p = v.base();
    check_non_antipodal(p, q)?;
    let out = transport_raw(p.coords(), q.coords(), v.vec());
    Ok(TangentVector::new_unchecked(q.clone(), out))
}

/// Parallel transport by RK4 integration of X' = -<X, β'> β along the
/// unit-speed geodesic β from p to q. Independent of the closed form.
pub fn parallel_transport_ode(q: &SpherePoint, v: &TangentVector, steps: usize) -> Result<TangentVector> {
    if steps < 2 {
        return Err(GeometryError::Domain(format!("steps must be >= 2, got {steps}")));
    }
    let p = v.base();
    check_non_antipodal(p, q)?;
    let cos_d = p.dot(q).clamp(-1.0, 1.0);
    let chord = q.coords() - p.coords() * cos_d;
    let sin_d = chord.norm();
    if sin_d < 1e-15 {
        return Ok(TangentVector::new_unchecked(q.clone(), v.vec().clone()));
    }
    let qbar = chord / sin_d;
    let length = sin_d.atan2(cos_d);

    let pc = p.coords();
    let beta = |t: f64| pc * t.cos() + &qbar * t.sin();
    let dbeta = |t: f64| pc * (-t.sin()) + &qbar * t.cos();
    let rhs = |t: f64, x: &AmbientVector| -> AmbientVector { beta(t) * (-x.dot(&dbeta(t))) };

    let h = length / steps as f64;
    let mut x = v.vec().clone();
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = rhs(t, &x);
        let k2 = rhs(t + 0.5 * h, &(&x + &k1 * (0.5 * h)));
        let k3 = rhs(t + 0.5 * h, &(&x + &k2 * (0.5 * h)));
        let k4 = rhs(t + h, &(&x + &k3 * h));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    Ok(TangentVector::new_unchecked(q.clone(), x))
}

/// Volume c_n of the unit sphere S^n ⊂ ℝ^{n+1}, i.e. 2π^{(n+1)/2} / Γ((n+1)/2).
///
/// Evaluated with the recurrence c_n = 2π c_{n-2} / (n - 1), c_0 = 2, c_1 = 2π.
pub fn sphere_volume(n: usize) -> f64 {
    use std::f64::consts::PI;
    let mut c = if n.is_multiple_of(2) { 2.0 } else { 2.0 * PI };
    let mut k = if n.is_multiple_of(2) { 2 } else { 3 };
    while k <= n {
        c *= 2.0 * PI / (k - 1) as f64;
        k += 2;
    }
    c
}
