use nalgebra::DVector;

use super::{check_dim, TranslationStructure, VVector};
use crate::error::{GeometryError, Result};
use crate::sphere::{transport_raw, SpherePoint, TangentVector, ANTIPODAL_TOL};

/// Γ_p(v) = τ_p^{p₀}(v), expressed in an orthonormal basis of T_{p₀}S^{n+1}.
/// Defined on S^{n+1} minus the antipode of p₀.
#[derive(Debug, Clone)]
pub struct ParallelTransportStructure {
    base: SpherePoint,
    basis: Vec<DVector<f64>>,
}

impl ParallelTransportStructure {
    /// Uses the basis obtained by reflecting the standard basis with the
    /// Householder map that sends e_k to p₀, where k = argmax |p₀_k|.
    /// For p₀ = e_k this is just the remaining standard basis vectors.
    pub fn new(base: SpherePoint) -> Self {
        let basis = householder_complement(base.coords());
        Self { base, basis }
    }

    /// Uses a caller-supplied orthonormal basis of T_{p₀}S^{n+1}.
    pub fn with_basis(base: SpherePoint, basis: Vec<DVector<f64>>) -> Result<Self> {
        let dim = base.dim();
        check_dim(dim - 1, basis.len())?;
        for (i, bi) in basis.iter().enumerate() {
            check_dim(dim, bi.len())?;
            let normal = bi.dot(base.coords()).abs();
            if normal > 1e-10 {
                return Err(GeometryError::NotTangent(normal));
            }
            for (j, bj) in basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                let dev = (bi.dot(bj) - target).abs();
                if dev > 1e-10 {
                    return Err(GeometryError::FrameNotOrthonormal(dev));
                }
            }
        }
        Ok(Self { base, basis })
    }

    pub fn base_point(&self) -> &SpherePoint {
        &self.base
    }

    pub fn basis(&self) -> &[DVector<f64>] {
        &self.basis
    }

    /// Coordinates of a vector of T_{p₀} in the stored basis.
    pub fn coordinates_at_base(&self, v: &DVector<f64>) -> VVector {
        VVector::new(DVector::from_iterator(
            self.basis.len(),
            self.basis.iter().map(|b| b.dot(v)),
        ))
    }

    /// The vector of T_{p₀} with coordinates `w`.
    pub fn vector_at_base(&self, w: &VVector) -> DVector<f64> {
        let mut out = DVector::zeros(self.base.dim());
        for (b, wi) in self.basis.iter().zip(w.coords().iter()) {
            out.axpy(*wi, b, 1.0);
        }
        out
    }

    fn guard(&self, p: &SpherePoint) -> Result<()> {
        check_dim(self.base.dim(), p.dim())?;
        if !self.in_domain(p) {
            return Err(GeometryError::OutOfDomain);
        }
        Ok(())
    }
}

impl TranslationStructure for ParallelTransportStructure {
    fn name(&self) -> &'static str {
        "parallel"
    }

    fn ambient_dim(&self) -> usize {
        self.base.dim()
    }

    fn reference_point(&self) -> &SpherePoint {
        &self.base
    }

    fn in_domain(&self, p: &SpherePoint) -> bool {
        1.0 + p.dot(&self.base) > ANTIPODAL_TOL
    }

    fn apply(&self, v: &TangentVector) -> Result<VVector> {
        self.guard(v.base())?;
        let at_base = transport_raw(v.base().coords(), self.base.coords(), v.vec());
        Ok(self.coordinates_at_base(&at_base))
    }

    fn unapply(&self, p: &SpherePoint, w: &VVector) -> Result<TangentVector> {
        self.guard(p)?;
        check_dim(self.model_dim(), w.dim())?;
        let at_base = self.vector_at_base(w);
        let out = transport_raw(self.base.coords(), p.coords(), &at_base);
        Ok(TangentVector::new_unchecked(p.clone(), out))
    }
}

/// Orthonormal basis of p^⊥ (p a unit vector): the images H e_i, i ≠ k, of a
/// Householder reflection H with H e_k = p.
pub(crate) fn householder_complement(p: &DVector<f64>) -> Vec<DVector<f64>> {
    let dim = p.len();
    let k = p.iamax();
    let mut u = p.clone();
    u[k] -= 1.0;
    let u_sq = u.norm_squared();
    (0..dim)
        .filter(|&i| i != k)
        .map(|i| {
            let mut col = DVector::zeros(dim);
            col[i] = 1.0;
            if u_sq > 1e-30 {
                // H e_i = e_i - 2 u u_i / |u|^2
                col.axpy(-2.0 * u[i] / u_sq, &u, 1.0);
            }
            col
        })
        .collect()
}
