use nalgebra::{DVector, Quaternion};

use super::{check_dim, TranslationStructure, VVector};
use crate::error::Result;
use crate::sphere::{SpherePoint, TangentVector};

/// Left translation on S³ viewed as the unit quaternions, with
/// (a, b, c, d) ↦ a + bi + cj + dk. Γ_g(v) = ḡ·v, whose real part vanishes
/// for v ⊥ g; V ≅ ℝ³ through the (i, j, k) components.
#[derive(Debug, Clone)]
pub struct QuaternionStructure {
    identity: SpherePoint,
}

impl Default for QuaternionStructure {
    fn default() -> Self {
        Self::new()
    }
}

impl QuaternionStructure {
    pub fn new() -> Self {
        Self {
            identity: SpherePoint::basis(4, 0),
        }
    }
}

pub(crate) fn to_quaternion(v: &DVector<f64>) -> Quaternion<f64> {
    Quaternion::new(v[0], v[1], v[2], v[3])
}

pub(crate) fn from_quaternion(q: &Quaternion<f64>) -> DVector<f64> {
    DVector::from_column_slice(&[q.w, q.i, q.j, q.k])
}

impl TranslationStructure for QuaternionStructure {
    fn name(&self) -> &'static str {
        "quaternion"
    }

    fn ambient_dim(&self) -> usize {
        4
    }

    fn reference_point(&self) -> &SpherePoint {
        &self.identity
    }

    fn in_domain(&self, p: &SpherePoint) -> bool {
        p.dim() == 4
    }

    fn apply(&self, v: &TangentVector) -> Result<VVector> {
        check_dim(4, v.base().dim())?;
        let g = to_quaternion(v.base().coords());
        let translated = g.conjugate() * to_quaternion(v.vec());
        Ok(VVector::from_slice(&[translated.i, translated.j, translated.k]))
    }

    fn unapply(&self, p: &SpherePoint, w: &VVector) -> Result<TangentVector> {
        check_dim(4, p.dim())?;
        check_dim(3, w.dim())?;
        let g = to_quaternion(p.coords());
        let x = w.coords();
        let out = g * Quaternion::new(0.0, x[0], x[1], x[2]);
        Ok(TangentVector::new_unchecked(p.clone(), from_quaternion(&out)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_gives_imaginary_part() {
        let s = QuaternionStructure::new();
        let v = TangentVector::new(SpherePoint::basis(4, 0), DVector::from_column_slice(&[0.0, 0.5, -1.0, 2.0])).unwrap();
        assert_eq!(s.apply(&v).unwrap().coords().as_slice(), &[0.5, -1.0, 2.0]);
    }

    #[test]
    fn rejects_wrong_dimension() {
        let s = QuaternionStructure::new();
        assert!(s.unapply(&SpherePoint::basis(3, 0), &VVector::from_slice(&[1.0, 0.0, 0.0])).is_err());
    }
}
