//! Translational structures Γ: fibrewise isometries Γ_p : T_pS^{n+1} → V.
//!
//! V is modelled as ℝ^{n+1} with the standard inner product; every structure
//! carries the isomorphism it needs to land there.

mod frame;
mod parallel;
mod quaternion;

use nalgebra::DVector;

pub use frame::{FrameFn, FrameStructure};
pub use parallel::ParallelTransportStructure;
pub(crate) use parallel::householder_complement;
pub use quaternion::QuaternionStructure;

use crate::error::Result;
use crate::sphere::{SpherePoint, TangentVector};

/// A vector of the model space V ≅ ℝ^{n+1}.
#[derive(Debug, Clone, PartialEq)]
pub struct VVector(DVector<f64>);

impl VVector {
    pub fn new(coords: DVector<f64>) -> Self {
        Self(coords)
    }

    pub fn from_slice(coords: &[f64]) -> Self {
        Self(DVector::from_column_slice(coords))
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_coords(self) -> DVector<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn dot(&self, other: &VVector) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn normalized(&self) -> VVector {
        Self(self.0.normalize())
    }
}

/// A translational structure on (an open subset of) S^{n+1}.
pub trait TranslationStructure: Send + Sync {
    /// Short identifier used in reports.
    fn name(&self) -> &'static str;

    /// Ambient dimension n+2 of the sphere the structure lives on.
    fn ambient_dim(&self) -> usize;

    /// Dimension n+1 of the model space V.
    fn model_dim(&self) -> usize {
        self.ambient_dim() - 1
    }

    /// A distinguished point: p₀ for parallel and frame structures, the
    /// identity quaternion for the Lie group structure.
    fn reference_point(&self) -> &SpherePoint;

    fn in_domain(&self, p: &SpherePoint) -> bool;

    /// Γ_p(v) for v tangent at p = v.base().
    fn apply(&self, v: &TangentVector) -> Result<VVector>;

    /// Γ_p^{-1}(w).
    fn unapply(&self, p: &SpherePoint, w: &VVector) -> Result<TangentVector>;

    /// The Γ-invariant field through x, evaluated at q: (Γ_q^{-1} ∘ Γ_p)(x).
    fn invariant_field(&self, x: &TangentVector, q: &SpherePoint) -> Result<TangentVector> {
        let w = self.apply(x)?;
        self.unapply(q, &w)
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(crate::error::GeometryError::DimensionMismatch { expected, got });
    }
    Ok(())
}
