use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use super::{check_dim, ParallelTransportStructure, TranslationStructure, VVector};
use crate::error::{GeometryError, Result};
use crate::sphere::{transport_raw, SpherePoint, TangentVector, ANTIPODAL_TOL};

/// An orthonormal tangent frame V_1(p), …, V_{n+1}(p).
pub type FrameFn = Arc<dyn Fn(&SpherePoint) -> Vec<DVector<f64>> + Send + Sync>;
type DomainFn = Arc<dyn Fn(&SpherePoint) -> bool + Send + Sync>;

/// Γ_p(v) = Σ <v, V_i(p)> V_i(p₀), with V identified with ℝ^{n+1} through
/// the basis V_i(p₀). The frame must already be orthonormal; it is checked
/// at every evaluation.
#[derive(Clone)]
pub struct FrameStructure {
    reference: SpherePoint,
    frame: FrameFn,
    domain: DomainFn,
    gram_tol: f64,
}

impl fmt::Debug for FrameStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FrameStructure")
            .field("reference", &self.reference)
            .field("gram_tol", &self.gram_tol)
            .finish_non_exhaustive()
    }
}

impl FrameStructure {
    pub fn new(
        reference: SpherePoint,
        frame: FrameFn,
        domain: impl Fn(&SpherePoint) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self {
            reference,
            frame,
            domain: Arc::new(domain),
            gram_tol: 1e-8,
        }
    }

    /// The parallel frame V_i(p) = τ_{p₀}^p(b_i) of a parallel-transport structure.
    pub fn from_parallel(parallel: &ParallelTransportStructure) -> Self {
        let base = parallel.base_point().clone();
        let basis = parallel.basis().to_vec();
        let b = base.coords().clone();
        let frame: FrameFn = Arc::new(move |p: &SpherePoint| {
            basis.iter().map(|bi| transport_raw(&b, p.coords(), bi)).collect()
        });
        let anti = base.clone();
        Self::new(base, frame, move |p| 1.0 + p.dot(&anti) > ANTIPODAL_TOL)
    }

    pub fn with_gram_tolerance(mut self, tol: f64) -> Self {
        self.gram_tol = tol;
        self
    }

    /// Frame at p after dimension and Gram checks.
    pub fn frame_at(&self, p: &SpherePoint) -> Result<Vec<DVector<f64>>> {
        check_dim(self.reference.dim(), p.dim())?;
        if !(self.domain)(p) {
            return Err(GeometryError::OutOfDomain);
        }
        let frame = (self.frame)(p);
        check_dim(self.model_dim(), frame.len())?;
        let mut dev: f64 = 0.0;
        for (i, vi) in frame.iter().enumerate() {
            check_dim(p.dim(), vi.len())?;
            dev = dev.max(vi.dot(p.coords()).abs());
            for (j, vj) in frame.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((vi.dot(vj) - target).abs());
            }
        }
        if dev > self.gram_tol {
            return Err(GeometryError::FrameNotOrthonormal(dev));
        }
        Ok(frame)
    }
}

impl TranslationStructure for FrameStructure {
    fn name(&self) -> &'static str {
        "frame"
    }

    fn ambient_dim(&self) -> usize {
        self.reference.dim()
    }

    fn reference_point(&self) -> &SpherePoint {
        &self.reference
    }

    fn in_domain(&self, p: &SpherePoint) -> bool {
        p.dim() == self.reference.dim() && (self.domain)(p)
    }

    fn apply(&self, v: &TangentVector) -> Result<VVector> {
        let frame = self.frame_at(v.base())?;
        Ok(VVector::new(DVector::from_iterator(
            frame.len(),
            frame.iter().map(|vi| vi.dot(v.vec())),
        )))
    }

    fn unapply(&self, p: &SpherePoint, w: &VVector) -> Result<TangentVector> {
        let frame = self.frame_at(p)?;
        check_dim(frame.len(), w.dim())?;
        let mut out = DVector::zeros(p.dim());
        for (vi, wi) in frame.iter().zip(w.coords().iter()) {
            out.axpy(*wi, vi, 1.0);
        }
        Ok(TangentVector::new_unchecked(p.clone(), out))
    }
}
