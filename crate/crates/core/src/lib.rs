//! Translational structures on the round sphere S^{n+1}, Gauss maps and
//! translational curvature of immersed hypersurfaces, Gauss-Bonnet checks,
//! and numerical rigidity certificates.

// comparisons are written so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod sphere;
pub mod structures;
pub mod surfaces;
pub mod curvature;
pub mod gauss_bonnet;
pub mod rigidity;
pub mod beltrami;

pub use error::{GeometryError, Result};
pub use sphere::{SpherePoint, TangentVector};
