#![allow(dead_code)]

use gaussmap::surfaces::{ParametricImmersion, QuadratureGrid, QuadratureRule};
use gaussmap::{SpherePoint, TangentVector};
use nalgebra::DVector;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_point<R: Rng>(rng: &mut R, dim: usize) -> SpherePoint {
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-2 && n <= 1.0 {
            return SpherePoint::normalize(v).unwrap();
        }
    }
}

pub fn random_tangent<R: Rng>(rng: &mut R, p: &SpherePoint, scale: f64) -> TangentVector {
    let w = DVector::from_fn(p.dim(), |_, _| rng.random_range(-scale..scale));
    gaussmap::sphere::tangent_project(p, &w)
}

pub fn unit_tangent<R: Rng>(rng: &mut R, p: &SpherePoint) -> TangentVector {
    loop {
        let v = random_tangent(rng, p, 1.0);
        let n = v.norm();
        if n > 1e-2 {
            return TangentVector::new(p.clone(), v.vec() / n).unwrap();
        }
    }
}

/// A point of S^n written in an orthonormal frame of p₀⊥, at distance d from p₀.
pub fn point_at_distance<R: Rng>(rng: &mut R, p0: &SpherePoint, d: f64) -> SpherePoint {
    let dir = unit_tangent(rng, p0);
    SpherePoint::normalize(p0.coords() * d.cos() + dir.vec() * d.sin()).unwrap()
}

pub fn random_chart_point<R: Rng>(rng: &mut R, imm: &ParametricImmersion) -> Vec<f64> {
    imm.axes()
        .iter()
        .map(|a| {
            let pad = if a.periodic { 0.0 } else { 0.05 * a.length() };
            rng.random_range(a.lo + pad..a.hi - pad)
        })
        .collect()
}

pub fn grid(imm: &ParametricImmersion, nodes: usize) -> QuadratureGrid {
    QuadratureGrid::new(imm.axes(), nodes, QuadratureRule::Auto).unwrap()
}
