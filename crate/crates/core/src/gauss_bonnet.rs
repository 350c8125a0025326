//! Integral and degree checks of ∫_M κ_Γ ω = (c_n / 2) χ(M).

use std::collections::{BTreeSet, HashMap};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::curvature::{gauss_map, map_grid, sample_grid};
use crate::error::{GeometryError, Result};
use crate::sphere::sphere_volume;
use crate::structures::{TranslationStructure, VVector};
use crate::surfaces::{ParametricImmersion, QuadratureGrid, Topology};

/// Pairwise (tree) summation in a fixed order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Σ w · field(u) · √det g(u) over the grid.
pub fn integrate_scalar<F>(imm: &ParametricImmersion, grid: &QuadratureGrid, field: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let terms = map_grid(grid, |u| {
        let g = imm.tangent_frame(u)?.metric;
        Ok(field(u)? * g.determinant().max(0.0).sqrt())
    })?;
    let weighted: Vec<f64> = terms.iter().enumerate().map(|(i, t)| t * grid.weight(i)).collect();
    Ok(pairwise_sum(&weighted))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussBonnetReport {
    pub integral: f64,
    pub target: f64,
    pub residual: f64,
    /// integral / c_n.
    pub degree_estimate: f64,
    pub euler_characteristic: i64,
    pub c_n: f64,
    pub nodes: usize,
    /// Largest disagreement between the two κ_Γ evaluation paths.
    pub max_kappa_path_difference: f64,
    pub max_prop_residual: f64,
}

pub fn gauss_bonnet_check(
    structure: &dyn TranslationStructure,
    imm: &ParametricImmersion,
    grid: &QuadratureGrid,
) -> Result<GaussBonnetReport> {
    let n = imm.n();
    if n % 2 == 1 {
        return Err(GeometryError::OddDimension(n));
    }
    let chi = euler_characteristic(imm)?;
    let samples = sample_grid(structure, imm, grid)?;
    let weighted: Vec<f64> = samples
        .iter()
        .enumerate()
        .map(|(i, s)| s.kappa_gamma * s.sqrt_det_metric() * grid.weight(i))
        .collect();
    let integral = pairwise_sum(&weighted);
    let c_n = sphere_volume(n);
    let target = 0.5 * c_n * chi as f64;
    Ok(GaussBonnetReport {
        integral,
        target,
        residual: (integral - target).abs(),
        degree_estimate: integral / c_n,
        euler_characteristic: chi,
        c_n,
        nodes: samples.len(),
        max_kappa_path_difference: samples
            .iter()
            .map(|s| (s.kappa_gamma - s.kappa_gamma_operators).abs())
            .fold(0.0, f64::max),
        max_prop_residual: samples.iter().map(|s| s.prop_residual).fold(0.0, f64::max),
    })
}

/// χ(M) from the topology tag; untagged surfaces with n = 2 fall back to a
/// mesh count on a 48 × 48 grid.
pub fn euler_characteristic(imm: &ParametricImmersion) -> Result<i64> {
    match imm.topology() {
        Topology::Sphere => Ok(if imm.n().is_multiple_of(2) { 2 } else { 0 }),
        Topology::Torus => Ok(0),
        Topology::Other { euler } => Ok(euler),
        Topology::Unknown if imm.n() == 2 => mesh_euler_characteristic(imm, 48),
        Topology::Unknown => Err(GeometryError::UnknownTopology),
    }
}

/// V − E + F of the triangulated chart grid for n = 2. Vertices with the
/// same image (periodic seams, collapsed poles) are identified, and
/// triangles or edges that collapse are dropped.
pub fn mesh_euler_characteristic(imm: &ParametricImmersion, count: usize) -> Result<i64> {
    if imm.n() != 2 {
        return Err(GeometryError::Domain("mesh Euler characteristic needs n = 2".into()));
    }
    if count < 3 {
        return Err(GeometryError::Domain("mesh needs at least 3 cells per axis".into()));
    }
    let axes = imm.axes();
    let sizes: Vec<usize> = axes.iter().map(|a| if a.periodic { count } else { count + 1 }).collect();
    let coord = |k: usize, i: usize| axes[k].lo + axes[k].length() * i as f64 / count as f64;

    let mut ids: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut vertex = vec![vec![0usize; sizes[1]]; sizes[0]];
    for (i, row) in vertex.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            let p = imm.eval(&[coord(0, i), coord(1, j)]);
            let key: Vec<i64> = p.iter().map(|x| (x * 1e9).round() as i64).collect();
            let next = ids.len();
            *slot = *ids.entry(key).or_insert(next);
        }
    }
    let at = |i: usize, j: usize| vertex[i % sizes[0]][j % sizes[1]];

    let mut edges = BTreeSet::new();
    let mut faces = BTreeSet::new();
    for i in 0..count {
        for j in 0..count {
            let (a, b, c, d) = (at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
            for tri in [[a, b, c], [a, c, d]] {
                let mut t = tri;
                t.sort_unstable();
                if t[0] != t[1] && t[1] != t[2] {
                    faces.insert(t);
                }
                for (x, y) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
                    if x != y {
                        edges.insert((x.min(y), x.max(y)));
                    }
                }
            }
        }
    }
    Ok(ids.len() as i64 - edges.len() as i64 + faces.len() as i64)
}

/// A solution of γ(u) = target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Preimage {
    pub u: Vec<f64>,
    pub kappa_gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeReport {
    pub degree: i64,
    /// Direction actually used (after any perturbation).
    pub target: Vec<f64>,
    pub preimages: Vec<Preimage>,
    pub attempts: usize,
}

const MAX_ATTEMPTS: usize = 6;
const NEWTON_ITERS: usize = 60;
const NEWTON_TOL: f64 = 1e-11;
const DEDUPE_TOL: f64 = 1e-7;
const REGULAR_TOL: f64 = 1e-6;

/// Signed count of preimages of `target` under γ, seeded from local minima
/// of |γ − target| on the grid and refined by Gauss-Newton. A target that
/// is not a regular value, or a seed that fails to converge, triggers a
/// retry with a slightly rotated direction.
pub fn degree_by_preimage(
    structure: &dyn TranslationStructure,
    imm: &ParametricImmersion,
    grid: &QuadratureGrid,
    target_direction: &VVector,
) -> Result<DegreeReport> {
    let n = imm.n();
    if n % 2 == 1 {
        return Err(GeometryError::OddDimension(n));
    }
    if target_direction.dim() != structure.model_dim() {
        return Err(GeometryError::DimensionMismatch { expected: structure.model_dim(), got: target_direction.dim() });
    }
    if !(target_direction.norm() > 0.0) {
        return Err(GeometryError::Domain("target direction must be nonzero".into()));
    }
    let gammas = map_grid(grid, |u| gauss_map(structure, imm, u).map(VVector::into_coords))?;
    let mut last_err = GeometryError::ConvergenceFailure;
    for attempt in 0..MAX_ATTEMPTS {
        let target = perturbed_direction(target_direction.coords(), attempt);
        match count_preimages(structure, imm, grid, &gammas, &target) {
            Ok(preimages) => {
                let degree = preimages.iter().map(|p| p.kappa_gamma.signum() as i64).sum();
                return Ok(DegreeReport {
                    degree,
                    target: target.iter().copied().collect(),
                    preimages,
                    attempts: attempt + 1,
                });
            }
            Err(e @ (GeometryError::NotRegularValue(_) | GeometryError::ConvergenceFailure)) => last_err = e,
            Err(e) => return Err(e),
        }
    }
    Err(last_err)
}

fn perturbed_direction(base: &DVector<f64>, attempt: usize) -> DVector<f64> {
    let mut t = base.normalize();
    if attempt > 0 {
        let dim = t.len();
        for k in 0..dim {
            t[k] += 0.02 * attempt as f64 * (((attempt * 7 + k * 3) % 5) as f64 - 2.0);
        }
        t.normalize_mut();
    }
    t
}

fn neighbours(grid: &QuadratureGrid, imm: &ParametricImmersion, flat: usize) -> Vec<usize> {
    let counts = grid.counts();
    let idx = grid.multi_index(flat);
    let mut out = Vec::new();
    for k in 0..idx.len() {
        for step in [-1i64, 1] {
            let mut j = idx.clone();
            let v = j[k] as i64 + step;
            if imm.axes()[k].periodic {
                j[k] = v.rem_euclid(counts[k] as i64) as usize;
            } else if v < 0 || v >= counts[k] as i64 {
                continue;
            } else {
                j[k] = v as usize;
            }
            out.push(j.iter().zip(&counts).fold(0, |acc, (i, c)| acc * c + i));
        }
    }
    out
}

fn count_preimages(
    structure: &dyn TranslationStructure,
    imm: &ParametricImmersion,
    grid: &QuadratureGrid,
    gammas: &[DVector<f64>],
    target: &DVector<f64>,
) -> Result<Vec<Preimage>> {
    let dist: Vec<f64> = gammas.iter().map(|g| (g - target).norm()).collect();
    // a preimage lies within one cell of some node, so the largest jump of γ
    // between neighbouring nodes bounds how far a useful seed can be
    let mut max_jump: f64 = 0.0;
    for i in 0..grid.len() {
        for j in neighbours(grid, imm, i) {
            max_jump = max_jump.max((&gammas[i] - &gammas[j]).norm());
        }
    }
    let radius = 2.0 * max_jump;
    let seeds: Vec<usize> = (0..grid.len())
        .filter(|&i| dist[i] <= radius && neighbours(grid, imm, i).iter().all(|&j| dist[i] <= dist[j]))
        .collect();

    let mut found: Vec<(DVector<f64>, Preimage)> = Vec::new();
    for i in seeds {
        let u = match newton(structure, imm, &grid.node(i), target) {
            Some(u) => u,
            None => {
                if dist[i] <= 0.5 * max_jump {
                    return Err(GeometryError::ConvergenceFailure);
                }
                continue;
            }
        };
        let x = imm.eval(&u);
        if found.iter().any(|(y, _)| (y - &x).norm() < DEDUPE_TOL) {
            continue;
        }
        let kappa = crate::curvature::gauss_map_derivative(structure, imm, &u)?.determinant();
        if kappa.abs() < REGULAR_TOL {
            return Err(GeometryError::NotRegularValue(kappa.abs()));
        }
        found.push((x, Preimage { u, kappa_gamma: kappa }));
    }
    Ok(found.into_iter().map(|(_, p)| p).collect())
}

/// Gauss-Newton on γ(u) − target with a central-difference Jacobian.
fn newton(
    structure: &dyn TranslationStructure,
    imm: &ParametricImmersion,
    start: &[f64],
    target: &DVector<f64>,
) -> Option<Vec<f64>> {
    let n = imm.n();
    let axes = imm.axes();
    let h = imm.fd_steps().second;
    let max_step = axes.iter().map(|a| a.length()).fold(f64::INFINITY, f64::min) * 0.1;
    let mut u = start.to_vec();
    let eval = |u: &[f64]| gauss_map(structure, imm, u).ok().map(VVector::into_coords);
    let mut r = eval(&u)? - target;
    for _ in 0..NEWTON_ITERS {
        if r.norm() < NEWTON_TOL {
            return Some(u);
        }
        let mut jac = DMatrix::zeros(target.len(), n);
        for j in 0..n {
            let mut up = u.clone();
            let mut dn = u.clone();
            up[j] += h;
            dn[j] -= h;
            jac.set_column(j, &((eval(&up)? - eval(&dn)?) / (2.0 * h)));
        }
        let step = jac.clone().svd(true, true).solve(&(-&r), 1e-14).ok()?;
        let scale = (max_step / step.norm()).min(1.0);
        let mut next = u.clone();
        for j in 0..n {
            next[j] += scale * step[j];
            let a = &axes[j];
            if a.periodic {
                next[j] = a.lo + (next[j] - a.lo).rem_euclid(a.length());
            } else if next[j] <= a.lo || next[j] >= a.hi {
                return None;
            }
        }
        let r_next = eval(&next)? - target;
        u = next;
        r = r_next;
    }
    (r.norm() < 1e-9).then_some(u)
}
