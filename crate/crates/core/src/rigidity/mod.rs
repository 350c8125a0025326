//! Sampled rigidity certificates for closed hypersurfaces of the sphere and
//! the ε-family of product hypersurfaces that shows the curvature bound
//! cannot be weakened.

mod cap;

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use serde::Serialize;

pub use cap::{
    cap_for_convention, enclosing_cap, largest_empty_cap, smallest_enclosing_ball, CapResult, RadiusConvention,
};

use crate::curvature::{map_grid, PointGeometry};
use crate::error::{GeometryError, Result};
use crate::gauss_bonnet::euler_characteristic;
use crate::sphere::{check_non_antipodal, SpherePoint};
use crate::surfaces::{make_clifford, ParametricImmersion, QuadratureGrid, QuadratureRule};

/// Seed for the empty-cap search.
pub const CAP_SEED: u64 = 0x0c1f_f04d;

/// Radius of the largest open cap missing M_r: arccos(min(r, √(1 − r²))).
pub fn lemma_radius_clifford(r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(r.min((1.0 - r * r).sqrt()).acos())
}

/// (λ₁, λ₂) = (−√(1 − r²)/r, r/√(1 − r²)) for M_r with the normal used by
/// [`make_clifford`]; λ₂ has multiplicity n − 1.
pub fn clifford_principal_curvatures(r: f64, n: usize) -> Result<(f64, f64)> {
    check_radius(r)?;
    if n < 2 {
        return Err(GeometryError::Domain(format!("need n >= 2, got {n}")));
    }
    let s = (1.0 - r * r).sqrt();
    Ok((-s / r, r / s))
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(GeometryError::Domain(format!("r must lie in (0, 1), got {r}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub verdict: Verdict,
    pub convention: RadiusConvention,
    pub radius: f64,
    pub cap_center: Vec<f64>,
    pub tan_half_radius: f64,
    pub min_abs_curvature: f64,
    /// min |λ_i| − tan(R/2).
    pub min_margin_curvature: f64,
    /// min |λ_i + c|.
    pub min_margin_invertibility: f64,
    pub worst_u_curvature: Vec<f64>,
    pub worst_u_invertibility: Vec<f64>,
    pub delta: f64,
    pub nodes: usize,
    pub note: &'static str,
}

/// Grid points of the immersion as sphere points, in node order.
pub fn sample_points(imm: &ParametricImmersion, grid: &QuadratureGrid) -> Result<Vec<SpherePoint>> {
    map_grid(grid, |u| imm.point(u))
}

/// Computes the cap of the chosen convention, centres the structure there
/// and checks min|λ_i| > tan(R/2) + δ and min|λ_i + c| > δ on the grid.
pub fn certify_sphere(
    imm: &ParametricImmersion,
    grid: &QuadratureGrid,
    delta: f64,
    convention: RadiusConvention,
) -> Result<CertificateReport> {
    if imm.n() < 2 {
        return Err(GeometryError::Domain("certificate needs n >= 2".into()));
    }
    let samples = sample_points(imm, grid)?;
    let cap = cap_for_convention(&samples, convention, CAP_SEED)?;
    certify_with_cap(imm, grid, delta, &cap)
}

struct NodeMargins {
    curvature: f64,
    invertibility: f64,
}

pub fn certify_with_cap(
    imm: &ParametricImmersion,
    grid: &QuadratureGrid,
    delta: f64,
    cap: &CapResult,
) -> Result<CertificateReport> {
    let p0 = &cap.center;
    let margins = map_grid(grid, |u| {
        let geo = PointGeometry::new(imm, u)?;
        let gap = check_non_antipodal(&geo.p, p0)?;
        let c = geo.eta.vec().dot(p0.coords()) / gap;
        let lambda = geo.principal_curvatures()?;
        Ok(NodeMargins {
            curvature: lambda.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min),
            invertibility: lambda.iter().map(|l| (l + c).abs()).fold(f64::INFINITY, f64::min),
        })
    })?;
    let argmin = |f: &dyn Fn(&NodeMargins) -> f64| {
        margins
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, m)| if f(m) < acc.1 { (i, f(m)) } else { acc })
    };
    let (ic, min_abs) = argmin(&|m| m.curvature);
    let (ii, min_inv) = argmin(&|m| m.invertibility);
    let tan_half = (0.5 * cap.radius).tan();
    let margin_curv = min_abs - tan_half;
    let verdict = if margin_curv > delta && min_inv > delta { Verdict::Certified } else { Verdict::Failed };
    Ok(CertificateReport {
        verdict,
        convention: cap.convention,
        radius: cap.radius,
        cap_center: p0.coords().iter().copied().collect(),
        tan_half_radius: tan_half,
        min_abs_curvature: min_abs,
        min_margin_curvature: margin_curv,
        min_margin_invertibility: min_inv,
        worst_u_curvature: grid.node(ic),
        worst_u_invertibility: grid.node(ii),
        delta,
        nodes: margins.len(),
        note: "sampled at grid nodes, not a proof",
    })
}

/// Margin of the ε-inequality min|λ_i| > ε tan(R/2) under one radius convention.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonMargins {
    pub convention: RadiusConvention,
    pub radius: f64,
    pub bound: f64,
    /// min over nodes of |λ₁| − bound.
    pub margin_lambda_1: f64,
    /// min over nodes and i ≥ 2 of |λ_i| − bound.
    pub margin_lambda_rest: f64,
}

impl EpsilonMargins {
    pub fn positive(&self) -> bool {
        self.margin_lambda_1 > 0.0 && self.margin_lambda_rest > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub epsilon: f64,
    pub n: usize,
    pub r: f64,
    pub s: f64,
    /// (ε/(1 − ε), 1/(1 + ε)).
    pub j_epsilon: (f64, f64),
    pub i_interval: (f64, f64),
    pub intersection: (f64, f64),
    /// Range of r ∈ (0, 1/√2] where the ε-inequality holds for the closed-form
    /// curvatures under the lemma radius, scanned on a fine grid.
    pub empirical_interval: (f64, f64),
    pub lambda: (f64, f64),
    /// Margins under the lemma radius cos R = min{r, s}; these decide the outcome.
    pub lemma: EpsilonMargins,
    /// Margins under the smallest enclosing cap, recorded for comparison.
    pub enclosing: EpsilonMargins,
    pub euler_characteristic: i64,
    pub nodes: usize,
    pub margins_positive: bool,
}

/// Largest admissible ε is √2 − 1.
pub fn epsilon_upper() -> f64 {
    SQRT_2 - 1.0
}

fn closed_form_admissible(r: f64, eps: f64) -> bool {
    let s = (1.0 - r * r).sqrt();
    let bound = eps * (0.5 * r.min(s).acos()).tan();
    (s / r).min(r / s) > bound
}

fn empirical_interval(eps: f64) -> (f64, f64) {
    const STEPS: usize = 20_000;
    let rs: Vec<f64> = (1..=STEPS).map(|i| FRAC_1_SQRT_2 * i as f64 / STEPS as f64).collect();
    let ok: Vec<bool> = rs.iter().map(|&r| closed_form_admissible(r, eps)).collect();
    let lo = ok.iter().position(|&b| b).map(|i| rs[i]).unwrap_or(f64::NAN);
    let hi = ok.iter().rposition(|&b| b).map(|i| rs[i]).unwrap_or(f64::NAN);
    (lo, hi)
}

fn epsilon_margins(
    lambdas: &[Vec<f64>],
    eps: f64,
    radius: f64,
    convention: RadiusConvention,
) -> EpsilonMargins {
    let bound = eps * (0.5 * radius).tan();
    let mut m1 = f64::INFINITY;
    let mut rest = f64::INFINITY;
    for l in lambdas {
        // λ₁ is the single negative eigenvalue for this orientation
        m1 = m1.min(l[0].abs() - bound);
        for x in &l[1..] {
            rest = rest.min(x.abs() - bound);
        }
    }
    EpsilonMargins { convention, radius, bound, margin_lambda_1: m1, margin_lambda_rest: rest }
}

/// Builds M_r for r at the midpoint of (0, 1/√2] ∩ J_ε and checks the
/// ε-inequality at every node of a `nodes`-per-axis grid.
pub fn counterexample_family(eps: f64, n: usize, nodes: usize) -> Result<CounterexampleReport> {
    if !(eps > 0.0 && eps < epsilon_upper()) {
        return Err(GeometryError::Domain(format!("epsilon must lie in (0, √2 − 1), got {eps}")));
    }
    let j = (eps / (1.0 - eps), 1.0 / (1.0 + eps));
    let i_interval = (0.0, FRAC_1_SQRT_2);
    let lo = j.0.max(i_interval.0);
    let hi = j.1.min(i_interval.1);
    if !(lo < hi) {
        return Err(GeometryError::DegenerateConfiguration("I ∩ J_ε is empty".into()));
    }
    let r = 0.5 * (lo + hi);
    let imm = make_clifford(n, r)?;
    let grid = QuadratureGrid::new(imm.axes(), nodes, QuadratureRule::Auto)?;
    let lambdas = map_grid(&grid, |u| PointGeometry::new(&imm, u)?.principal_curvatures())?;
    let lemma_r = lemma_radius_clifford(r)?;
    let lemma = epsilon_margins(&lambdas, eps, lemma_r, RadiusConvention::LemmaEmptyBall);
    let samples = sample_points(&imm, &grid)?;
    let enclosing_cap = cap_for_convention(&samples, RadiusConvention::EnclosingCap, CAP_SEED)?;
    let enclosing = epsilon_margins(&lambdas, eps, enclosing_cap.radius, RadiusConvention::EnclosingCap);
    let (l1, l2) = clifford_principal_curvatures(r, n)?;
    Ok(CounterexampleReport {
        epsilon: eps,
        n,
        r,
        s: (1.0 - r * r).sqrt(),
        j_epsilon: j,
        i_interval,
        intersection: (lo, hi),
        empirical_interval: empirical_interval(eps),
        lambda: (l1, l2),
        margins_positive: lemma.positive(),
        lemma,
        enclosing,
        euler_characteristic: euler_characteristic(&imm)?,
        nodes: lambdas.len(),
    })
}
