//! Central (Beltrami) projection of the open upper hemisphere, the shrinking
//! maps C_t = B⁻¹ ∘ (x ↦ tx) ∘ B, and the shrink-then-certify pipeline for
//! hypersurfaces with nonvanishing Gauss-Kronecker curvature.
//!
//! The hemisphere is centred at p₀ = e_{n+2}, the last coordinate axis.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::curvature::{map_grid, PointGeometry};
use crate::error::{GeometryError, Result};
use crate::rigidity::{cap_for_convention, certify_with_cap, CapResult, CertificateReport, RadiusConvention, Verdict, CAP_SEED};
use crate::rigidity::sample_points;
use crate::sphere::{SpherePoint, TangentVector};
use crate::surfaces::{AmbientMap, ParametricImmersion, QuadratureGrid};

/// Smallest admissible height p_{n+2} for the projection.
pub const HEMISPHERE_TOL: f64 = 1e-10;

fn height(p: &DVector<f64>) -> f64 {
    p[p.len() - 1]
}

fn check_hemisphere(p: &SpherePoint) -> Result<()> {
    if height(p.coords()) > HEMISPHERE_TOL {
        Ok(())
    } else {
        Err(GeometryError::OutsideHemisphere)
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(GeometryError::Domain(format!("t must be positive, got {t}")))
    }
}

/// North pole e_{n+2} of S^{n+1} ⊂ ℝ^{n+2}.
pub fn north_pole(ambient_dim: usize) -> SpherePoint {
    SpherePoint::basis(ambient_dim, ambient_dim - 1)
}

/// B(p) = (p₁, …, p_{n+1}) / p_{n+2}.
pub fn beltrami(p: &SpherePoint) -> Result<DVector<f64>> {
    check_hemisphere(p)?;
    let d = p.dim();
    Ok(p.coords().rows(0, d - 1) / p.coords()[d - 1])
}

/// B⁻¹(x) = (x, 1) / ‖(x, 1)‖.
pub fn beltrami_inverse(x: &DVector<f64>) -> Result<SpherePoint> {
    let mut v = x.clone().insert_row(x.len(), 1.0);
    let n = v.norm();
    if !n.is_finite() {
        return Err(GeometryError::NonFinite);
    }
    v /= n;
    Ok(SpherePoint::new_unchecked(v))
}

/// m_t(p) = (p₁, …, p_{n+1}, p_{n+2}/t).
fn m_t(p: &DVector<f64>, t: f64) -> DVector<f64> {
    let mut m = p.clone();
    let d = m.len();
    m[d - 1] /= t;
    m
}

/// C_t(p) = m_t(p) / ‖m_t(p)‖.
pub fn c_t(p: &SpherePoint, t: f64) -> Result<SpherePoint> {
    check_hemisphere(p)?;
    check_t(t)?;
    Ok(SpherePoint::new_unchecked(m_t(p.coords(), t).normalize()))
}

fn dc_raw(p: &DVector<f64>, v: &DVector<f64>, t: f64) -> DVector<f64> {
    let m = m_t(p, t).norm();
    let d = p.len();
    let (a, b) = (p[d - 1], v[d - 1]);
    let k = (t - 1.0) * b / (t * t * m * m);
    let mut out = p * (k * (t + 1.0) * a) + v;
    out[d - 1] -= k * t;
    out / m
}

/// DC_t(p)·v = (1/‖m_t‖) { (t−1)<v,p₀> / (t²‖m_t‖²) · [(t+1)<p,p₀> p − t p₀] + v }.
pub fn dc_t(v: &TangentVector, t: f64) -> Result<TangentVector> {
    let q = c_t(v.base(), t)?;
    Ok(TangentVector::new_unchecked(q, dc_raw(v.base().coords(), v.vec(), t)))
}

/// η_t(C_t(p)) = [η + (t−1)<η,p₀> p₀] / √(1 + (t²−1)<η,p₀>²), for η = η(p).
pub fn eta_t(eta: &TangentVector, t: f64) -> Result<TangentVector> {
    let q = c_t(eta.base(), t)?;
    let e = height(eta.vec());
    let mut out = eta.vec().clone();
    let d = out.len();
    out[d - 1] += (t - 1.0) * e;
    out /= (1.0 + (t * t - 1.0) * e * e).sqrt();
    Ok(TangentVector::new_unchecked(q, out))
}

/// F_t(p, v) for a unit tangent v at p and the normal η(p).
pub fn f_factor(v: &TangentVector, eta: &TangentVector, t: f64) -> Result<f64> {
    check_hemisphere(v.base())?;
    check_t(t)?;
    let a = height(v.base().coords());
    let b = height(v.vec());
    let e = height(eta.vec());
    let s = 1.0 - t * t;
    let num = (s * a * a + t * t).powf(1.5);
    let den = t * (s * (a * a + b * b) + t * t) * (1.0 + (t * t - 1.0) * e * e).sqrt();
    Ok(num / den)
}

/// ‖DC_t(p)·v‖² for a unit tangent v, in closed form.
pub fn w_norm_squared(v: &TangentVector, t: f64) -> Result<f64> {
    check_hemisphere(v.base())?;
    check_t(t)?;
    let m2 = m_t(v.base().coords(), t).norm_squared();
    let a = height(v.base().coords());
    let b = height(v.vec());
    Ok(((1.0 - t * t) * (a * a + b * b) + t * t) / (t * t * m2 * m2))
}

/// K = h^{3/2} / (6√2).
pub fn k_bound(h: f64) -> Result<f64> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(GeometryError::Domain(format!("h must lie in (0, 1], got {h}")));
    }
    Ok(h.powf(1.5) / (6.0 * 2f64.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HemisphereConstants {
    /// Lower bound for <x, p₀>².
    pub h: f64,
    /// Satisfies <η(x), p₀>² < 1 − eps².
    pub eps: f64,
    pub min_height: f64,
    pub max_abs_normal_height: f64,
}

const CONSTANT_SAFETY: f64 = 1e-9;

pub fn hemisphere_constants(imm: &ParametricImmersion, grid: &QuadratureGrid) -> Result<HemisphereConstants> {
    let pairs = map_grid(grid, |u| {
        let eta = imm.unit_normal(u)?;
        Ok((height(eta.base().coords()), height(eta.vec()).abs()))
    })?;
    let min_height = pairs.iter().map(|x| x.0).fold(f64::INFINITY, f64::min);
    let max_abs_normal_height = pairs.iter().map(|x| x.1).fold(0.0, f64::max);
    if !(min_height > HEMISPHERE_TOL) {
        return Err(GeometryError::NotInHemisphere);
    }
    let h = min_height * min_height - CONSTANT_SAFETY;
    let eps = (1.0 - max_abs_normal_height * max_abs_normal_height).max(0.0).sqrt() - CONSTANT_SAFETY;
    if !(h > 0.0 && eps > 0.0) {
        return Err(GeometryError::NotInHemisphere);
    }
    Ok(HemisphereConstants { h, eps, min_height, max_abs_normal_height })
}

/// C_t as an ambient map, for composing with immersions.
#[derive(Debug, Clone, Copy)]
pub struct CtMap {
    pub t: f64,
}

impl AmbientMap for CtMap {
    fn map_point(&self, x: &DVector<f64>) -> DVector<f64> {
        m_t(x, self.t).normalize()
    }

    fn differential(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        dc_raw(x, v, self.t)
    }
}

/// The image hypersurface C_t ∘ f; its unit normal is η_t.
pub fn shrink(imm: &ParametricImmersion, t: f64) -> ParametricImmersion {
    imm.compose(format!("C_{t} o {}", imm.name()), Arc::new(CtMap { t }))
}

/// Orthogonal matrix of the rotation in the plane of a and b taking a to b.
pub fn rotation_taking(a: &DVector<f64>, b: &DVector<f64>) -> DMatrix<f64> {
    let d = a.len();
    let c = a.dot(b);
    if c < -1.0 + 1e-12 {
        // a = −b: a half turn in a plane containing b
        let k = (0..d).find(|&k| (b[k].abs() - 1.0).abs() > 1e-6).unwrap_or(0);
        let e = DVector::from_fn(d, |i, _| if i == k { 1.0 } else { 0.0 });
        let w = (&e - b * e.dot(b)).normalize();
        return DMatrix::identity(d, d) - b * b.transpose() * 2.0 - &w * w.transpose() * 2.0;
    }
    let s = a + b;
    DMatrix::identity(d, d) - &s * s.transpose() / (1.0 + c) + b * a.transpose() * 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XiaOptions {
    /// Required excess of min |μ| over 1, and floor for min |det A|.
    pub margin: f64,
    /// Margin passed to the final certificate.
    pub delta: f64,
}

impl Default for XiaOptions {
    fn default() -> Self {
        Self { margin: 1e-3, delta: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    pub stage: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XiaReport {
    pub certified: bool,
    pub failed_stage: Option<u8>,
    pub failure: Option<String>,
    pub stages: Vec<StageReport>,
    pub min_abs_gauss_kronecker: f64,
    pub cap_center: Option<Vec<f64>>,
    pub cap_radius: Option<f64>,
    /// +1 or −1 when all principal curvatures share a sign, 0 otherwise.
    pub curvature_sign: i8,
    pub orientation_flipped: bool,
    pub constants: Option<HemisphereConstants>,
    pub k: Option<f64>,
    pub t_star: Option<f64>,
    pub min_abs_mu_at_t_star: Option<f64>,
    /// t at which μ ≥ (K/t)λ was checked, and the smallest slack found.
    pub bound_t: Option<f64>,
    pub min_bound_slack: Option<f64>,
    pub certificate: Option<CertificateReport>,
}

const T_SEARCH_START: f64 = 0.7;
const T_MIN: f64 = 1e-6;
const BISECTIONS: usize = 60;

fn min_abs_curvature(imm: &ParametricImmersion, grid: &QuadratureGrid) -> Result<f64> {
    let values = map_grid(grid, |u| {
        let lam = PointGeometry::new(imm, u)?.principal_curvatures()?;
        Ok(lam.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min))
    })?;
    Ok(values.into_iter().fold(f64::INFINITY, f64::min))
}

/// Largest t ∈ (0, 1] (to bisection resolution on log t) with
/// min |μ_{j,t}| > 1 + margin, and that minimum.
fn search_t(imm: &ParametricImmersion, grid: &QuadratureGrid, margin: f64) -> Result<(f64, f64)> {
    let target = 1.0 + margin;
    let at_one = min_abs_curvature(imm, grid)?;
    if at_one > target {
        return Ok((1.0, at_one));
    }
    let mut hi = 1.0;
    let mut lo = T_SEARCH_START;
    let mut lo_val = min_abs_curvature(&shrink(imm, lo), grid)?;
    while lo_val <= target {
        hi = lo;
        lo *= 0.5;
        if lo < T_MIN {
            return Err(GeometryError::NoAdmissibleT);
        }
        lo_val = min_abs_curvature(&shrink(imm, lo), grid)?;
    }
    for _ in 0..BISECTIONS {
        let mid = (lo.ln() * 0.5 + hi.ln() * 0.5).exp();
        if !(mid > lo && mid < hi) {
            break;
        }
        let v = min_abs_curvature(&shrink(imm, mid), grid)?;
        if v > target {
            lo = mid;
            lo_val = v;
        } else {
            hi = mid;
        }
    }
    Ok((lo, lo_val))
}

/// Smallest μ_j − (K/t)λ_j over nodes and j, both lists ascending.
fn bound_slack(imm: &ParametricImmersion, grid: &QuadratureGrid, t: f64, k: f64) -> Result<f64> {
    let image = shrink(imm, t);
    let slack = map_grid(grid, |u| {
        let lam = PointGeometry::new(imm, u)?.principal_curvatures()?;
        let mu = PointGeometry::new(&image, u)?.principal_curvatures()?;
        Ok(lam.iter().zip(&mu).map(|(l, m)| m - k / t * l).fold(f64::INFINITY, f64::min))
    })?;
    Ok(slack.into_iter().fold(f64::INFINITY, f64::min))
}

fn error_name(e: &GeometryError) -> String {
    match e {
        GeometryError::GkVanishes(_) => "GKVanishes".into(),
        GeometryError::NotInHemisphere => "NotInHemisphere".into(),
        GeometryError::MixedCurvatureSigns => "MixedCurvatureSigns".into(),
        GeometryError::NoAdmissibleT => "NoAdmissibleT".into(),
        other => other.to_string(),
    }
}

/// Runs the six stages: (1) min |det A| > margin, (2) containment in an open
/// hemisphere, which is then rotated onto the upper one, (3) a common sign
/// of all principal curvatures, (4) search for the shrink parameter t*,
/// (5) the lower bound μ ≥ (K/t)λ and (6) the certificate of the shrunk
/// surface with the hemisphere cap (R = π/2). Stages 1 to 3 are all
/// evaluated; the first failing stage is reported.
pub fn xia_certify(imm: &ParametricImmersion, grid: &QuadratureGrid, options: XiaOptions) -> Result<XiaReport> {
    if imm.n() < 2 {
        return Err(GeometryError::Domain("need n >= 2".into()));
    }
    let mut report = XiaReport {
        certified: false,
        failed_stage: None,
        failure: None,
        stages: Vec::new(),
        min_abs_gauss_kronecker: f64::NAN,
        cap_center: None,
        cap_radius: None,
        curvature_sign: 0,
        orientation_flipped: false,
        constants: None,
        k: None,
        t_star: None,
        min_abs_mu_at_t_star: None,
        bound_t: None,
        min_bound_slack: None,
        certificate: None,
    };
    let fail = |report: &mut XiaReport, stage: u8, err: GeometryError| {
        if report.failed_stage.is_none() {
            report.failed_stage = Some(stage);
            report.failure = Some(error_name(&err));
        }
    };

    // stages 1 and 3 share the per-node curvature data
    let data = map_grid(grid, |u| {
        let geo = PointGeometry::new(imm, u)?;
        Ok((geo.shape_operator()?.determinant(), geo.principal_curvatures()?))
    })?;
    let min_gk = data.iter().map(|d| d.0.abs()).fold(f64::INFINITY, f64::min);
    report.min_abs_gauss_kronecker = min_gk;
    let gk_ok = min_gk > options.margin;
    report.stages.push(StageReport {
        stage: 1,
        name: "gauss_kronecker",
        passed: gk_ok,
        detail: format!("min |det A| = {min_gk:.6e}"),
    });
    if !gk_ok {
        fail(&mut report, 1, GeometryError::GkVanishes(min_gk));
    }

    let samples = sample_points(imm, grid)?;
    let cap = cap_for_convention(&samples, RadiusConvention::EnclosingCap, CAP_SEED)?;
    let in_hemisphere = cap.radius < FRAC_PI_2 - 1e-9;
    report.cap_center = Some(cap.center.coords().iter().copied().collect());
    report.cap_radius = Some(cap.radius);
    report.stages.push(StageReport {
        stage: 2,
        name: "hemisphere",
        passed: in_hemisphere,
        detail: format!("enclosing cap radius {:.6}", cap.radius),
    });
    if !in_hemisphere {
        fail(&mut report, 2, GeometryError::NotInHemisphere);
    }

    let all_pos = data.iter().all(|d| d.1.iter().all(|&l| l > 0.0));
    let all_neg = data.iter().all(|d| d.1.iter().all(|&l| l < 0.0));
    report.curvature_sign = if all_pos { 1 } else if all_neg { -1 } else { 0 };
    report.stages.push(StageReport {
        stage: 3,
        name: "curvature_sign",
        passed: all_pos || all_neg,
        detail: format!("sign {}", report.curvature_sign),
    });
    if !(all_pos || all_neg) {
        fail(&mut report, 3, GeometryError::MixedCurvatureSigns);
    }
    if report.failed_stage.is_some() {
        return Ok(report);
    }

    let dim = imm.ambient_dim();
    let p0 = north_pole(dim);
    let rotation = rotation_taking(cap.center.coords(), p0.coords());
    let mut surface = imm.rotated(&rotation);
    if all_neg {
        surface = surface.flipped();
        report.orientation_flipped = true;
    }
    let constants = hemisphere_constants(&surface, grid)?;
    let k = k_bound(constants.h)?;
    report.constants = Some(constants);
    report.k = Some(k);

    match search_t(&surface, grid, options.margin) {
        Ok((t, mu)) => {
            report.t_star = Some(t);
            report.min_abs_mu_at_t_star = Some(mu);
            report.stages.push(StageReport {
                stage: 4,
                name: "shrink_search",
                passed: true,
                detail: format!("t* = {t:.9}, min |mu| = {mu:.9}"),
            });
        }
        Err(GeometryError::NoAdmissibleT) => {
            report.stages.push(StageReport {
                stage: 4,
                name: "shrink_search",
                passed: false,
                detail: "no t in (0, 1] reaches min |mu| > 1 + margin".into(),
            });
            fail(&mut report, 4, GeometryError::NoAdmissibleT);
            return Ok(report);
        }
        Err(e) => return Err(e),
    }
    let t_star = report.t_star.expect("set above");

    let bound_t = if t_star < FRAC_1_SQRT_2 { t_star } else { 0.5 };
    let slack = bound_slack(&surface, grid, bound_t, k)?;
    let bound_ok = slack >= -1e-6;
    report.bound_t = Some(bound_t);
    report.min_bound_slack = Some(slack);
    report.stages.push(StageReport {
        stage: 5,
        name: "curvature_bound",
        passed: bound_ok,
        detail: format!("min mu - (K/t) lambda = {slack:.6e} at t = {bound_t:.6}"),
    });
    if !bound_ok {
        fail(&mut report, 5, GeometryError::Domain("curvature lower bound violated".into()));
    }

    let image = shrink(&surface, t_star);
    let hemisphere = CapResult { center: p0, radius: FRAC_PI_2, convention: RadiusConvention::EnclosingCap };
    let cert = certify_with_cap(&image, grid, options.delta, &hemisphere)?;
    let cert_ok = cert.verdict == Verdict::Certified;
    report.stages.push(StageReport {
        stage: 6,
        name: "certificate",
        passed: cert_ok,
        detail: format!(
            "curvature margin {:.6e}, invertibility margin {:.6e}",
            cert.min_margin_curvature, cert.min_margin_invertibility
        ),
    });
    report.certificate = Some(cert);
    if !cert_ok {
        fail(&mut report, 6, GeometryError::Domain("certificate failed".into()));
    }
    report.certified = report.failed_stage.is_none();
    Ok(report)
}
