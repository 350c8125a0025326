//! Built-in hypersurface families.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector};

use super::chart::HypersphericalChart;
use super::{normal_from_frame, FirstDerivFn, ParametricImmersion, PointFn, SecondDerivFn, Topology};
use crate::error::{GeometryError, Result};
use crate::sphere::SpherePoint;
use crate::structures::householder_complement;

/// Product hypersurface M_r = S¹(r) × S^{n-1}(s), s = √(1 - r²), in S^{n+1}.
///
/// Chart (θ, φ_1, …, φ_{n-1}) ↦ (r cos θ, r sin θ, s ω(φ)). The orientation is
/// chosen so that η = (s/r · x, -r/s · y), which gives principal curvatures
/// -s/r (once) and r/s (n-1 times).
pub fn make_clifford(n: usize, r: f64) -> Result<ParametricImmersion> {
    if n < 2 {
        return Err(GeometryError::Domain(format!("clifford hypersurface needs n >= 2, got {n}")));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(GeometryError::Domain(format!("clifford radius must lie in (0, 1), got {r}")));
    }
    let s = (1.0 - r * r).sqrt();
    let dim = n + 2;
    let chart = Arc::new(HypersphericalChart::new(n - 1));
    let mut axes = vec![super::ChartAxis::periodic(0.0, 2.0 * std::f64::consts::PI)];
    axes.extend(chart.axes());

    let c = chart.clone();
    let eval: PointFn = Arc::new(move |u: &[f64]| {
        let mut out = DVector::zeros(dim);
        out[0] = r * u[0].cos();
        out[1] = r * u[0].sin();
        out.rows_mut(2, n).copy_from(&(c.value(&u[1..]) * s));
        out
    });
    let c = chart.clone();
    let d1: FirstDerivFn = Arc::new(move |u: &[f64]| {
        let mut out = Vec::with_capacity(n);
        let mut dtheta = DVector::zeros(dim);
        dtheta[0] = -r * u[0].sin();
        dtheta[1] = r * u[0].cos();
        out.push(dtheta);
        for d in c.first(&u[1..]) {
            let mut v = DVector::zeros(dim);
            v.rows_mut(2, n).copy_from(&(d * s));
            out.push(v);
        }
        out
    });
    let c = chart;
    let d2: SecondDerivFn = Arc::new(move |u: &[f64]| {
        let inner = c.second(&u[1..]);
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut v = DVector::zeros(dim);
                        if i == 0 && j == 0 {
                            v[0] = -r * u[0].cos();
                            v[1] = -r * u[0].sin();
                        } else if i > 0 && j > 0 {
                            v.rows_mut(2, n).copy_from(&(&inner[i - 1][j - 1] * s));
                        }
                        v
                    })
                    .collect()
            })
            .collect()
    });

    let topology = if n == 2 { Topology::Torus } else { Topology::Other { euler: 0 } };
    let imm = ParametricImmersion::new(format!("clifford(n={n}, r={r})"), dim, axes, eval)
        .with_first_derivatives(d1)
        .with_second_derivatives(d2)
        .with_topology(topology);

    // pick the sign that reproduces η = (s/r x, -r/s y) at a reference point
    let u_ref = reference_point(imm.axes());
    let p = imm.eval(&u_ref);
    let mut expected = p.clone();
    for (k, x) in expected.iter_mut().enumerate() {
        *x *= if k < 2 { s / r } else { -r / s };
    }
    let eta = normal_from_frame(&imm.partials(&u_ref), &p, 1.0)
        .ok_or_else(|| GeometryError::Domain("degenerate clifford chart".into()))?;
    let sign = if eta.dot(&expected) >= 0.0 { 1.0 } else { -1.0 };
    Ok(imm.with_orientation(sign))
}

fn reference_point(axes: &[super::ChartAxis]) -> Vec<f64> {
    axes.iter()
        .enumerate()
        .map(|(k, a)| a.lo + a.length() * (0.31 + 0.07 * k as f64))
        .collect()
}

/// ω : chart → unit sphere of p₀^⊥, oriented so that det[∂ω, ω, p₀] > 0.
struct CenteredChart {
    center: DVector<f64>,
    basis: DMatrix<f64>,
    chart: HypersphericalChart,
}

impl CenteredChart {
    fn new(center: &SpherePoint, n: usize) -> Result<Self> {
        if center.dim() != n + 2 {
            return Err(GeometryError::DimensionMismatch { expected: n + 2, got: center.dim() });
        }
        let mut basis = DMatrix::from_columns(&householder_complement(center.coords()));
        let chart = HypersphericalChart::new(n);
        let mut out = Self { center: center.coords().clone(), basis: basis.clone(), chart };
        let u = reference_point(&out.chart.axes());
        let mut cols = out.omega_first(&u);
        cols.push(out.omega(&u));
        cols.push(out.center.clone());
        if DMatrix::from_columns(&cols).determinant() < 0.0 {
            let last = basis.ncols() - 1;
            basis.column_mut(last).neg_mut();
            out.basis = basis;
        }
        Ok(out)
    }

    fn axes(&self) -> Vec<super::ChartAxis> {
        self.chart.axes()
    }

    fn omega(&self, u: &[f64]) -> DVector<f64> {
        &self.basis * self.chart.value(u)
    }

    fn omega_first(&self, u: &[f64]) -> Vec<DVector<f64>> {
        self.chart.first(u).iter().map(|d| &self.basis * d).collect()
    }

    fn omega_second(&self, u: &[f64]) -> Vec<Vec<DVector<f64>>> {
        self.chart
            .second(u)
            .iter()
            .map(|row| row.iter().map(|d| &self.basis * d).collect())
            .collect()
    }
}

/// Geodesic sphere u ↦ cos ρ p₀ + sin ρ ω(u) of radius ρ about p₀. With
/// orientation_sign +1 the normal points away from p₀.
pub fn make_geodesic_sphere(center: &SpherePoint, rho: f64, n: usize) -> Result<ParametricImmersion> {
    if n < 1 {
        return Err(GeometryError::Domain("geodesic sphere needs n >= 1".into()));
    }
    if !(rho > 0.0 && rho < std::f64::consts::PI) {
        return Err(GeometryError::Domain(format!("radius must lie in (0, π), got {rho}")));
    }
    let chart = Arc::new(CenteredChart::new(center, n)?);
    let (c, s) = (rho.cos(), rho.sin());
    let ch = chart.clone();
    let eval: PointFn = Arc::new(move |u: &[f64]| &ch.center * c + ch.omega(u) * s);
    let ch = chart.clone();
    let d1: FirstDerivFn = Arc::new(move |u: &[f64]| ch.omega_first(u).into_iter().map(|d| d * s).collect());
    let ch = chart.clone();
    let d2: SecondDerivFn = Arc::new(move |u: &[f64]| {
        ch.omega_second(u)
            .into_iter()
            .map(|row| row.into_iter().map(|d| d * s).collect())
            .collect()
    });
    Ok(ParametricImmersion::new(
        format!("geodesic_sphere(n={n}, rho={rho})"),
        n + 2,
        chart.axes(),
        eval,
    )
    .with_first_derivatives(d1)
    .with_second_derivatives(d2)
    .with_topology(Topology::Sphere)
    .with_center(Some(center.clone())))
}

/// Radially perturbed geodesic sphere with radius ρ(u) = ρ + a·Re((ω₁ + iω₂)^k),
/// ω₁, ω₂ the second and third hyperspherical coordinates of ω.
pub fn make_perturbed_sphere(
    center: &SpherePoint,
    rho: f64,
    amplitude: f64,
    frequency: u32,
    n: usize,
) -> Result<ParametricImmersion> {
    if n < 2 {
        return Err(GeometryError::Domain("perturbed sphere needs n >= 2".into()));
    }
    if !(amplitude >= 0.0) {
        return Err(GeometryError::Domain(format!("amplitude must be >= 0, got {amplitude}")));
    }
    if !(rho - amplitude > 0.0 && rho + amplitude < FRAC_PI_2) {
        return Err(GeometryError::Domain(format!(
            "need 0 < rho - a and rho + a < π/2, got rho = {rho}, a = {amplitude}"
        )));
    }
    let chart = Arc::new(CenteredChart::new(center, n)?);
    let k = frequency;
    let a = amplitude;

    // radius function and its chart derivatives
    let radius = {
        let chart = chart.clone();
        move |u: &[f64]| -> (f64, Vec<f64>, Vec<Vec<f64>>) {
            let x = chart.chart.value(u);
            let dx = chart.chart.first(u);
            let ddx = chart.chart.second(u);
            let z = Complex::new(x[1], x[2]);
            let dz: Vec<Complex<f64>> = dx.iter().map(|d| Complex::new(d[1], d[2])).collect();
            let kf = k as f64;
            let pow = |e: i64| if e >= 0 { z.powu(e as u32) } else { Complex::new(0.0, 0.0) };
            let zk = pow(k as i64);
            let zk1 = pow(k as i64 - 1) * kf;
            let zk2 = pow(k as i64 - 2) * (kf * (kf - 1.0));
            let value = rho + a * zk.re;
            let grad: Vec<f64> = dz.iter().map(|dzi| a * (zk1 * dzi).re).collect();
            let hess = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let dzij = Complex::new(ddx[i][j][1], ddx[i][j][2]);
                            a * (zk2 * dz[i] * dz[j] + zk1 * dzij).re
                        })
                        .collect()
                })
                .collect();
            (value, grad, hess)
        }
    };
    let radius = Arc::new(radius);

    let (ch, rf) = (chart.clone(), radius.clone());
    let eval: PointFn = Arc::new(move |u: &[f64]| {
        let (r, _, _) = rf(u);
        &ch.center * r.cos() + ch.omega(u) * r.sin()
    });
    let (ch, rf) = (chart.clone(), radius.clone());
    let d1: FirstDerivFn = Arc::new(move |u: &[f64]| {
        let (r, grad, _) = rf(u);
        let omega = ch.omega(u);
        let radial = &ch.center * (-r.sin()) + &omega * r.cos();
        ch.omega_first(u)
            .into_iter()
            .zip(grad.iter())
            .map(|(dw, g)| &radial * *g + dw * r.sin())
            .collect()
    });
    let (ch, rf) = (chart.clone(), radius.clone());
    let d2: SecondDerivFn = Arc::new(move |u: &[f64]| {
        let (r, grad, hess) = rf(u);
        let (sr, cr) = (r.sin(), r.cos());
        let omega = ch.omega(u);
        let dw = ch.omega_first(u);
        let ddw = ch.omega_second(u);
        let radial = &ch.center * (-sr) + &omega * cr;
        let radial2 = &ch.center * (-cr) - &omega * sr;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        &radial2 * (grad[i] * grad[j])
                            + &radial * hess[i][j]
                            + (&dw[i] * grad[j] + &dw[j] * grad[i]) * cr
                            + &ddw[i][j] * sr
                    })
                    .collect()
            })
            .collect()
    });
    Ok(ParametricImmersion::new(
        format!("perturbed_sphere(n={n}, rho={rho}, a={a}, k={k})"),
        n + 2,
        chart.axes(),
        eval,
    )
    .with_first_derivatives(d1)
    .with_second_derivatives(d2)
    .with_topology(Topology::Sphere)
    .with_center(Some(center.clone())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::geodesic_distance;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn north(dim: usize) -> SpherePoint {
        SpherePoint::basis(dim, dim - 1)
    }

    fn sample_points(imm: &ParametricImmersion, count: usize) -> Vec<Vec<f64>> {
        let n = imm.n();
        (0..count)
            .map(|i| {
                imm.axes()
                    .iter()
                    .enumerate()
                    .map(|(k, a)| {
                        let frac = ((i * (7 + 3 * k) + 3 * k + 1) % count) as f64 / count as f64;
                        a.lo + a.length() * (0.02 + 0.96 * frac)
                    })
                    .take(n)
                    .collect()
            })
            .collect()
    }

    #[test]
    fn clifford_component_norms() {
        for &r in &[FRAC_1_SQRT_2, 0.6] {
            let imm = make_clifford(2, r).unwrap();
            let s = (1.0 - r * r).sqrt();
            for u in sample_points(&imm, 50) {
                let p = imm.eval(&u);
                assert_abs_diff_eq!(p.rows(0, 2).norm(), r, epsilon = 1e-14);
                assert_abs_diff_eq!(p.rows(2, 2).norm(), s, epsilon = 1e-14);
                assert_abs_diff_eq!(p.norm(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn clifford_rejects_bad_radius() {
        assert!(make_clifford(2, 0.0).is_err());
        assert!(make_clifford(2, 1.0).is_err());
        assert!(make_clifford(1, 0.5).is_err());
    }

    #[test]
    fn clifford_metric_is_diagonal() {
        let r = 0.6;
        let imm = make_clifford(2, r).unwrap();
        let frame = imm.tangent_frame(&[0.4, 1.3]).unwrap();
        assert_abs_diff_eq!(frame.metric[(0, 0)], r * r, epsilon = 1e-15);
        assert_abs_diff_eq!(frame.metric[(1, 1)], 1.0 - r * r, epsilon = 1e-15);
        assert_abs_diff_eq!(frame.metric[(0, 1)], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn clifford_normal_matches_product_normal() {
        let r = FRAC_1_SQRT_2;
        let s = (1.0 - r * r).sqrt();
        let imm = make_clifford(2, r).unwrap();
        for i in 0..32 {
            for j in 0..32 {
                let u = [2.0 * PI * i as f64 / 32.0, 2.0 * PI * j as f64 / 32.0];
                let eta = imm.unit_normal(&u).unwrap();
                let p = imm.eval(&u);
                let expected = DVector::from_column_slice(&[s * p[0] / r, s * p[1] / r, -r * p[2] / s, -r * p[3] / s]);
                assert!((eta.vec() - expected).amax() < 1e-10);
                assert_abs_diff_eq!(eta.vec().dot(&p), 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn geodesic_sphere_distance_and_normal() {
        let p0 = north(4);
        let rho = 0.5;
        let imm = make_geodesic_sphere(&p0, rho, 2).unwrap();
        for u in sample_points(&imm, 40) {
            let p = imm.point(&u).unwrap();
            assert_abs_diff_eq!(geodesic_distance(&p, &p0), rho, epsilon = 1e-12);
            let eta = imm.unit_normal(&u).unwrap();
            assert_abs_diff_eq!(eta.vec().dot(p0.coords()), -rho.sin(), epsilon = 1e-12);
            let omega = (p.coords() - p0.coords() * rho.cos()) / rho.sin();
            let expected = p0.coords() * (-rho.sin()) + omega * rho.cos();
            assert!((eta.vec() - expected).amax() < 1e-12);
        }
        let flipped = imm.clone().flipped();
        let u = [1.0, 2.0];
        assert_eq!(flipped.unit_normal(&u).unwrap().vec(), &-imm.unit_normal(&u).unwrap().vec());
    }

    #[test]
    fn great_sphere_is_equatorial() {
        let p0 = north(4);
        let imm = make_geodesic_sphere(&p0, FRAC_PI_2, 2).unwrap();
        for u in sample_points(&imm, 10) {
            assert_abs_diff_eq!(imm.eval(&u).dot(p0.coords()), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn geodesic_sphere_metric_is_scaled_round_metric() {
        let p0 = SpherePoint::normalize(DVector::from_column_slice(&[0.1, -0.3, 0.5, 0.8])).unwrap();
        let rho = 0.9;
        let imm = make_geodesic_sphere(&p0, rho, 2).unwrap();
        let (phi, theta) = (0.8, 2.5);
        let g = imm.tangent_frame(&[phi, theta]).unwrap().metric;
        let s2 = rho.sin().powi(2);
        assert_abs_diff_eq!(g[(0, 0)], s2, epsilon = 1e-14);
        assert_abs_diff_eq!(g[(1, 1)], s2 * phi.sin().powi(2), epsilon = 1e-14);
        assert_abs_diff_eq!(g[(0, 1)], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn geodesic_sphere_higher_dimension() {
        let p0 = north(5);
        let imm = make_geodesic_sphere(&p0, 0.7, 3).unwrap();
        for u in sample_points(&imm, 20) {
            let p = imm.point(&u).unwrap();
            assert_abs_diff_eq!(geodesic_distance(&p, &p0), 0.7, epsilon = 1e-12);
            assert!(imm.unit_normal(&u).unwrap().vec().dot(p0.coords()) < 0.0);
        }
    }

    #[test]
    fn perturbed_sphere_zero_amplitude_matches_geodesic_sphere() {
        let p0 = north(4);
        let a = make_perturbed_sphere(&p0, 0.5, 0.0, 3, 2).unwrap();
        let b = make_geodesic_sphere(&p0, 0.5, 2).unwrap();
        for u in sample_points(&a, 30) {
            assert!((a.eval(&u) - b.eval(&u)).amax() < 1e-15);
            assert!((a.unit_normal(&u).unwrap().vec() - b.unit_normal(&u).unwrap().vec()).amax() < 1e-14);
        }
    }

    #[test]
    fn perturbed_sphere_stays_within_band() {
        let p0 = north(4);
        let imm = make_perturbed_sphere(&p0, 0.5, 0.05, 3, 2).unwrap();
        for u in sample_points(&imm, 200) {
            let p = imm.point(&u).unwrap();
            let d = geodesic_distance(&p, &p0);
            assert!((0.45 - 1e-12..=0.55 + 1e-12).contains(&d));
        }
    }

    #[test]
    fn perturbed_sphere_validates() {
        let p0 = north(4);
        assert!(make_perturbed_sphere(&p0, 1.5, 0.1, 3, 2).is_err());
        assert!(make_perturbed_sphere(&p0, 0.5, -0.1, 3, 2).is_err());
        assert!(make_perturbed_sphere(&p0, 0.05, 0.1, 3, 2).is_err());
    }

    #[test]
    fn perturbed_sphere_derivatives_match_differences() {
        let p0 = SpherePoint::normalize(DVector::from_column_slice(&[0.3, 0.1, -0.2, 0.9])).unwrap();
        let analytic = make_perturbed_sphere(&p0, 0.6, 0.08, 3, 2).unwrap();
        let numeric = analytic.clone().without_analytic_derivatives();
        for u in sample_points(&analytic, 10) {
            let a1 = analytic.partials(&u);
            let n1 = numeric.partials(&u);
            for (x, y) in a1.iter().zip(n1.iter()) {
                assert!((x - y).amax() < 1e-9);
            }
            let a2 = analytic.second_partials(&u);
            let n2 = numeric.second_partials(&u);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((&a2[i][j] - &n2[i][j]).amax() < 1e-6);
                }
            }
        }
    }
}
