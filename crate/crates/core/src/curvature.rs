//! Extrinsic geometry of hypersurfaces: shape operator, principal and
//! Gauss-Kronecker curvature, the Gauss map γ = Γ(η), the invariant shape
//! operator α and the translational curvature κ_Γ.
//!
//! Operator matrices act on coefficient vectors in the chart basis ∂_i f, so
//! column j holds the coefficients of the image of ∂_j f.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{GeometryError, Result};
use crate::sphere::{check_non_antipodal, tangent_project, SpherePoint, TangentVector};
use crate::structures::{TranslationStructure, VVector};
use crate::surfaces::{ChartAxis, ParametricImmersion, QuadratureGrid, TangentFrame};

/// First- and second-order data of an immersion at one chart point.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub u: Vec<f64>,
    pub p: SpherePoint,
    pub eta: TangentVector,
    pub frame: TangentFrame,
    /// H_ij = <∂_i ∂_j f, η>.
    pub second_form: DMatrix<f64>,
}

impl PointGeometry {
    pub fn new(imm: &ParametricImmersion, u: &[f64]) -> Result<Self> {
        let frame = imm.tangent_frame(u)?;
        let eta = imm.unit_normal(u)?;
        let d2 = imm.second_partials(u);
        let n = imm.n();
        let mut h = DMatrix::from_fn(n, n, |i, j| d2[i][j].dot(eta.vec()));
        h = (&h + h.transpose()) * 0.5;
        Ok(Self {
            u: u.to_vec(),
            p: eta.base().clone(),
            eta,
            frame,
            second_form: h,
        })
    }

    /// S = g⁻¹H.
    pub fn shape_operator(&self) -> Result<DMatrix<f64>> {
        let chol = self.frame.metric.clone().cholesky().ok_or(GeometryError::EigenSolveFailure)?;
        Ok(chol.solve(&self.second_form))
    }

    /// Eigenvalues of the pencil H w = λ g w, ascending.
    pub fn principal_curvatures(&self) -> Result<Vec<f64>> {
        generalized_eigenvalues(&self.second_form, &self.frame.metric)
    }

    /// Expresses an ambient vector in the chart basis (after projecting onto T_pM).
    pub fn coefficients(&self, w: &DVector<f64>) -> DVector<f64> {
        self.frame.coefficients(w)
    }
}

/// Ascending eigenvalues of the symmetric-definite pencil (a, b).
pub fn generalized_eigenvalues(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Vec<f64>> {
    let chol = b.clone().cholesky().ok_or(GeometryError::EigenSolveFailure)?;
    let l = chol.l();
    let linv = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(l.nrows(), l.ncols()))
        .ok_or(GeometryError::EigenSolveFailure)?;
    let m = &linv * a * linv.transpose();
    let m = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 0).ok_or(GeometryError::EigenSolveFailure)?;
    let mut out: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if out.iter().any(|x| !x.is_finite()) {
        return Err(GeometryError::EigenSolveFailure);
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

pub fn shape_operator(imm: &ParametricImmersion, u: &[f64]) -> Result<DMatrix<f64>> {
    PointGeometry::new(imm, u)?.shape_operator()
}

pub fn principal_curvatures(imm: &ParametricImmersion, u: &[f64]) -> Result<Vec<f64>> {
    PointGeometry::new(imm, u)?.principal_curvatures()
}

/// det A.
pub fn gauss_kronecker(imm: &ParametricImmersion, u: &[f64]) -> Result<f64> {
    Ok(shape_operator(imm, u)?.determinant())
}

/// γ(u) = Γ_{f(u)}(η(u)).
pub fn gauss_map(structure: &dyn TranslationStructure, imm: &ParametricImmersion, u: &[f64]) -> Result<VVector> {
    let eta = imm.unit_normal(u)?;
    if !structure.in_domain(eta.base()) {
        return Err(GeometryError::OutOfDomain);
    }
    structure.apply(&eta)
}

/// Central-difference step along axis `j`, shortened near the ends of a
/// bounded axis so the stencil stays inside the chart.
fn axis_step(axes: &[ChartAxis], u: &[f64], j: usize, h: f64) -> f64 {
    let a = &axes[j];
    if a.periodic {
        h
    } else {
        h.min(0.5 * (u[j] - a.lo)).min(0.5 * (a.hi - u[j]))
    }
}

fn shifted(u: &[f64], j: usize, h: f64) -> Vec<f64> {
    let mut out = u.to_vec();
    out[j] += h;
    out
}

fn dgamma_at(structure: &dyn TranslationStructure, imm: &ParametricImmersion, geo: &PointGeometry) -> Result<DMatrix<f64>> {
    let n = imm.n();
    let h = imm.fd_steps().second;
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n {
        let hj = axis_step(imm.axes(), &geo.u, j, h);
        let up = gauss_map(structure, imm, &shifted(&geo.u, j, hj))?;
        let dn = gauss_map(structure, imm, &shifted(&geo.u, j, -hj))?;
        let diff = VVector::new((up.coords() - dn.coords()) / (2.0 * hj));
        let w = structure.unapply(&geo.p, &diff)?;
        out.set_column(j, &geo.coefficients(w.vec()));
    }
    Ok(out)
}

fn alpha_at(structure: &dyn TranslationStructure, imm: &ParametricImmersion, geo: &PointGeometry) -> Result<DMatrix<f64>> {
    let n = imm.n();
    let h = imm.fd_steps().second;
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n {
        let hj = axis_step(imm.axes(), &geo.u, j, h);
        let qp = imm.point(&shifted(&geo.u, j, hj))?;
        let qm = imm.point(&shifted(&geo.u, j, -hj))?;
        let up = structure.invariant_field(&geo.eta, &qp)?;
        let dn = structure.invariant_field(&geo.eta, &qm)?;
        let d = tangent_project(&geo.p, &((up.vec() - dn.vec()) / (2.0 * hj)));
        out.set_column(j, &geo.coefficients(d.vec()));
    }
    Ok(out)
}

fn check_domain(structure: &dyn TranslationStructure, p: &SpherePoint) -> Result<()> {
    if structure.in_domain(p) {
        Ok(())
    } else {
        Err(GeometryError::OutOfDomain)
    }
}

/// Γ_p⁻¹ ∘ Dγ(p) in the chart basis, by central differences of γ.
pub fn gauss_map_derivative(
    structure: &dyn TranslationStructure,
    imm: &ParametricImmersion,
    u: &[f64],
) -> Result<DMatrix<f64>> {
    let geo = PointGeometry::new(imm, u)?;
    check_domain(structure, &geo.p)?;
    dgamma_at(structure, imm, &geo)
}

/// c(p) = <η(p), p₀> / (1 + <p, p₀>).
pub fn c_function(p0: &SpherePoint, imm: &ParametricImmersion, u: &[f64]) -> Result<f64> {
    let eta = imm.unit_normal(u)?;
    c_value(p0, &eta)
}

fn c_value(p0: &SpherePoint, eta: &TangentVector) -> Result<f64> {
    let gap = check_non_antipodal(eta.base(), p0)?;
    Ok(eta.vec().dot(p0.coords()) / gap)
}

/// α_p(X) = ∇̄_X η̃, with η̃ the invariant extension of η(p), in the chart basis.
pub fn invariant_shape_operator(
    structure: &dyn TranslationStructure,
    imm: &ParametricImmersion,
    u: &[f64],
) -> Result<DMatrix<f64>> {
    let geo = PointGeometry::new(imm, u)?;
    check_domain(structure, &geo.p)?;
    alpha_at(structure, imm, &geo)
}

/// κ_Γ evaluated as det(Γ⁻¹Dγ) and as det(−(A + α)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslationalCurvature {
    pub from_derivative: f64,
    pub from_operators: f64,
}

impl TranslationalCurvature {
    pub fn difference(&self) -> f64 {
        (self.from_derivative - self.from_operators).abs()
    }
}

pub fn translational_curvature(
    structure: &dyn TranslationStructure,
    imm: &ParametricImmersion,
    u: &[f64],
) -> Result<TranslationalCurvature> {
    let s = sample(structure, imm, u)?;
    Ok(TranslationalCurvature {
        from_derivative: s.kappa_gamma,
        from_operators: s.kappa_gamma_operators,
    })
}

/// Everything the engine knows about one chart point.
#[derive(Debug, Clone)]
pub struct CurvatureSample {
    pub u: Vec<f64>,
    pub p: SpherePoint,
    pub eta: TangentVector,
    pub metric: DMatrix<f64>,
    pub shape_operator: DMatrix<f64>,
    /// Ascending.
    pub principal_curvatures: Vec<f64>,
    /// c(p) relative to the structure's reference point.
    pub c: f64,
    pub alpha: DMatrix<f64>,
    /// Frobenius norms of the g-symmetric and g-skew parts of α.
    pub alpha_symmetric_norm: f64,
    pub alpha_skew_norm: f64,
    pub gamma: VVector,
    pub dgamma_pullback: DMatrix<f64>,
    pub kappa_gamma: f64,
    pub kappa_gamma_operators: f64,
    pub gauss_kronecker: f64,
    /// max |(Γ⁻¹Dγ + A + α)_ij|.
    pub prop_residual: f64,
}

impl CurvatureSample {
    pub fn sqrt_det_metric(&self) -> f64 {
        self.metric.determinant().max(0.0).sqrt()
    }
}

/// Splits α into parts symmetric and skew with respect to g, measured in an
/// orthonormal frame.
fn alpha_split(alpha: &DMatrix<f64>, metric: &DMatrix<f64>) -> Result<(f64, f64)> {
    let chol = metric.clone().cholesky().ok_or(GeometryError::EigenSolveFailure)?;
    let l = chol.l();
    let linv = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(l.nrows(), l.ncols()))
        .ok_or(GeometryError::EigenSolveFailure)?;
    // matrix of α in the orthonormal basis with coefficients Lᵀ c
    let m = l.transpose() * alpha * linv.transpose();
    let sym = (&m + m.transpose()) * 0.5;
    let skew = (&m - m.transpose()) * 0.5;
    Ok((sym.norm(), skew.norm()))
}

pub fn sample(structure: &dyn TranslationStructure, imm: &ParametricImmersion, u: &[f64]) -> Result<CurvatureSample> {
    let geo = PointGeometry::new(imm, u)?;
    check_domain(structure, &geo.p)?;
    let shape = geo.shape_operator()?;
    let principal = geo.principal_curvatures()?;
    let gamma = structure.apply(&geo.eta)?;
    let dgamma = dgamma_at(structure, imm, &geo)?;
    let alpha = alpha_at(structure, imm, &geo)?;
    let (alpha_symmetric_norm, alpha_skew_norm) = alpha_split(&alpha, &geo.frame.metric)?;
    let c = c_value(structure.reference_point(), &geo.eta)?;
    let sum = &shape + &alpha;
    let prop_residual = (&dgamma + &sum).amax();
    Ok(CurvatureSample {
        kappa_gamma: dgamma.determinant(),
        kappa_gamma_operators: (-sum).determinant(),
        gauss_kronecker: shape.determinant(),
        u: geo.u,
        p: geo.p,
        eta: geo.eta,
        metric: geo.frame.metric,
        shape_operator: shape,
        principal_curvatures: principal,
        c,
        alpha,
        alpha_symmetric_norm,
        alpha_skew_norm,
        gamma,
        dgamma_pullback: dgamma,
        prop_residual,
    })
}

/// Applies `f` at every grid node in parallel; results are in node order
/// and the first error by node index is returned.
pub fn map_grid<T, F>(grid: &QuadratureGrid, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[f64]) -> Result<T> + Sync,
{
    let results: Vec<Result<T>> = (0..grid.len()).into_par_iter().map(|i| f(&grid.node(i))).collect();
    results.into_iter().collect()
}

pub fn sample_grid(
    structure: &dyn TranslationStructure,
    imm: &ParametricImmersion,
    grid: &QuadratureGrid,
) -> Result<Vec<CurvatureSample>> {
    map_grid(grid, |u| sample(structure, imm, u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{ParallelTransportStructure, QuaternionStructure};
    use crate::surfaces::{make_clifford, make_geodesic_sphere};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn north() -> SpherePoint {
        SpherePoint::basis(4, 3)
    }

    #[test]
    fn umbilic_sphere() {
        let rho: f64 = 0.5;
        let imm = make_geodesic_sphere(&north(), rho, 2).unwrap();
        let u = [0.9, 2.2];
        let s = shape_operator(&imm, &u).unwrap();
        assert!((s - DMatrix::identity(2, 2) * (-1.0 / rho.tan())).amax() < 1e-12);
        let lam = principal_curvatures(&imm, &u).unwrap();
        assert_abs_diff_eq!(lam[0], -1.8304877, epsilon = 1e-7);
        assert_abs_diff_eq!(lam[1], -1.8304877, epsilon = 1e-7);
        assert_abs_diff_eq!(gauss_kronecker(&imm, &u).unwrap(), 1.0 / rho.tan().powi(2), epsilon = 1e-12);
    }

    #[test]
    fn great_sphere_is_totally_geodesic() {
        let imm = make_geodesic_sphere(&north(), FRAC_PI_2, 2).unwrap();
        let s = shape_operator(&imm, &[1.0, 1.0]).unwrap();
        assert!(s.amax() < 1e-15);
    }

    #[test]
    fn clifford_principal_values() {
        let imm = make_clifford(2, FRAC_1_SQRT_2).unwrap();
        let lam = principal_curvatures(&imm, &[0.3, 1.9]).unwrap();
        assert_abs_diff_eq!(lam[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lam[1], 1.0, epsilon = 1e-12);
        let imm = make_clifford(2, 0.5).unwrap();
        let lam = principal_curvatures(&imm, &[0.3, 1.9]).unwrap();
        assert_abs_diff_eq!(lam[0], -3f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(lam[1], 1.0 / 3f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(gauss_kronecker(&imm, &[0.3, 1.9]).unwrap(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn parallel_structure_on_geodesic_sphere() {
        let rho: f64 = 0.5;
        let p0 = north();
        let s = ParallelTransportStructure::new(p0.clone());
        let imm = make_geodesic_sphere(&p0, rho, 2).unwrap();
        let u = [1.1, 0.4];
        assert_abs_diff_eq!(c_function(&p0, &imm, &u).unwrap(), -(rho / 2.0).tan(), epsilon = 1e-14);
        let alpha = invariant_shape_operator(&s, &imm, &u).unwrap();
        assert!((alpha + DMatrix::identity(2, 2) * (rho / 2.0).tan()).amax() < 1e-7);
        let d = gauss_map_derivative(&s, &imm, &u).unwrap();
        assert!((d - DMatrix::identity(2, 2) / rho.sin()).amax() < 1e-7);
        let k = translational_curvature(&s, &imm, &u).unwrap();
        assert_abs_diff_eq!(k.from_derivative, 1.0 / rho.sin().powi(2), epsilon = 1e-6);
        assert_abs_diff_eq!(k.from_operators, 1.0 / rho.sin().powi(2), epsilon = 1e-6);
    }

    #[test]
    fn gauss_map_is_unit() {
        let imm = make_clifford(2, 0.6).unwrap();
        let q = QuaternionStructure::new();
        let s = ParallelTransportStructure::new(SpherePoint::basis(4, 0));
        for u in [[0.1, 0.2], [2.0, 5.0], [4.0, 1.0]] {
            assert_abs_diff_eq!(gauss_map(&q, &imm, &u).unwrap().norm(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(gauss_map(&s, &imm, &u).unwrap().norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn out_of_domain_is_reported() {
        let imm = make_geodesic_sphere(&north(), 0.7, 2).unwrap();
        let u = [0.8, 1.3];
        let s = ParallelTransportStructure::new(imm.point(&u).unwrap().antipode());
        assert_eq!(gauss_map(&s, &imm, &u), Err(GeometryError::OutOfDomain));
        assert!(sample(&s, &imm, &u).is_err());
    }

    #[test]
    fn pencil_eigenvalues() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]);
        let b = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]);
        assert_eq!(generalized_eigenvalues(&a, &b).unwrap(), vec![0.5, 3.0]);
        let bad = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        assert!(generalized_eigenvalues(&a, &bad).is_err());
    }
}
