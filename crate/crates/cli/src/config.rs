//! Run configuration: parsing, validation and default resolution.

use std::path::Path;

use gaussmap::rigidity::RadiusConvention;
use gaussmap::structures::{
    FrameStructure, ParallelTransportStructure, QuaternionStructure, TranslationStructure, VVector,
};
use gaussmap::surfaces::{
    make_clifford, make_geodesic_sphere, make_perturbed_sphere, FdSteps, ParametricImmersion, QuadratureGrid,
    QuadratureRule,
};
use gaussmap::SpherePoint;
use nalgebra::DVector;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const MAX_NODES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub surface: SurfaceSpec,
    #[serde(default)]
    pub structure: StructureSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceSpec {
    Clifford {
        n: usize,
        r: f64,
    },
    GeodesicSphere {
        #[serde(default)]
        center: Option<Vec<f64>>,
        rho: f64,
        n: usize,
    },
    PerturbedSphere {
        #[serde(default)]
        center: Option<Vec<f64>>,
        rho: f64,
        amplitude: f64,
        frequency: u32,
        n: usize,
    },
}

impl SurfaceSpec {
    pub fn n(&self) -> usize {
        match *self {
            SurfaceSpec::Clifford { n, .. }
            | SurfaceSpec::GeodesicSphere { n, .. }
            | SurfaceSpec::PerturbedSphere { n, .. } => n,
        }
    }

    fn center(&self) -> Option<&Vec<f64>> {
        match self {
            SurfaceSpec::Clifford { .. } => None,
            SurfaceSpec::GeodesicSphere { center, .. } | SurfaceSpec::PerturbedSphere { center, .. } => center.as_ref(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureKind {
    #[default]
    Parallel,
    Frame,
    Quaternion,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureSpec {
    #[serde(default)]
    pub kind: StructureKind,
    #[serde(default)]
    pub base_point: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub nodes: usize,
    pub rule: QuadratureRule,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { nodes: 64, rule: QuadratureRule::Auto }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    /// Step for first derivatives.
    pub h_fd: f64,
    /// Step for second derivatives, Dγ and α.
    pub h_fd2: f64,
    pub delta: f64,
    pub margin: f64,
    pub radius_convention: RadiusConvention,
    /// Gauss-Bonnet residual tolerance.
    pub tolerance: f64,
    /// Direction whose preimages are counted; drawn from `seed` when absent.
    pub target_direction: Option<Vec<f64>>,
}

impl Default for Numerics {
    fn default() -> Self {
        let fd = FdSteps::default();
        Self {
            h_fd: fd.first,
            h_fd2: fd.second,
            delta: 1e-6,
            margin: 1e-3,
            radius_convention: RadiusConvention::EnclosingCap,
            tolerance: 1e-5,
            target_direction: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub path: Option<String>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub grid: Option<usize>,
    pub convention: Option<RadiusConvention>,
    pub out: Option<String>,
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Invalid(format!("config does not match the schema: {e}")))
}

fn finite_positive(name: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("{name} must be a positive number, got {x}")))
    }
}

fn unit_point(name: &str, coords: &[f64], dim: usize) -> Result<SpherePoint, CliError> {
    if coords.len() != dim {
        return Err(CliError::Invalid(format!("{name} needs {dim} coordinates, got {}", coords.len())));
    }
    if coords.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Invalid(format!("{name} has non-finite coordinates")));
    }
    SpherePoint::normalize(DVector::from_column_slice(coords))
        .map_err(|e| CliError::Invalid(format!("{name}: {e}")))
}

fn basis_coords(dim: usize) -> Vec<f64> {
    SpherePoint::basis(dim, 0).into_coords().as_slice().to_vec()
}

fn seeded_direction(seed: u64, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-2 && norm <= 1.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

impl RunConfig {
    /// Applies overrides, checks every field and fills in defaults that
    /// depend on other fields. The result is what the report echoes.
    pub fn resolve(mut self, overrides: &Overrides) -> Result<RunConfig, CliError> {
        if let Some(nodes) = overrides.grid {
            self.grid.nodes = nodes;
        }
        if let Some(c) = overrides.convention {
            self.numerics.radius_convention = c;
        }
        if let Some(out) = &overrides.out {
            self.output.path = Some(out.clone());
        }

        let n = self.surface.n();
        if n == 0 {
            return Err(CliError::Invalid("surface dimension n must be at least 1".into()));
        }
        let dim = n + 2;
        if !(2..=MAX_NODES).contains(&self.grid.nodes) {
            return Err(CliError::Invalid(format!(
                "grid.nodes must lie in [2, {MAX_NODES}], got {}",
                self.grid.nodes
            )));
        }
        let num = &self.numerics;
        finite_positive("numerics.h_fd", num.h_fd)?;
        finite_positive("numerics.h_fd2", num.h_fd2)?;
        finite_positive("numerics.tolerance", num.tolerance)?;
        for (name, x) in [("numerics.delta", num.delta), ("numerics.margin", num.margin)] {
            if !(x.is_finite() && x >= 0.0) {
                return Err(CliError::Invalid(format!("{name} must be a non-negative number, got {x}")));
            }
        }

        let center = match self.surface.center() {
            Some(c) => unit_point("surface.center", c, dim)?.into_coords().as_slice().to_vec(),
            None => basis_coords(dim),
        };
        match &mut self.surface {
            SurfaceSpec::GeodesicSphere { center: c, .. } | SurfaceSpec::PerturbedSphere { center: c, .. } => {
                *c = Some(center.clone());
            }
            SurfaceSpec::Clifford { .. } => {}
        }

        let base = match self.structure.kind {
            StructureKind::Quaternion => {
                if dim != 4 {
                    return Err(CliError::Invalid(format!(
                        "the quaternion structure lives on S³ and needs n = 2, got n = {n}"
                    )));
                }
                let identity = basis_coords(4);
                if let Some(b) = &self.structure.base_point {
                    let p = unit_point("structure.base_point", b, 4)?;
                    if (p.coords() - DVector::from_column_slice(&identity)).amax() > 1e-12 {
                        return Err(CliError::Invalid("the quaternion structure is based at the identity (1, 0, 0, 0)".into()));
                    }
                }
                identity
            }
            StructureKind::Parallel | StructureKind::Frame => match &self.structure.base_point {
                Some(b) => unit_point("structure.base_point", b, dim)?.into_coords().as_slice().to_vec(),
                None => center,
            },
        };
        self.structure.base_point = Some(base);

        let model_dim = n + 1;
        let direction = match &self.numerics.target_direction {
            Some(d) => {
                if d.len() != model_dim {
                    return Err(CliError::Invalid(format!(
                        "numerics.target_direction needs {model_dim} coordinates, got {}",
                        d.len()
                    )));
                }
                let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
                if !(norm.is_finite() && norm > 0.0) {
                    return Err(CliError::Invalid("numerics.target_direction must be a non-zero vector".into()));
                }
                d.iter().map(|x| x / norm).collect()
            }
            None => seeded_direction(self.seed, model_dim),
        };
        self.numerics.target_direction = Some(direction);

        // surface parameters are validated by building the surface once
        self.surface()?;
        Ok(self)
    }

    pub fn fd_steps(&self) -> FdSteps {
        FdSteps { first: self.numerics.h_fd, second: self.numerics.h_fd2 }
    }

    pub fn surface(&self) -> Result<ParametricImmersion, CliError> {
        let dim = self.surface.n() + 2;
        let center = |c: &Option<Vec<f64>>| match c {
            Some(c) => unit_point("surface.center", c, dim),
            None => Ok(SpherePoint::basis(dim, 0)),
        };
        let imm = match &self.surface {
            SurfaceSpec::Clifford { n, r } => make_clifford(*n, *r),
            SurfaceSpec::GeodesicSphere { center: c, rho, n } => make_geodesic_sphere(&center(c)?, *rho, *n),
            SurfaceSpec::PerturbedSphere { center: c, rho, amplitude, frequency, n } => {
                make_perturbed_sphere(&center(c)?, *rho, *amplitude, *frequency, *n)
            }
        }
        .map_err(|e| CliError::Invalid(format!("surface parameters: {e}")))?;
        Ok(imm.with_fd_steps(self.fd_steps()))
    }

    pub fn structure(&self) -> Result<Box<dyn TranslationStructure>, CliError> {
        let dim = self.surface.n() + 2;
        let base = match &self.structure.base_point {
            Some(b) => unit_point("structure.base_point", b, dim)?,
            None => SpherePoint::basis(dim, 0),
        };
        Ok(match self.structure.kind {
            StructureKind::Parallel => Box::new(ParallelTransportStructure::new(base)),
            StructureKind::Frame => Box::new(FrameStructure::from_parallel(&ParallelTransportStructure::new(base))),
            StructureKind::Quaternion => Box::new(QuaternionStructure::new()),
        })
    }

    pub fn grid(&self, imm: &ParametricImmersion) -> Result<QuadratureGrid, CliError> {
        QuadratureGrid::new(imm.axes(), self.grid.nodes, self.grid.rule).map_err(|e| CliError::Invalid(e.to_string()))
    }

    pub fn target_direction(&self) -> VVector {
        let d = self.numerics.target_direction.clone().unwrap_or_else(|| seeded_direction(self.seed, self.surface.n() + 1));
        VVector::new(DVector::from_vec(d))
    }
}
