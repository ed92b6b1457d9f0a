//! Run configuration, a small TOML document.
//!
//! ```toml
//! [mesh]
//! kind = "square"          # "interval", "square" or "file"
//! n = 21                   # square: nodes per side
//! side = 1.0               # square: side length
//! jitter = 0.15            # square: optional
//! seed = 20190611          # square: optional
//! split_x2 = 0.5           # square: optional two-region split
//! # lengths = [2.0, 1.0]   # interval: zone lengths
//! # dofs = [25, 25]        # interval: nodes per zone
//! # path = "mesh.txt"      # file: relative to the config file
//!
//! [quadrature]
//! kind = "sn"              # "slab" (Gauss-Legendre) or "sn" (level symmetric)
//! order = 6
//!
//! [[region]]               # one table per region id, in order
//! sigma_t = 1.0
//! sigma_s = 0.5
//! q = 1.0
//!
//! [bc]
//! type = "vacuum"          # "vacuum", "isotropic" or "beam"
//! # value = 1.0            # isotropic and beam
//! # direction = 0          # beam: zero-based direction index
//! # side = "left"          # beam: optional, left/right/bottom/top
//! mode = "weak"            # "weak" or "strong"
//!
//! [scaling]
//! epsilon = 1e-3           # optional diffusive scaling
//!
//! [solver]
//! scheme = "ap"            # "galerkin", "gv" or "ap"
//! method = "direct"        # "direct" or "si"
//! tolerance = 1e-10
//! max_iter = 200000
//! ```
//!
//! Every section except `[mesh]` and `[[region]]` is optional. Unknown keys
//! are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::angular::AngularQuadrature;
use crate::assembly::Scheme;
use crate::cases::{planar_quadrature, Discretization, SolverOptions};
use crate::mesh::{build_uniform_1d, read_mesh, Mesh, SquareMeshBuilder};
use crate::problem::{BcMode, Inflow, ProblemSpec, Side, Source};
use crate::solver::{SolveMethod, DEFAULT_SI_MAX_ITER, DEFAULT_SI_TOLERANCE};
use crate::{Error, Result};

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MeshConfig {
    Interval {
        lengths: Vec<f64>,
        dofs: Vec<usize>,
    },
    Square {
        n: usize,
        #[serde(default = "unit")]
        side: f64,
        jitter: Option<f64>,
        seed: Option<u64>,
        split_x2: Option<f64>,
    },
    File {
        path: PathBuf,
    },
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureKind {
    Slab,
    Sn,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub kind: QuadratureKind,
    pub order: usize,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub sigma_t: f64,
    pub sigma_s: f64,
    #[serde(default)]
    pub q: f64,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum BcType {
    #[default]
    Vacuum,
    Isotropic,
    Beam,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum BcModeConfig {
    #[default]
    Weak,
    Strong,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SideConfig {
    Left,
    Right,
    Bottom,
    Top,
}

#[derive(Clone, Debug, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct BcConfig {
    #[serde(rename = "type", default)]
    pub kind: BcType,
    pub value: Option<f64>,
    pub direction: Option<usize>,
    pub side: Option<SideConfig>,
    #[serde(default)]
    pub mode: BcModeConfig,
}

#[derive(Clone, Debug, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub epsilon: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_scheme")]
    pub scheme: String,
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_scheme() -> String {
    "ap".into()
}

fn default_method() -> String {
    "direct".into()
}

fn default_tolerance() -> f64 {
    DEFAULT_SI_TOLERANCE
}

fn default_max_iter() -> usize {
    DEFAULT_SI_MAX_ITER
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            scheme: default_scheme(),
            method: default_method(),
            tolerance: default_tolerance(),
            max_iter: default_max_iter(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub mesh: MeshConfig,
    pub quadrature: Option<QuadratureConfig>,
    #[serde(rename = "region")]
    pub regions: Vec<RegionConfig>,
    #[serde(default)]
    pub bc: BcConfig,
    #[serde(default)]
    pub scaling: ScalingConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl std::str::FromStr for Config {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }
}

impl Config {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg: Config = text.parse()?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn scheme(&self) -> Result<Scheme> {
        self.solver.scheme.parse().map_err(config_err)
    }

    pub fn solver_options(&self) -> Result<SolverOptions> {
        let method: SolveMethod = self.solver.method.parse().map_err(config_err)?;
        if !(self.solver.tolerance > 0.0) {
            return Err(Error::Config(format!(
                "solver.tolerance must be positive, got {}",
                self.solver.tolerance
            )));
        }
        Ok(SolverOptions {
            method,
            tolerance: self.solver.tolerance,
            max_iter: self.solver.max_iter,
        })
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        match &self.mesh {
            MeshConfig::Interval { lengths, dofs } => build_uniform_1d(lengths, dofs),
            MeshConfig::Square {
                n,
                side,
                jitter,
                seed,
                split_x2,
            } => {
                let mut b = SquareMeshBuilder::new(*n).side(*side);
                if let Some(j) = jitter {
                    b = b.jitter(*j);
                }
                if let Some(s) = seed {
                    b = b.seed(*s);
                }
                if let Some(x2) = split_x2 {
                    b = b.split_x2(*x2);
                }
                b.build()
            }
            MeshConfig::File { path } => {
                let file = std::fs::File::open(self.base_dir.join(path))?;
                read_mesh(std::io::BufReader::new(file))
            }
        }
    }

    pub fn build_quadrature(&self, dim: usize) -> Result<AngularQuadrature> {
        let q = match &self.quadrature {
            Some(q) => q.clone(),
            None if dim == 1 => QuadratureConfig {
                kind: QuadratureKind::Slab,
                order: 8,
            },
            None => QuadratureConfig {
                kind: QuadratureKind::Sn,
                order: 6,
            },
        };
        match q.kind {
            QuadratureKind::Slab => AngularQuadrature::slab(q.order),
            QuadratureKind::Sn => planar_quadrature(q.order),
        }
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        if self.regions.is_empty() {
            return Err(Error::Config("at least one [[region]] table is required".into()));
        }
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| Error::Config(format!("bc.{key} is required for bc.type = {:?}", self.bc.kind)))
        };
        let inflow = match self.bc.kind {
            BcType::Vacuum => Inflow::Vacuum,
            BcType::Isotropic => Inflow::Isotropic(need(self.bc.value, "value")?),
            BcType::Beam => Inflow::Beam {
                direction: self
                    .bc
                    .direction
                    .ok_or_else(|| Error::Config("bc.direction is required for a beam".into()))?,
                value: need(self.bc.value, "value")?,
                side: self.bc.side.map(|s| match s {
                    SideConfig::Left => Side::Left,
                    SideConfig::Right => Side::Right,
                    SideConfig::Bottom => Side::Bottom,
                    SideConfig::Top => Side::Top,
                }),
            },
        };
        Ok(ProblemSpec {
            sigma_t: self.regions.iter().map(|r| r.sigma_t).collect(),
            sigma_s: self.regions.iter().map(|r| r.sigma_s).collect(),
            source: Source::Region(self.regions.iter().map(|r| r.q).collect()),
            inflow,
            epsilon: self.scaling.epsilon,
            bc_mode: match self.bc.mode {
                BcModeConfig::Weak => BcMode::WeakPenalty,
                BcModeConfig::Strong => BcMode::Strong,
            },
        })
    }

    pub fn discretization(&self) -> Result<Discretization> {
        let mesh = self.build_mesh()?;
        let quad = self.build_quadrature(mesh.dim())?;
        let spec = self.problem()?;
        if let Inflow::Beam { direction, .. } = spec.inflow {
            if direction >= quad.len() {
                return Err(Error::Config(format!(
                    "bc.direction {direction} out of range for {} directions",
                    quad.len()
                )));
            }
        }
        Discretization::new(mesh, spec, quad)
    }
}

fn config_err(e: Error) -> Error {
    match e {
        Error::InvalidArgument(msg) => Error::Config(msg),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = r#"
        [mesh]
        kind = "square"
        n = 9
        split_x2 = 0.5

        [[region]]
        sigma_t = 0.0
        sigma_s = 0.0

        [[region]]
        sigma_t = 100.0
        sigma_s = 99.0

        [bc]
        type = "beam"
        direction = 0
        value = 1.0
        side = "left"

        [solver]
        method = "si"
    "#;

    #[test]
    fn square_config_builds() {
        let cfg: Config = SQUARE.parse().unwrap();
        let disc = cfg.discretization().unwrap();
        assert_eq!(disc.mesh.dim(), 2);
        assert_eq!(disc.quad.len(), 24);
        assert_eq!(disc.spec.n_regions(), 2);
        assert_eq!(cfg.scheme().unwrap(), Scheme::Ap);
        assert_eq!(cfg.solver_options().unwrap().method, SolveMethod::SourceIteration);
    }

    #[test]
    fn interval_defaults_to_slab() {
        let cfg: Config = r#"
            [mesh]
            kind = "interval"
            lengths = [1.0, 2.0]
            dofs = [5, 5]
            [[region]]
            sigma_t = 1.0
            sigma_s = 0.5
            q = 1.0
            [[region]]
            sigma_t = 2.0
            sigma_s = 0.0
            [scaling]
            epsilon = 0.1
        "#
        .parse()
        .unwrap();
        let disc = cfg.discretization().unwrap();
        assert_eq!(disc.mesh.n_nodes(), 10);
        assert_eq!(disc.quad.len(), 8);
        assert_eq!(disc.epsilon(), 0.1);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = SQUARE.replace("side = \"left\"", "side = \"left\"\nangle = 3");
        assert!(matches!(text.parse::<Config>(), Err(Error::Config(_))));
        let text = SQUARE.replace("n = 9", "n = 9\nsize = 3");
        assert!(matches!(text.parse::<Config>(), Err(Error::Config(_))));
    }

    #[test]
    fn bad_values_are_config_errors() {
        let cfg: Config = SQUARE.replace("method = \"si\"", "method = \"cg\"").parse().unwrap();
        assert!(matches!(cfg.solver_options(), Err(Error::Config(_))));
        let cfg: Config = SQUARE.replace("direction = 0", "direction = 24").parse().unwrap();
        assert!(matches!(cfg.discretization(), Err(Error::Config(_))));
        let cfg: Config = SQUARE.replace("value = 1.0", "").parse().unwrap();
        assert!(matches!(cfg.discretization(), Err(Error::Config(_))));
    }

    #[test]
    fn mesh_file_resolves_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let mesh = build_uniform_1d(&[1.0], &[4]).unwrap();
        crate::mesh::write_mesh(&mesh, std::fs::File::create(dir.path().join("m.txt")).unwrap()).unwrap();
        let cfg_path = dir.path().join("run.toml");
        std::fs::write(
            &cfg_path,
            "[mesh]\nkind = \"file\"\npath = \"m.txt\"\n[[region]]\nsigma_t = 1.0\nsigma_s = 0.0\nq = 1.0\n",
        )
        .unwrap();
        let disc = Config::from_path(&cfg_path).unwrap().discretization().unwrap();
        assert_eq!(disc.mesh.n_nodes(), 4);
    }
}
