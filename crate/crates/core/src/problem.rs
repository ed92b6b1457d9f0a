//! Problem definitions and their nodal data.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::angular::AngularQuadrature;
use crate::mesh::{Mesh, MeshOperators};
use crate::{Error, Result, Vec3};

/// A function of position and direction.
pub type Field = Arc<dyn Fn([f64; 2], Vec3) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Source {
    /// One isotropic value per region.
    Region(Vec<f64>),
    Field(Field),
}

/// Side of the bounding box, `Left`/`Right` in `x1`, `Bottom`/`Top` in `x2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

#[derive(Clone)]
pub enum Inflow {
    Vacuum,
    Isotropic(f64),
    /// `value` on direction `direction` (zero based), zero otherwise. With a
    /// side, only boundary dofs on that side are lit; corners count as lit.
    Beam {
        direction: usize,
        value: f64,
        side: Option<Side>,
    },
    Field(Field),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BcMode {
    #[default]
    WeakPenalty,
    /// No penalty; inflow unknowns are pinned to their boundary value.
    Strong,
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub sigma_t: Vec<f64>,
    pub sigma_s: Vec<f64>,
    pub source: Source,
    pub inflow: Inflow,
    /// When set the data above is the unscaled problem and nodal data use
    /// `σ_s/ε`, `ε σ_a` and `ε q`.
    pub epsilon: Option<f64>,
    pub bc_mode: BcMode,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("sigma_t", &self.sigma_t)
            .field("sigma_s", &self.sigma_s)
            .field("epsilon", &self.epsilon)
            .field("bc_mode", &self.bc_mode)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    /// Uniform cross sections and per-region source, vacuum inflow.
    pub fn homogeneous(sigma_t: f64, sigma_s: f64, q: f64) -> Self {
        Self {
            sigma_t: vec![sigma_t],
            sigma_s: vec![sigma_s],
            source: Source::Region(vec![q]),
            inflow: Inflow::Vacuum,
            epsilon: None,
            bc_mode: BcMode::WeakPenalty,
        }
    }

    pub fn with_inflow(mut self, inflow: Inflow) -> Self {
        self.inflow = inflow;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    pub fn with_bc_mode(mut self, mode: BcMode) -> Self {
        self.bc_mode = mode;
        self
    }

    pub fn n_regions(&self) -> usize {
        self.sigma_t.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma_t.len() != self.sigma_s.len() || self.sigma_t.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{} σ_t values for {} σ_s values",
                self.sigma_t.len(),
                self.sigma_s.len()
            )));
        }
        for (r, (&st, &ss)) in self.sigma_t.iter().zip(&self.sigma_s).enumerate() {
            if !(ss >= 0.0) || !(st >= ss) {
                return Err(Error::NegativeCrossSection {
                    region: r,
                    sigma_t: st,
                    sigma_s: ss,
                });
            }
        }
        if let Source::Region(q) = &self.source {
            if q.len() != self.sigma_t.len() {
                return Err(Error::InvalidArgument(format!(
                    "{} source values for {} regions",
                    q.len(),
                    self.sigma_t.len()
                )));
            }
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0) {
                return Err(Error::InvalidArgument(format!("epsilon must be positive, got {eps}")));
            }
        }
        Ok(())
    }

    fn eps(&self) -> f64 {
        self.epsilon.unwrap_or(1.0)
    }

    /// Effective `(σ_s, σ_a)` of a region after rescaling.
    pub fn region_sigma(&self, region: usize) -> (f64, f64) {
        let eps = self.eps();
        let (st, ss) = (self.sigma_t[region], self.sigma_s[region]);
        (ss / eps, eps * (st - ss))
    }

    /// Effective `σ_s` per cell.
    pub fn cell_sigma_s(&self, mesh: &Mesh) -> Result<Vec<f64>> {
        self.check_regions(mesh)?;
        Ok(mesh.regions().iter().map(|&r| self.region_sigma(r).0).collect())
    }

    fn check_regions(&self, mesh: &Mesh) -> Result<()> {
        match mesh.regions().iter().find(|&&r| r >= self.n_regions()) {
            Some(r) => Err(Error::InvalidArgument(format!(
                "mesh region {r} has no cross sections ({} regions defined)",
                self.n_regions()
            ))),
            None => Ok(()),
        }
    }
}

/// Nodal problem data. Angle-dependent arrays are angle major: entry
/// `k * n + i` belongs to dof `i` and direction `k`.
#[derive(Clone, Debug)]
pub struct NodalData {
    pub n: usize,
    pub n_angles: usize,
    pub sigma_t: Vec<f64>,
    pub sigma_s: Vec<f64>,
    pub sigma_a: Vec<f64>,
    pub q: Vec<f64>,
    /// Inflow data, zero away from the boundary.
    pub alpha: Vec<f64>,
    /// `b_ik = m_i^∂ (|Ω_k·n_i| − Ω_k·n_i)/2`, zero in strong mode.
    pub b: Vec<f64>,
    /// Rows `(i, k)` pinned to their boundary value (strong mode only).
    pub pinned: Vec<bool>,
    pub bc_mode: BcMode,
}

impl NodalData {
    pub fn idx(&self, i: usize, k: usize) -> usize {
        k * self.n + i
    }

    /// `q̄_i = (1/|S|) Σ_k μ_k q_ik`.
    pub fn q_bar(&self, quad: &AngularQuadrature) -> Vec<f64> {
        (0..self.n)
            .map(|i| quad.average((0..self.n_angles).map(|k| self.q[self.idx(i, k)])))
            .collect()
    }
}

fn on_side(p: [f64; 2], side: Side, lo: [f64; 2], hi: [f64; 2], tol: f64) -> bool {
    match side {
        Side::Left => (p[0] - lo[0]).abs() <= tol,
        Side::Right => (p[0] - hi[0]).abs() <= tol,
        Side::Bottom => (p[1] - lo[1]).abs() <= tol,
        Side::Top => (p[1] - hi[1]).abs() <= tol,
    }
}

pub fn nodal_data(spec: &ProblemSpec, mesh: &Mesh, ops: &MeshOperators, quad: &AngularQuadrature) -> Result<NodalData> {
    spec.validate()?;
    spec.check_regions(mesh)?;
    let n = mesh.n_nodes();
    let l = quad.len();
    if ops.n_dofs() != n {
        return Err(Error::InvalidArgument("operators do not match the mesh".into()));
    }
    let eps = spec.eps();

    let mut sigma_a = vec![0.0; n];
    let mut sigma_s = vec![0.0; n];
    let mut q_region = vec![0.0; n];
    let mut count = vec![0usize; n];
    for (c, cell) in mesh.cells().enumerate() {
        let r = mesh.region(c);
        let (ss, sa) = spec.region_sigma(r);
        let qr = match &spec.source {
            Source::Region(q) => eps * q[r],
            Source::Field(_) => 0.0,
        };
        for &i in cell {
            sigma_a[i] += sa;
            sigma_s[i] += ss;
            q_region[i] += qr;
            count[i] += 1;
        }
    }
    for i in 0..n {
        let c = count[i] as f64;
        sigma_a[i] /= c;
        sigma_s[i] /= c;
        q_region[i] /= c;
    }
    // σ_a is averaged on its own: after rescaling σ_t − σ_s would lose it to cancellation.
    let sigma_t: Vec<f64> = sigma_s.iter().zip(&sigma_a).map(|(s, a)| s + a).collect();

    let mut q = vec![0.0; n * l];
    for k in 0..l {
        let omega = quad.direction(k);
        for i in 0..n {
            q[k * n + i] = match &spec.source {
                Source::Region(_) => q_region[i],
                Source::Field(f) => eps * f(mesh.node(i), omega),
            };
        }
    }

    let (lo, hi) = bounding_box(mesh);
    let tol = 1e-10 * mesh.diameter();
    let mut alpha = vec![0.0; n * l];
    let mut b = vec![0.0; n * l];
    let mut pinned = vec![false; n * l];
    for i in ops.boundary_dofs() {
        let x = mesh.node(i);
        let normal = ops.n_bnd[i];
        for k in 0..l {
            let omega = quad.direction(k);
            let a = match &spec.inflow {
                Inflow::Vacuum => 0.0,
                Inflow::Isotropic(v) => *v,
                Inflow::Beam { direction, value, side } => {
                    let lit = side.is_none_or(|s| on_side(x, s, lo, hi, tol));
                    if k == *direction && lit {
                        *value
                    } else {
                        0.0
                    }
                }
                Inflow::Field(f) => f(x, omega),
            };
            alpha[k * n + i] = a;
            let on = omega.dot(&normal);
            match spec.bc_mode {
                BcMode::WeakPenalty => b[k * n + i] = ops.m_bnd[i] * (on.abs() - on) / 2.0,
                BcMode::Strong => pinned[k * n + i] = on < 0.0,
            }
        }
    }
    if let Inflow::Beam { direction, .. } = spec.inflow {
        if direction >= l {
            return Err(Error::InvalidArgument(format!(
                "beam direction {direction} out of range for {l} directions"
            )));
        }
    }
    Ok(NodalData {
        n,
        n_angles: l,
        sigma_t,
        sigma_s,
        sigma_a,
        q,
        alpha,
        b,
        pinned,
        bc_mode: spec.bc_mode,
    })
}

fn bounding_box(mesh: &Mesh) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in mesh.nodes() {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    (lo, hi)
}

/// `ψ_k(x) = 2 + sin(Ω_k·x) + sin(πx₁) sin(πx₂)`.
pub fn manufactured_solution(x: [f64; 2], omega: Vec3) -> f64 {
    2.0 + (omega.x() * x[0] + omega.y() * x[1]).sin() + (PI * x[0]).sin() * (PI * x[1]).sin()
}

/// Source making [`manufactured_solution`] exact for the given quadrature.
pub fn manufactured_source(quad: &AngularQuadrature, sigma_t: f64, sigma_s: f64) -> Field {
    let dirs = quad.directions().to_vec();
    let weights = quad.weights().to_vec();
    let measure = quad.sphere_measure();
    Arc::new(move |x, omega| {
        let psi_bar = dirs
            .iter()
            .zip(&weights)
            .map(|(d, w)| w * manufactured_solution(x, *d))
            .sum::<f64>()
            / measure;
        let phase = omega.x() * x[0] + omega.y() * x[1];
        let (s1, c1) = (PI * x[0]).sin_cos();
        let (s2, c2) = (PI * x[1]).sin_cos();
        let grad = [
            phase.cos() * omega.x() + PI * c1 * s2,
            phase.cos() * omega.y() + PI * s1 * c2,
        ];
        omega.x() * grad[0] + omega.y() * grad[1] + sigma_t * manufactured_solution(x, omega) - sigma_s * psi_bar
    })
}

/// Manufactured problem on the unit square with the exact solution as inflow.
pub fn manufactured_problem(quad: &AngularQuadrature, sigma_t: f64, sigma_s: f64) -> ProblemSpec {
    ProblemSpec {
        sigma_t: vec![sigma_t],
        sigma_s: vec![sigma_s],
        source: Source::Field(manufactured_source(quad, sigma_t, sigma_s)),
        inflow: Inflow::Field(Arc::new(manufactured_solution)),
        epsilon: None,
        bc_mode: BcMode::WeakPenalty,
    }
}

/// `ψ⁰ = sin(πx₁) sin(πx₂)`, the limit solution of [`diffusion_limit_problem`].
pub fn diffusion_limit_solution(x: [f64; 2]) -> f64 {
    (PI * x[0]).sin() * (PI * x[1]).sin()
}

/// `σ_t = σ_s = 1/ε` and `q = ε (2/3) π² sin(πx₁) sin(πx₂)`, vacuum inflow.
/// Expressed as the unscaled problem `σ_t = σ_s = 1`, `q = (2/3)π² ψ⁰` with
/// the rescaling parameter set to `ε`.
pub fn diffusion_limit_problem(epsilon: f64) -> ProblemSpec {
    ProblemSpec {
        sigma_t: vec![1.0],
        sigma_s: vec![1.0],
        source: Source::Field(Arc::new(|x, _| 2.0 / 3.0 * PI * PI * diffusion_limit_solution(x))),
        inflow: Inflow::Vacuum,
        epsilon: Some(epsilon),
        bc_mode: BcMode::WeakPenalty,
    }
}
