//! Benchmark problems and the studies built on them.

use std::fmt;
use std::str::FromStr;

use crate::analysis::{
    check_minmax_bounds, convergence_table, error_norms, locking_spread, scalar_error_norms, AngularFluxField,
    BoundReport, ConvergenceRow,
};
use crate::angular::AngularQuadrature;
use crate::assembly::{
    ap_coefficients, ap_coefficients_scaled, assemble_ap, assemble_diffusion_limit, assemble_galerkin,
    assemble_graph_viscosity, ApCoefficients, Scheme,
};
use crate::mesh::{build_operators, build_uniform_1d, sigma_tilde, Mesh, MeshOperators, SquareMeshBuilder};
use crate::problem::{
    diffusion_limit_problem, diffusion_limit_solution, manufactured_problem, manufactured_solution, nodal_data, BcMode,
    Inflow, NodalData, ProblemSpec, Side, Source,
};
use crate::solver::{
    solve_direct, solve_source_iteration, SolveMethod, SolveReport, DEFAULT_SI_MAX_ITER, DEFAULT_SI_TOLERANCE,
};
use crate::sparse::TransportSystem;
use crate::{Error, Result};

/// Nodes per side of the three-mesh desk sequence (149, 516 and 1950 nodes).
pub const DESK_MESH_SIDES: [usize; 3] = [11, 21, 41];

/// Limit scaling used when a problem carries no `ε` of its own.
const LIMIT_EPSILON: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub method: SolveMethod,
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            method: SolveMethod::DirectLu,
            tolerance: DEFAULT_SI_TOLERANCE,
            max_iter: DEFAULT_SI_MAX_ITER,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub field: AngularFluxField,
    pub report: SolveReport,
}

/// A problem on a mesh with a quadrature, ready to assemble.
pub struct Discretization {
    pub mesh: Mesh,
    pub spec: ProblemSpec,
    pub quad: AngularQuadrature,
    pub ops: MeshOperators,
    pub nodal: NodalData,
    pub coeffs: ApCoefficients,
}

fn operators(mesh: &Mesh, spec: &ProblemSpec) -> Result<MeshOperators> {
    build_operators(mesh, &sigma_tilde(&spec.cell_sigma_s(mesh)?, mesh.diameter()))
}

impl Discretization {
    pub fn new(mesh: Mesh, spec: ProblemSpec, quad: AngularQuadrature) -> Result<Self> {
        spec.validate()?;
        if (mesh.dim() == 1) != (quad.mode() == crate::angular::DimensionMode::Slab1D) {
            return Err(Error::InvalidArgument(format!(
                "{}D mesh with a {:?} quadrature",
                mesh.dim(),
                quad.mode()
            )));
        }
        let ops = operators(&mesh, &spec)?;
        let nodal = nodal_data(&spec, &mesh, &ops, &quad)?;
        let coeffs = ap_coefficients(&ops, &nodal, &quad)?;
        Ok(Self {
            mesh,
            spec,
            quad,
            ops,
            nodal,
            coeffs,
        })
    }

    pub fn n_unknowns(&self) -> usize {
        self.mesh.n_nodes() * self.quad.len()
    }

    pub fn epsilon(&self) -> f64 {
        self.spec.epsilon.unwrap_or(1.0)
    }

    pub fn system(&self, scheme: Scheme) -> TransportSystem {
        match scheme {
            Scheme::Galerkin => assemble_galerkin(&self.nodal, &self.ops, &self.quad),
            Scheme::GraphViscosity => {
                assemble_graph_viscosity(&self.nodal, &self.ops, &self.quad, &self.coeffs.viscosity)
            }
            Scheme::Ap => assemble_ap(&self.nodal, &self.ops, &self.quad, &self.coeffs),
        }
    }

    pub fn solve(&self, scheme: Scheme, opts: &SolverOptions) -> Result<Solution> {
        let system = self.system(scheme);
        let (x, report) = match opts.method {
            SolveMethod::DirectLu => solve_direct(&system.to_sparse())?,
            SolveMethod::SourceIteration => solve_source_iteration(&system, opts.tolerance, opts.max_iter)?,
        };
        log::info!(
            "{scheme:?} solve: {} unknowns, {} iterations, residual {:.3e}, {:.2}s",
            x.len(),
            report.iterations,
            report.residual_norm,
            report.wall_time
        );
        Ok(Solution {
            field: AngularFluxField::new(x, self.mesh.n_nodes(), self.quad.len())?,
            report,
        })
    }

    /// Discrete min/max principle of the scheme; none for the Galerkin scheme.
    pub fn bounds(&self, scheme: Scheme, field: &AngularFluxField) -> Option<BoundReport> {
        match scheme {
            Scheme::Galerkin => None,
            Scheme::GraphViscosity => Some(check_minmax_bounds(field, &self.nodal, &self.ops, None)),
            Scheme::Ap => Some(check_minmax_bounds(field, &self.nodal, &self.ops, Some(&self.coeffs))),
        }
    }

    /// Solution `Ψ⁰` of the limit diffusion system of the unscaled problem.
    pub fn diffusion_limit(&self) -> Result<Vec<f64>> {
        let eps = self.spec.epsilon.unwrap_or(LIMIT_EPSILON);
        let mut spec = self.spec.clone();
        spec.epsilon = None;
        let ops = operators(&self.mesh, &spec)?;
        let nodal = nodal_data(&spec, &self.mesh, &ops, &self.quad)?;
        let coeffs = ap_coefficients_scaled(&ops, &nodal, &self.quad, eps)?;
        let system = assemble_diffusion_limit(&nodal, &ops, &self.quad, &coeffs)?;
        Ok(solve_direct(&system)?.0)
    }
}

/// 2D quadrature of the benchmarks: the level-symmetric set folded onto
/// the upper hemisphere.
pub fn planar_quadrature(order: usize) -> Result<AngularQuadrature> {
    Ok(AngularQuadrature::triangular_sn(order)?.fold_z())
}

struct ZoneData {
    lengths: &'static [f64],
    sigma_s: &'static [f64],
    sigma_t: &'static [f64],
    q: &'static [f64],
    dofs: &'static [usize],
}

const TABLE3: [ZoneData; 4] = [
    ZoneData {
        lengths: &[2.0, 1.0, 2.0, 1.0, 2.0],
        sigma_s: &[0.0, 0.0, 0.0, 0.9, 0.9],
        sigma_t: &[50.0, 5.0, 0.0, 1.0, 1.0],
        q: &[50.0, 0.0, 0.0, 1.0, 1.0],
        dofs: &[25; 5],
    },
    ZoneData {
        lengths: &[10.0],
        sigma_s: &[100.0],
        sigma_t: &[100.0],
        q: &[0.0],
        dofs: &[100],
    },
    ZoneData {
        lengths: &[10.0],
        sigma_s: &[10.0],
        sigma_t: &[10.0],
        q: &[0.1],
        dofs: &[100],
    },
    ZoneData {
        lengths: &[100.0],
        sigma_s: &[0.09999],
        sigma_t: &[0.1],
        q: &[1.0],
        dofs: &[100],
    },
];

/// One-dimensional zoned slabs with the eight-direction Gauss–Legendre set.
/// Case 2 lights the fifth direction (`μ > 0`) at `x = 0` with value 1.
pub fn table3_case(id: usize) -> Result<Discretization> {
    let data = id
        .checked_sub(1)
        .and_then(|i| TABLE3.get(i))
        .ok_or_else(|| Error::InvalidArgument(format!("no 1D case {id} (1 to 4)")))?;
    let mesh = build_uniform_1d(data.lengths, data.dofs)?;
    let mut spec = ProblemSpec {
        sigma_t: data.sigma_t.to_vec(),
        sigma_s: data.sigma_s.to_vec(),
        source: Source::Region(data.q.to_vec()),
        ..ProblemSpec::homogeneous(1.0, 0.0, 0.0)
    };
    if id == 2 {
        spec.inflow = Inflow::Beam {
            direction: 4,
            value: 1.0,
            side: Some(Side::Left),
        };
    }
    Discretization::new(mesh, spec, AngularQuadrature::slab(8)?)
}

/// `(0,100)²`, `σ_t = 0.1`, `σ_s = 0.0999`, `q = 1`, vacuum inflow, S6.
pub fn boundary_case(nodes_per_side: usize) -> Result<Discretization> {
    let mesh = SquareMeshBuilder::new(nodes_per_side).side(100.0).build()?;
    Discretization::new(mesh, ProblemSpec::homogeneous(0.1, 0.0999, 1.0), planar_quadrature(6)?)
}

/// Unit square, void below `x₂ = 0.5` and `σ_t = 100`, `σ_s = 99` above, no
/// source, lit from the left along the first S6 direction.
pub fn reflection_case(nodes_per_side: usize) -> Result<Discretization> {
    let mesh = SquareMeshBuilder::new(nodes_per_side).split_x2(0.5).build()?;
    let spec = ProblemSpec {
        sigma_t: vec![0.0, 100.0],
        sigma_s: vec![0.0, 99.0],
        source: Source::Region(vec![0.0, 0.0]),
        ..ProblemSpec::homogeneous(1.0, 0.0, 0.0)
    }
    .with_inflow(Inflow::Beam {
        direction: 0,
        value: 1.0,
        side: Some(Side::Left),
    });
    Discretization::new(mesh, spec, planar_quadrature(6)?)
}

pub fn manufactured_case(nodes_per_side: usize, order: usize) -> Result<Discretization> {
    let quad = planar_quadrature(order)?;
    let mesh = SquareMeshBuilder::new(nodes_per_side).build()?;
    Discretization::new(mesh, manufactured_problem(&quad, 1.0, 1.0), quad)
}

pub fn diffusion_case(nodes_per_side: usize, epsilon: f64, bc_mode: BcMode) -> Result<Discretization> {
    let mesh = SquareMeshBuilder::new(nodes_per_side).build()?;
    let spec = diffusion_limit_problem(epsilon).with_bc_mode(bc_mode);
    Discretization::new(mesh, spec, planar_quadrature(6)?)
}

/// AP errors against the manufactured solution, one row per mesh.
pub fn manufactured_study(sides: &[usize], order: usize) -> Result<Vec<ConvergenceRow>> {
    let mut rows = Vec::with_capacity(sides.len());
    for &n in sides {
        let disc = manufactured_case(n, order)?;
        let sol = disc.solve(Scheme::Ap, &SolverOptions::default())?;
        rows.push((
            disc.mesh.n_nodes(),
            error_norms(&disc.mesh, &sol.field, &disc.quad, &manufactured_solution)?,
        ));
    }
    Ok(convergence_table(&rows, 2))
}

/// AP scalar-flux errors against the interpolated limit `ψ⁰`.
///
/// Uses strongly imposed inflow: with the penalty form the limit problem
/// carries a Robin condition whose O(h) extrapolation length dominates
/// the error.
pub fn diffusion_study(sides: &[usize], epsilon: f64) -> Result<Vec<ConvergenceRow>> {
    let mut rows = Vec::with_capacity(sides.len());
    for &n in sides {
        let disc = diffusion_case(n, epsilon, BcMode::Strong)?;
        let sol = disc.solve(Scheme::Ap, &SolverOptions::default())?;
        let phi = sol.field.scalar_flux(&disc.quad);
        rows.push((
            disc.mesh.n_nodes(),
            scalar_error_norms(&disc.mesh, &phi, &diffusion_limit_solution)?,
        ));
    }
    Ok(convergence_table(&rows, 2))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LockingRow {
    pub epsilon: f64,
    pub gv_spread: f64,
    pub ap_spread: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LockingReport {
    pub rows: Vec<LockingRow>,
    /// Spread of the limit diffusion solve on the same mesh.
    pub limit_spread: f64,
}

/// Scalar-flux spread of the graph-viscosity and AP schemes on the
/// diffusion-limit problem as `ε` decreases.
pub fn locking_sweep(nodes_per_side: usize, epsilons: &[f64]) -> Result<LockingReport> {
    let mut rows = Vec::with_capacity(epsilons.len());
    let mut limit_spread = f64::NAN;
    for &eps in epsilons {
        let disc = diffusion_case(nodes_per_side, eps, BcMode::WeakPenalty)?;
        let opts = SolverOptions::default();
        let gv = disc.solve(Scheme::GraphViscosity, &opts)?;
        let ap = disc.solve(Scheme::Ap, &opts)?;
        rows.push(LockingRow {
            epsilon: eps,
            gv_spread: locking_spread(&gv.field.scalar_flux(&disc.quad)),
            ap_spread: locking_spread(&ap.field.scalar_flux(&disc.quad)),
        });
        if limit_spread.is_nan() {
            limit_spread = locking_spread(&disc.diffusion_limit()?);
        }
    }
    Ok(LockingReport { rows, limit_spread })
}

/// Named single-run benchmarks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseName {
    Table3(usize),
    Boundary,
    Reflection,
}

impl CaseName {
    pub const ALL: [CaseName; 6] = [
        CaseName::Table3(1),
        CaseName::Table3(2),
        CaseName::Table3(3),
        CaseName::Table3(4),
        CaseName::Boundary,
        CaseName::Reflection,
    ];

    /// Builds the case; 2D cases use `nodes_per_side` nodes along each side.
    pub fn build(self, nodes_per_side: usize) -> Result<Discretization> {
        match self {
            CaseName::Table3(id) => table3_case(id),
            CaseName::Boundary => boundary_case(nodes_per_side),
            CaseName::Reflection => reflection_case(nodes_per_side),
        }
    }
}

impl fmt::Display for CaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseName::Table3(id) => write!(f, "table3-case{id}"),
            CaseName::Boundary => f.write_str("boundary"),
            CaseName::Reflection => f.write_str("reflection"),
        }
    }
}

impl FromStr for CaseName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseName::ALL.into_iter().find(|c| c.to_string() == s).ok_or_else(|| {
            let names: Vec<String> = CaseName::ALL.iter().map(|c| c.to_string()).collect();
            Error::InvalidArgument(format!("unknown case '{s}' ({})", names.join(", ")))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_names_round_trip() {
        for c in CaseName::ALL {
            assert_eq!(c.to_string().parse::<CaseName>().unwrap(), c);
        }
        assert!("table3-case5".parse::<CaseName>().is_err());
        assert!(table3_case(0).is_err());
    }

    #[test]
    fn table3_sizes() {
        let c1 = table3_case(1).unwrap();
        assert_eq!(c1.mesh.n_nodes(), 125);
        assert!((c1.mesh.total_measure() - 8.0).abs() < 1e-12);
        let c2 = table3_case(2).unwrap();
        assert_eq!(c2.mesh.n_nodes(), 100);
        assert!(c2.quad.direction(4).x() > 0.0 && c2.quad.direction(3).x() < 0.0);
        assert_eq!(c2.nodal.alpha[c2.nodal.idx(0, 4)], 1.0);
        assert_eq!(c2.nodal.alpha[c2.nodal.idx(99, 4)], 0.0);
    }

    #[test]
    fn first_planar_direction_is_the_reflection_beam() {
        let q = planar_quadrature(6).unwrap();
        assert_eq!(q.len(), 24);
        let d = q.direction(0);
        let expect = [0.93802334, 0.25134260, 0.23861919];
        for (a, b) in d.0.iter().zip(expect) {
            assert!((a - b).abs() < 1e-8, "{d:?}");
        }
    }

    #[test]
    fn mismatched_quadrature_is_rejected() {
        let mesh = build_uniform_1d(&[1.0], &[5]).unwrap();
        let quad = planar_quadrature(4).unwrap();
        assert!(Discretization::new(mesh, ProblemSpec::homogeneous(1.0, 0.5, 1.0), quad).is_err());
    }

    #[test]
    fn source_iteration_agrees_with_direct_on_case3() {
        let disc = table3_case(3).unwrap();
        let d = disc.solve(Scheme::Ap, &SolverOptions::default()).unwrap();
        let opts = SolverOptions {
            method: SolveMethod::SourceIteration,
            ..Default::default()
        };
        let s = disc.solve(Scheme::Ap, &opts).unwrap();
        let scale = d.field.max_abs();
        for (a, b) in d.field.values.iter().zip(&s.field.values) {
            assert!((a - b).abs() <= 10.0 * opts.tolerance * scale, "{a} vs {b}");
        }
    }
}
