//! Post-processing: moments, error norms, rates and discrete bound checks.

use std::io::Write;

use crate::angular::AngularQuadrature;
use crate::assembly::ApCoefficients;
use crate::mesh::{Mesh, MeshOperators};
use crate::problem::{BcMode, NodalData};
use crate::{Error, Result, Vec3};

/// `Ψ_ik` stored at `k * n_nodes + i`.
#[derive(Clone, Debug, PartialEq)]
pub struct AngularFluxField {
    pub n_nodes: usize,
    pub n_angles: usize,
    pub values: Vec<f64>,
}

impl AngularFluxField {
    pub fn new(values: Vec<f64>, n_nodes: usize, n_angles: usize) -> Result<Self> {
        if values.len() != n_nodes * n_angles {
            return Err(Error::InvalidArgument(format!(
                "{} values for {n_nodes} nodes × {n_angles} angles",
                values.len()
            )));
        }
        if let Some(p) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite flux at entry {p}")));
        }
        Ok(Self {
            n_nodes,
            n_angles,
            values,
        })
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[k * self.n_nodes + i]
    }

    pub fn angle(&self, k: usize) -> &[f64] {
        &self.values[k * self.n_nodes..(k + 1) * self.n_nodes]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// `Ψ̄_i = (1/|S|) Σ_k μ_k Ψ_ik`.
    pub fn scalar_flux(&self, quad: &AngularQuadrature) -> Vec<f64> {
        (0..self.n_nodes)
            .map(|i| quad.average((0..self.n_angles).map(|k| self.get(i, k))))
            .collect()
    }

    /// `J_i = (1/(ε|S|)) Σ_k μ_k Ω_k Ψ_ik`.
    pub fn current(&self, quad: &AngularQuadrature, epsilon: f64) -> Vec<Vec3> {
        let scale = 1.0 / (epsilon * quad.sphere_measure());
        (0..self.n_nodes)
            .map(|i| {
                (0..self.n_angles)
                    .map(|k| quad.direction(k) * (quad.weight(k) * self.get(i, k)))
                    .sum::<Vec3>()
                    * scale
            })
            .collect()
    }
}

/// Relative errors; `rates` are filled in by [`convergence_table`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorReport {
    pub rel_l2: f64,
    pub rel_linf: f64,
    pub rel_h1: f64,
}

fn p1_gradient(mesh: &Mesh, c: usize, v: &[f64]) -> [f64; 2] {
    let cell = mesh.cell(c);
    let measure = mesh.cell_measure(c);
    if mesh.dim() == 1 {
        [(v[cell[1]] - v[cell[0]]) / measure, 0.0]
    } else {
        let mut g = [0.0; 2];
        for a in 0..3 {
            let (b, d) = (mesh.node(cell[(a + 1) % 3]), mesh.node(cell[(a + 2) % 3]));
            g[0] += v[cell[a]] * (b[1] - d[1]) / (2.0 * measure);
            g[1] += v[cell[a]] * (d[0] - b[0]) / (2.0 * measure);
        }
        g
    }
}

/// `∫ u²` for the P1 function with nodal values `v`, exact.
pub fn p1_l2_squared(mesh: &Mesh, v: &[f64]) -> f64 {
    let d = mesh.dim() as f64;
    (0..mesh.n_cells())
        .map(|c| {
            let cell = mesh.cell(c);
            let sum: f64 = cell.iter().map(|&i| v[i]).sum();
            let sq: f64 = cell.iter().map(|&i| v[i] * v[i]).sum();
            mesh.cell_measure(c) / ((d + 1.0) * (d + 2.0)) * (sq + sum * sum)
        })
        .sum()
}

/// `∫ |∇u|²` for the P1 function with nodal values `v`.
pub fn p1_h1_seminorm_squared(mesh: &Mesh, v: &[f64]) -> f64 {
    (0..mesh.n_cells())
        .map(|c| {
            let g = p1_gradient(mesh, c, v);
            mesh.cell_measure(c) * (g[0] * g[0] + g[1] * g[1])
        })
        .sum()
}

fn ratio(num: f64, den: f64, what: &'static str) -> Result<f64> {
    if den == 0.0 {
        Err(Error::ZeroNorm(what))
    } else {
        Ok(num / den)
    }
}

/// Errors of `Ψ_k` against the Lagrange interpolant of `exact(·, Ω_k)`,
/// with `‖e‖² = Σ_k μ_k ‖e_k‖²`.
pub fn error_norms(
    mesh: &Mesh,
    field: &AngularFluxField,
    quad: &AngularQuadrature,
    exact: &dyn Fn([f64; 2], Vec3) -> f64,
) -> Result<ErrorReport> {
    let n = mesh.n_nodes();
    let (mut e2, mut x2, mut eh, mut xh, mut einf, mut xinf) = (0.0, 0.0, 0.0, 0.0, 0.0f64, 0.0f64);
    for k in 0..quad.len() {
        let w = quad.weight(k);
        let interp: Vec<f64> = (0..n).map(|i| exact(mesh.node(i), quad.direction(k))).collect();
        let err: Vec<f64> = field.angle(k).iter().zip(&interp).map(|(a, b)| a - b).collect();
        e2 += w * p1_l2_squared(mesh, &err);
        x2 += w * p1_l2_squared(mesh, &interp);
        eh += w * p1_h1_seminorm_squared(mesh, &err);
        xh += w * p1_h1_seminorm_squared(mesh, &interp);
        einf = err.iter().fold(einf, |a, v| a.max(v.abs()));
        xinf = interp.iter().fold(xinf, |a, v| a.max(v.abs()));
    }
    Ok(ErrorReport {
        rel_l2: ratio(e2.sqrt(), x2.sqrt(), "exact L2 norm")?,
        rel_linf: ratio(einf, xinf, "exact max norm")?,
        rel_h1: ratio(eh.sqrt(), xh.sqrt(), "exact H1 seminorm")?,
    })
}

/// Errors of a scalar nodal field against the interpolant of `exact`.
pub fn scalar_error_norms(mesh: &Mesh, values: &[f64], exact: &dyn Fn([f64; 2]) -> f64) -> Result<ErrorReport> {
    let interp: Vec<f64> = (0..mesh.n_nodes()).map(|i| exact(mesh.node(i))).collect();
    let err: Vec<f64> = values.iter().zip(&interp).map(|(a, b)| a - b).collect();
    let max = |v: &[f64]| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    Ok(ErrorReport {
        rel_l2: ratio(
            p1_l2_squared(mesh, &err).sqrt(),
            p1_l2_squared(mesh, &interp).sqrt(),
            "exact L2 norm",
        )?,
        rel_linf: ratio(max(&err), max(&interp), "exact max norm")?,
        rel_h1: ratio(
            p1_h1_seminorm_squared(mesh, &err).sqrt(),
            p1_h1_seminorm_squared(mesh, &interp).sqrt(),
            "exact H1 seminorm",
        )?,
    })
}

/// Relative L² distance between two nodal fields.
pub fn relative_l2_difference(mesh: &Mesh, a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    (p1_l2_squared(mesh, &diff) / p1_l2_squared(mesh, b)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub dofs: usize,
    pub errors: ErrorReport,
    /// Observed orders against the previous row, `None` on the first.
    pub rates: Option<ErrorReport>,
}

/// `log(e_m/e_{m+1}) / log(h_m/h_{m+1})` with `h ∝ dofs^{-1/d}`.
pub fn observed_rate(e0: f64, e1: f64, dofs0: usize, dofs1: usize, dim: usize) -> f64 {
    let h0 = (dofs0 as f64).powf(-1.0 / dim as f64);
    let h1 = (dofs1 as f64).powf(-1.0 / dim as f64);
    (e0 / e1).ln() / (h0 / h1).ln()
}

pub fn convergence_table(rows: &[(usize, ErrorReport)], dim: usize) -> Vec<ConvergenceRow> {
    rows.iter()
        .enumerate()
        .map(|(m, &(dofs, errors))| ConvergenceRow {
            dofs,
            errors,
            rates: (m > 0).then(|| {
                let (d0, e0) = rows[m - 1];
                ErrorReport {
                    rel_l2: observed_rate(e0.rel_l2, errors.rel_l2, d0, dofs, dim),
                    rel_linf: observed_rate(e0.rel_linf, errors.rel_linf, d0, dofs, dim),
                    rel_h1: observed_rate(e0.rel_h1, errors.rel_h1, d0, dofs, dim),
                }
            }),
        })
        .collect()
}

/// One row per mesh, `%.6e` formatting, empty rate cells on the first row.
pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], mut w: W) -> Result<()> {
    writeln!(w, "dofs,rel_l2,rate_l2,rel_linf,rate_linf,rel_h1,rate_h1")?;
    for r in rows {
        let rate = |f: fn(&ErrorReport) -> f64| r.rates.as_ref().map(|x| format!("{:.6e}", f(x))).unwrap_or_default();
        writeln!(
            w,
            "{},{:.6e},{},{:.6e},{},{:.6e},{}",
            r.dofs,
            r.errors.rel_l2,
            rate(|e| e.rel_l2),
            r.errors.rel_linf,
            rate(|e| e.rel_linf),
            r.errors.rel_h1,
            rate(|e| e.rel_h1),
        )?;
    }
    Ok(())
}

/// Realized extrema and the discrete bounds that apply to them.
#[derive(Clone, Debug, Default)]
pub struct BoundReport {
    pub psi_min: f64,
    pub psi_max: f64,
    /// Two-sided bound, when every `σ_a,j + b_jl > 0`.
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Data are nonnegative, so `Ψ^min ≥ 0` is required.
    pub nonnegative: bool,
    /// Source is nonpositive: `Ψ^max` is bounded by the largest inflow target.
    pub inflow_max: Option<f64>,
    pub violations: Vec<String>,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Min/max principle check. With `coeffs` the bounds of the AP scheme are
/// used (targets `β`, penalty `b/(σ_s h + 1)`); without, those of the
/// graph-viscosity scheme (targets `α`, penalty `b`).
pub fn check_minmax_bounds(
    field: &AngularFluxField,
    nodal: &NodalData,
    ops: &MeshOperators,
    coeffs: Option<&ApCoefficients>,
) -> BoundReport {
    let n = field.n_nodes;
    let target = |row: usize| coeffs.map_or(nodal.alpha[row], |c| c.beta[row]);
    let penalty = |i: usize, row: usize| match coeffs {
        Some(c) => nodal.b[row] / (nodal.sigma_s[i] * c.h_node[i] + 1.0),
        None => nodal.b[row],
    };
    let (mut rmin, mut rmax) = (0, 0);
    for (r, &v) in field.values.iter().enumerate() {
        if v < field.values[rmin] {
            rmin = r;
        }
        if v > field.values[rmax] {
            rmax = r;
        }
    }
    let mut rep = BoundReport {
        psi_min: field.values[rmin],
        psi_max: field.values[rmax],
        ..Default::default()
    };
    // strongly imposed inflow acts as an infinite penalty
    let pinned = |row: usize| nodal.bc_mode == BcMode::Strong && nodal.pinned[row];
    let bound = |row: usize| {
        if pinned(row) {
            return target(row);
        }
        let i = row % n;
        let p = penalty(i, row);
        (ops.m[i] * nodal.q[row] + p * target(row)) / (ops.m[i] * nodal.sigma_a[i] + p)
    };
    let strictly_absorbing =
        (0..field.values.len()).all(|row| pinned(row) || nodal.sigma_a[row % n] + nodal.b[row] > 0.0);
    if strictly_absorbing {
        rep.lower = Some(bound(rmin));
        rep.upper = Some(bound(rmax));
    }
    rep.nonnegative = nodal.q.iter().all(|&q| q >= 0.0) && nodal.alpha.iter().all(|&a| a >= 0.0);
    if nodal.q.iter().all(|&q| q <= 0.0) {
        rep.inflow_max = (0..field.values.len())
            .filter(|&row| pinned(row) || nodal.b[row] > 0.0)
            .map(target)
            .reduce(f64::max);
    }

    let scale = [
        field.max_abs(),
        rep.lower.unwrap_or(0.0).abs(),
        rep.upper.unwrap_or(0.0).abs(),
    ]
    .into_iter()
    .fold(f64::MIN_POSITIVE, f64::max);
    let tol = 1e-10 * scale;
    if let Some(lo) = rep.lower {
        if rep.psi_min < lo - tol {
            rep.violations
                .push(format!("minimum {:.6e} below bound {lo:.6e}", rep.psi_min));
        }
    }
    if let Some(hi) = rep.upper {
        if rep.psi_max > hi + tol {
            rep.violations
                .push(format!("maximum {:.6e} above bound {hi:.6e}", rep.psi_max));
        }
    }
    if rep.nonnegative && rep.psi_min < -tol {
        rep.violations
            .push(format!("negative minimum {:.6e} with nonnegative data", rep.psi_min));
    }
    if let Some(hi) = rep.inflow_max {
        if rep.psi_max > hi + tol {
            rep.violations
                .push(format!("maximum {:.6e} above inflow bound {hi:.6e}", rep.psi_max));
        }
    }
    rep
}

/// `max_i Ψ̄_i − min_i Ψ̄_i`.
pub fn locking_spread(scalar_flux: &[f64]) -> f64 {
    let max = scalar_flux.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = scalar_flux.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

/// Discrete Fick's law residual on interior dofs,
/// `m_i J_i + Σ_j (h_i/h_ij) (1/(3σ_s,ij)) c_ij (Ψ̄_j − Ψ̄_i)`, with `J`
/// built from the rescaled field and `σ_s,ij` the unscaled pair value.
/// `nodal` and `coeffs` hold the rescaled (effective) data. Boundary dofs
/// get zero.
pub fn fick_residual(
    field: &AngularFluxField,
    quad: &AngularQuadrature,
    ops: &MeshOperators,
    coeffs: &ApCoefficients,
    epsilon: f64,
) -> Vec<Vec3> {
    let phi = field.scalar_flux(quad);
    let current = field.current(quad, epsilon);
    (0..ops.n_dofs())
        .map(|i| {
            if ops.on_boundary[i] {
                return Vec3::ZERO;
            }
            let mut r = current[i] * ops.m[i];
            for e in ops.row(i) {
                let j = ops.cols[e];
                if j == i {
                    continue;
                }
                let sigma = epsilon * coeffs.sigma_s_pair[e];
                r += ops.c[e] * (coeffs.h_node[i] / coeffs.h_pair[e] / (3.0 * sigma) * (phi[j] - phi[i]));
            }
            r
        })
        .collect()
}
