//! Galerkin, graph-viscosity and asymptotic-preserving systems.
//!
//! All transport schemes share one row shape:
//!
//! ```text
//! Σ_{j≠i} a^k_ij (Ψ_jk − Ψ_ik) + r_i Ψ_ik + s_i (Ψ_ik − Ψ̄_i) + b'_ik (Ψ_ik − g_ik) = m_i q_ik
//! ```
//!
//! and differ only in the pair coefficient `a`, the scattering weight `s`,
//! the penalty `b'` and the boundary target `g`.

use crate::angular::AngularQuadrature;
use crate::mesh::MeshOperators;
use crate::problem::{BcMode, NodalData};
use crate::sparse::{CsrMatrix, SparseSystem, TransportSystem};
use crate::{Error, Result, Vec3};

/// Relative size of the strict-inequality bump added to every `d_ij^k`.
pub const VISCOSITY_BUMP: f64 = 1e-12;

/// Threshold below which `|k_ij|` is treated as zero relative to its row.
pub const PAIR_FALLBACK_RATIO: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Galerkin,
    GraphViscosity,
    Ap,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "galerkin" => Ok(Self::Galerkin),
            "gv" => Ok(Self::GraphViscosity),
            "ap" => Ok(Self::Ap),
            _ => Err(Error::InvalidArgument(format!(
                "unknown scheme '{s}' (galerkin, gv, ap)"
            ))),
        }
    }
}

/// Graph viscosity `d_ij^k` stored at `k * nnz + e` on the operator pattern.
#[derive(Clone, Debug)]
pub struct Viscosity {
    pub nnz: usize,
    pub d: Vec<f64>,
}

impl Viscosity {
    pub fn get(&self, k: usize, e: usize) -> f64 {
        self.d[k * self.nnz + e]
    }

    pub fn zero(ops: &MeshOperators, quad: &AngularQuadrature) -> Self {
        Self {
            nnz: ops.nnz(),
            d: vec![0.0; ops.nnz() * quad.len()],
        }
    }
}

/// `d_ij^k = max(Ω_k·c_ij, Ω_k·c_ji, 0) + bump·(|c_ij| + |c_ji|)` off the diagonal.
pub fn graph_viscosity(ops: &MeshOperators, quad: &AngularQuadrature) -> Viscosity {
    let nnz = ops.nnz();
    let mut d = vec![0.0; nnz * quad.len()];
    for (k, omega) in quad.directions().iter().enumerate() {
        for i in 0..ops.n_dofs() {
            for e in ops.row(i) {
                if ops.cols[e] == i {
                    continue;
                }
                let t = ops.transpose[e];
                let raw = omega.dot(&ops.c[e]).max(omega.dot(&ops.c[t])).max(0.0);
                d[k * nnz + e] = raw + VISCOSITY_BUMP * (ops.c[e].norm() + ops.c[t].norm());
            }
        }
    }
    Viscosity { nnz, d }
}

/// Coefficients of the asymptotic-preserving scheme.
#[derive(Clone, Debug)]
pub struct ApCoefficients {
    pub viscosity: Viscosity,
    /// `σ_s,ij = (σ_s,i + σ_s,j)/2` on the pattern.
    pub sigma_s_pair: Vec<f64>,
    /// `h_ij` on the pattern, zero on the diagonal.
    pub h_pair: Vec<f64>,
    pub h_node: Vec<f64>,
    /// Boundary quantities, zero on interior dofs.
    pub theta: Vec<f64>,
    pub delta_bnd: Vec<f64>,
    pub m_frak: Vec<f64>,
    pub big_m_frak: Vec<Vec3>,
    /// `β_ik`, angle major like the nodal data.
    pub beta: Vec<f64>,
    pub fallback_pairs: usize,
}

impl ApCoefficients {
    /// `½𝔪_i − 3𝕸_i·n_i`, the diffusive boundary value.
    pub fn diffusive_boundary_value(&self, ops: &MeshOperators, i: usize) -> f64 {
        0.5 * self.m_frak[i] - 3.0 * self.big_m_frak[i].dot(&ops.n_bnd[i])
    }
}

pub fn ap_coefficients(ops: &MeshOperators, nodal: &NodalData, quad: &AngularQuadrature) -> Result<ApCoefficients> {
    ap_coefficients_scaled(ops, nodal, quad, 1.0)
}

/// As [`ap_coefficients`] for the unscaled nodal data of a problem with
/// scaling parameter `epsilon`, which only enters through
/// `θ^ε = max(1 − 2σ_s,i h_i/ε, 0)`.
pub fn ap_coefficients_scaled(
    ops: &MeshOperators,
    nodal: &NodalData,
    quad: &AngularQuadrature,
    epsilon: f64,
) -> Result<ApCoefficients> {
    let n = ops.n_dofs();
    let nnz = ops.nnz();
    let viscosity = graph_viscosity(ops, quad);
    let s = quad.sphere_measure();

    let mut sigma_s_pair = vec![0.0; nnz];
    let mut h_pair = vec![0.0; nnz];
    let mut h_node = vec![0.0; n];
    let mut fallback_pairs = 0;
    for i in 0..n {
        let r = ops.row(i);
        let scale = ops.stiffness[r.clone()].iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut count = 0;
        for e in r {
            let j = ops.cols[e];
            sigma_s_pair[e] = 0.5 * (nodal.sigma_s[i] + nodal.sigma_s[j]);
            if j == i {
                continue;
            }
            let mean_d: f64 = (0..quad.len())
                .map(|k| quad.weight(k) * viscosity.get(k, e))
                .sum::<f64>()
                / s;
            let kij = ops.stiffness[e].abs();
            h_pair[e] = if kij < PAIR_FALLBACK_RATIO * scale {
                fallback_pairs += 1;
                ops.h_geo[i]
            } else {
                3.0 * mean_d / kij
            };
            h_node[i] += h_pair[e];
            count += 1;
        }
        if count == 0 {
            return Err(Error::EmptyAdjacency { node: i });
        }
        h_node[i] /= count as f64;
    }
    if fallback_pairs > 0 {
        log::warn!("{fallback_pairs} pairs with vanishing stiffness use the geometric size");
    }

    let l = quad.len();
    let mut theta = vec![0.0; n];
    let mut delta_bnd = vec![0.0; n];
    let mut m_frak = vec![0.0; n];
    let mut big_m_frak = vec![Vec3::ZERO; n];
    let mut beta = vec![0.0; n * l];
    for i in ops.boundary_dofs() {
        let normal = ops.n_bnd[i];
        for k in quad.inflow_set(normal) {
            let omega = quad.direction(k);
            let w = quad.weight(k) * omega.dot(&normal).abs();
            let a = nodal.alpha[nodal.idx(i, k)];
            delta_bnd[i] += w / s;
            m_frak[i] += 4.0 * w * a / s;
            big_m_frak[i] += omega * (w * a / s);
        }
        theta[i] = (1.0 - 2.0 * nodal.sigma_s[i] * h_node[i] / epsilon).max(0.0);
        let diffusive = 0.5 * m_frak[i] - 3.0 * big_m_frak[i].dot(&normal);
        for k in 0..l {
            let a = nodal.alpha[nodal.idx(i, k)];
            beta[nodal.idx(i, k)] = theta[i] * a + (1.0 - theta[i]) * diffusive;
        }
    }
    Ok(ApCoefficients {
        viscosity,
        sigma_s_pair,
        h_pair,
        h_node,
        theta,
        delta_bnd,
        m_frak,
        big_m_frak,
        beta,
        fallback_pairs,
    })
}

struct RowModel<'a> {
    /// Off-diagonal `a^k_ij` for direction `k` and pattern entry `e`.
    pair: &'a dyn Fn(usize, usize) -> f64,
    absorb: &'a [f64],
    scatter: &'a [f64],
    /// Divisor applied to the penalty `b_ik`.
    relax: &'a [f64],
    source_scale: f64,
    target: &'a [f64],
}

fn assemble(ops: &MeshOperators, nodal: &NodalData, quad: &AngularQuadrature, model: RowModel<'_>) -> TransportSystem {
    let (n, l, nnz) = (ops.n_dofs(), quad.len(), ops.nnz());
    let mut blocks = vec![0.0; l * nnz];
    let mut scatter = vec![0.0; l * n];
    let mut rhs = vec![0.0; l * n];
    let strong = nodal.bc_mode == BcMode::Strong;
    for k in 0..l {
        let vals = &mut blocks[k * nnz..(k + 1) * nnz];
        for i in 0..n {
            let row = nodal.idx(i, k);
            let diag = ops.diag(i);
            if strong && nodal.pinned[row] {
                vals[diag] = 1.0;
                rhs[row] = model.target[row];
                continue;
            }
            let mut off_sum = 0.0;
            for e in ops.row(i) {
                if e != diag {
                    let a = (model.pair)(k, e);
                    vals[e] = a;
                    off_sum += a;
                }
            }
            let b = nodal.b[row] / model.relax[i];
            vals[diag] = -off_sum + model.absorb[i] + model.scatter[i] + b;
            scatter[row] = model.scatter[i];
            rhs[row] = ops.m[i] * nodal.q[row] * model.source_scale + b * model.target[row];
        }
    }
    TransportSystem {
        n_nodes: n,
        n_angles: l,
        row_ptr: ops.row_ptr.clone(),
        cols: ops.cols.clone(),
        blocks,
        scatter,
        weights: quad.weights().iter().map(|w| w / quad.sphere_measure()).collect(),
        rhs,
    }
}

/// Centered scheme with lumped mass and boundary penalty.
pub fn assemble_galerkin(nodal: &NodalData, ops: &MeshOperators, quad: &AngularQuadrature) -> TransportSystem {
    assemble_graph_viscosity(nodal, ops, quad, &Viscosity::zero(ops, quad))
}

/// Galerkin with `Ω_k·c_ij` replaced by `Ω_k·c_ij − d_ij^k`.
pub fn assemble_graph_viscosity(
    nodal: &NodalData,
    ops: &MeshOperators,
    quad: &AngularQuadrature,
    visc: &Viscosity,
) -> TransportSystem {
    let dirs = quad.directions();
    let pair = |k: usize, e: usize| dirs[k].dot(&ops.c[e]) - visc.get(k, e);
    let absorb: Vec<f64> = (0..ops.n_dofs()).map(|i| ops.m[i] * nodal.sigma_a[i]).collect();
    let scatter: Vec<f64> = (0..ops.n_dofs()).map(|i| ops.m[i] * nodal.sigma_s[i]).collect();
    let relax = vec![1.0; ops.n_dofs()];
    assemble(
        ops,
        nodal,
        quad,
        RowModel {
            pair: &pair,
            absorb: &absorb,
            scatter: &scatter,
            relax: &relax,
            source_scale: 1.0,
            target: &nodal.alpha,
        },
    )
}

pub fn assemble_ap(
    nodal: &NodalData,
    ops: &MeshOperators,
    quad: &AngularQuadrature,
    coeffs: &ApCoefficients,
) -> TransportSystem {
    assemble_ap_impl(nodal, ops, quad, coeffs, 1.0)
}

/// The rescaled scheme written with an explicit `ε` on unscaled nodal data:
/// `σ_s → σ_s/ε`, `σ_a → ε σ_a`, `q → ε q`. `coeffs` must come from
/// [`ap_coefficients_scaled`] with the same `ε`.
pub fn assemble_ap_rescaled(
    nodal: &NodalData,
    ops: &MeshOperators,
    quad: &AngularQuadrature,
    coeffs: &ApCoefficients,
    epsilon: f64,
) -> TransportSystem {
    assemble_ap_impl(nodal, ops, quad, coeffs, epsilon)
}

fn assemble_ap_impl(
    nodal: &NodalData,
    ops: &MeshOperators,
    quad: &AngularQuadrature,
    coeffs: &ApCoefficients,
    eps: f64,
) -> TransportSystem {
    let n = ops.n_dofs();
    let dirs = quad.directions();
    let visc = &coeffs.viscosity;
    let pair = |k: usize, e: usize| {
        (dirs[k].dot(&ops.c[e]) - visc.get(k, e)) / (coeffs.sigma_s_pair[e] * coeffs.h_pair[e] / eps + 1.0)
    };
    let relax: Vec<f64> = (0..n)
        .map(|i| nodal.sigma_s[i] * coeffs.h_node[i] / eps + 1.0)
        .collect();
    let absorb: Vec<f64> = (0..n).map(|i| ops.m[i] * eps * nodal.sigma_a[i]).collect();
    let scatter: Vec<f64> = (0..n).map(|i| ops.m[i] * nodal.sigma_s[i] / eps / relax[i]).collect();
    assemble(
        ops,
        nodal,
        quad,
        RowModel {
            pair: &pair,
            absorb: &absorb,
            scatter: &scatter,
            relax: &relax,
            source_scale: eps,
            target: &coeffs.beta,
        },
    )
}

/// Limit system for `Ψ⁰` (size `n`):
///
/// ```text
/// (m_i^∂/(σ_s,i h_i)) δ_i Ψ_i + (1/3) Σ_j c^d_ij Ψ_j + m_i σ_a,i Ψ_i
///     = m_i q̄_i + (m_i^∂/(σ_s,i h_i)) δ_i (½𝔪_i − 3𝕸_i·n_i)
/// ```
pub fn assemble_diffusion_limit(
    nodal: &NodalData,
    ops: &MeshOperators,
    quad: &AngularQuadrature,
    coeffs: &ApCoefficients,
) -> Result<SparseSystem> {
    let n = ops.n_dofs();
    let q_bar = nodal.q_bar(quad);
    let mut t = Vec::with_capacity(ops.nnz() + n);
    let mut rhs = vec![0.0; n];
    for i in 0..n {
        for e in ops.row(i) {
            t.push((i, ops.cols[e], ops.c_diff[e] / 3.0));
        }
        let mut diag = ops.m[i] * nodal.sigma_a[i];
        rhs[i] = ops.m[i] * q_bar[i];
        if ops.on_boundary[i] {
            let sh = nodal.sigma_s[i] * coeffs.h_node[i];
            if !(sh > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "diffusion limit needs scattering at boundary dof {i}"
                )));
            }
            let pen = ops.m_bnd[i] / sh * coeffs.delta_bnd[i];
            diag += pen;
            rhs[i] += pen * coeffs.diffusive_boundary_value(ops, i);
        }
        t.push((i, i, diag));
    }
    Ok(SparseSystem {
        matrix: CsrMatrix::from_triplets(n, n, t),
        rhs,
        n_nodes: n,
        n_angles: 1,
    })
}
