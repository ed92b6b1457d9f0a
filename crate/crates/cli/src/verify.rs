use std::io::Write;

use anyhow::Result;

use apsn::angular::AngularQuadrature;
use apsn::assembly::Scheme;
use apsn::cases::{planar_quadrature, Discretization, SolverOptions};
use apsn::mesh::{build_operators, build_uniform_1d, sigma_tilde, Mesh, SquareMeshBuilder};
use apsn::problem::{BcMode, Inflow, ProblemSpec, Side};

struct Checker<'a> {
    out: &'a mut dyn Write,
    failures: usize,
}

impl Checker<'_> {
    fn check(&mut self, name: &str, outcome: std::result::Result<(), String>) -> Result<()> {
        match outcome {
            Ok(()) => writeln!(self.out, "ok    {name}")?,
            Err(why) => {
                self.failures += 1;
                writeln!(self.out, "FAIL  {name}: {why}")?;
            }
        }
        Ok(())
    }
}

fn quadrature(q: &AngularQuadrature) -> std::result::Result<(), String> {
    q.validate().map_err(|e| e.to_string())
}

fn operators(mesh: &Mesh) -> std::result::Result<(), String> {
    let cells: Vec<f64> = (0..mesh.n_cells()).map(|c| 1.0 + (c % 3) as f64).collect();
    let ops = build_operators(mesh, &sigma_tilde(&cells, mesh.diameter())).map_err(|e| e.to_string())?;
    let cmax = ops.c.iter().fold(0.0f64, |a, v| a.max(v.max_abs()));
    let dmax = ops.c_diff.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for i in 0..ops.n_dofs() {
        let s = ops.row(i).fold(apsn::Vec3::ZERO, |acc, e| acc + ops.c[e]);
        if s.max_abs() > 1e-12 * cmax {
            return Err(format!("row {i}: sum c_ij = {:.3e}", s.max_abs()));
        }
        let sd: f64 = ops.row(i).map(|e| ops.c_diff[e]).sum();
        if sd.abs() > 1e-12 * dmax {
            return Err(format!("row {i}: sum c^d_ij = {sd:.3e}"));
        }
    }
    let mass: f64 = ops.m.iter().sum();
    let area = mesh.total_measure();
    if (mass - area).abs() > 1e-10 * area {
        return Err(format!("lumped mass {mass} vs measure {area}"));
    }
    Ok(())
}

fn bounds(disc: &Discretization, scheme: Scheme) -> std::result::Result<(), String> {
    let sol = disc
        .solve(scheme, &SolverOptions::default())
        .map_err(|e| e.to_string())?;
    if scheme == Scheme::Ap {
        let matrix = disc.system(scheme).to_sparse().matrix;
        let positive = matrix.triplets().find(|&(r, c, v)| r != c && v > 0.0);
        if let Some((r, c, v)) = positive {
            return Err(format!("positive off-diagonal {v:.3e} at ({r}, {c})"));
        }
    }
    match disc.bounds(scheme, &sol.field) {
        Some(b) if !b.passed() => Err(b.violations.join("; ")),
        _ => Ok(()),
    }
}

/// Runs every check, writing one line each; returns the number of failures.
pub fn run(out: &mut dyn Write) -> Result<usize> {
    let mut ck = Checker { out, failures: 0 };
    for order in (2..=12).step_by(2) {
        ck.check(
            &format!("quadrature S{order}"),
            quadrature(&AngularQuadrature::triangular_sn(order)?),
        )?;
        ck.check(
            &format!("quadrature S{order} planar"),
            quadrature(&planar_quadrature(order)?),
        )?;
    }
    for n in (2..=16).step_by(2) {
        ck.check(
            &format!("quadrature slab {n}"),
            quadrature(&AngularQuadrature::slab(n)?),
        )?;
    }
    let meshes = [
        ("zoned slab", build_uniform_1d(&[2.0, 1.0, 2.0, 1.0, 2.0], &[25; 5])?),
        ("square", SquareMeshBuilder::new(21).build()?),
        (
            "split square",
            SquareMeshBuilder::new(17).split_x2(0.5).side(2.0).build()?,
        ),
    ];
    for (name, mesh) in &meshes {
        ck.check(&format!("operator identities, {name} mesh"), operators(mesh))?;
    }
    let smoke = [
        (
            "absorbing square",
            Discretization::new(
                SquareMeshBuilder::new(11).build()?,
                ProblemSpec::homogeneous(2.0, 1.0, 1.0).with_inflow(Inflow::Isotropic(0.5)),
                planar_quadrature(4)?,
            )?,
        ),
        (
            "scattering square, strong inflow",
            Discretization::new(
                SquareMeshBuilder::new(11).build()?,
                ProblemSpec::homogeneous(10.0, 10.0, 1.0)
                    .with_inflow(Inflow::Isotropic(1.0))
                    .with_bc_mode(BcMode::Strong),
                planar_quadrature(4)?,
            )?,
        ),
        (
            "beam slab",
            Discretization::new(
                build_uniform_1d(&[5.0], &[40])?,
                ProblemSpec::homogeneous(20.0, 19.0, 0.0).with_inflow(Inflow::Beam {
                    direction: 7,
                    value: 1.0,
                    side: Some(Side::Left),
                }),
                AngularQuadrature::slab(8)?,
            )?,
        ),
    ];
    for (name, disc) in &smoke {
        for scheme in [Scheme::GraphViscosity, Scheme::Ap] {
            ck.check(&format!("min/max bounds, {name}, {scheme:?}"), bounds(disc, scheme))?;
        }
    }
    Ok(ck.failures)
}
