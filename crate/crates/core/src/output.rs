//! Field writers: legacy ASCII VTK and CSV, fixed `{:.6e}` formatting so
//! identical runs produce identical files.

use std::io::Write;

use crate::analysis::AngularFluxField;
use crate::angular::AngularQuadrature;
use crate::mesh::Mesh;
use crate::{Error, Result};

fn check(mesh: &Mesh, field: &AngularFluxField, quad: &AngularQuadrature) -> Result<()> {
    if field.n_nodes != mesh.n_nodes() || field.n_angles != quad.len() {
        return Err(Error::InvalidArgument(format!(
            "field is {}x{}, mesh has {} nodes and quadrature {} directions",
            field.n_nodes,
            field.n_angles,
            mesh.n_nodes(),
            quad.len()
        )));
    }
    Ok(())
}

/// Unstructured grid with point data `scalar_flux` and `psi_<k>` for every
/// direction in `angles`. Points sit at `z = 0`.
pub fn write_vtk<W: Write>(
    mesh: &Mesh,
    field: &AngularFluxField,
    quad: &AngularQuadrature,
    angles: &[usize],
    mut w: W,
) -> Result<()> {
    check(mesh, field, quad)?;
    if let Some(&k) = angles.iter().find(|&&k| k >= quad.len()) {
        return Err(Error::InvalidArgument(format!("direction {k} out of range")));
    }
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "angular flux")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.n_nodes())?;
    for p in mesh.nodes() {
        let y = if mesh.dim() == 1 { 0.0 } else { p[1] };
        writeln!(w, "{:.6e} {:.6e} 0", p[0], y)?;
    }
    let per = mesh.dim() + 1;
    writeln!(w, "CELLS {} {}", mesh.n_cells(), mesh.n_cells() * (per + 1))?;
    for c in mesh.cells() {
        let ids: Vec<String> = c.iter().map(usize::to_string).collect();
        writeln!(w, "{per} {}", ids.join(" "))?;
    }
    writeln!(w, "CELL_TYPES {}", mesh.n_cells())?;
    let kind = if mesh.dim() == 1 { 3 } else { 5 };
    for _ in 0..mesh.n_cells() {
        writeln!(w, "{kind}")?;
    }
    writeln!(w, "CELL_DATA {}", mesh.n_cells())?;
    writeln!(w, "SCALARS region int 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for r in mesh.regions() {
        writeln!(w, "{r}")?;
    }
    writeln!(w, "POINT_DATA {}", mesh.n_nodes())?;
    let mut scalars = |name: &str, values: &[f64]| -> Result<()> {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in values {
            writeln!(w, "{v:.6e}")?;
        }
        Ok(())
    };
    scalars("scalar_flux", &field.scalar_flux(quad))?;
    for &k in angles {
        scalars(&format!("psi_{k}"), field.angle(k))?;
    }
    Ok(())
}

/// One row per node: `node,x1,x2,scalar_flux,psi_0,...`.
pub fn write_flux_csv<W: Write>(
    mesh: &Mesh,
    field: &AngularFluxField,
    quad: &AngularQuadrature,
    mut w: W,
) -> Result<()> {
    check(mesh, field, quad)?;
    write!(w, "node,x1,x2,scalar_flux")?;
    for k in 0..field.n_angles {
        write!(w, ",psi_{k}")?;
    }
    writeln!(w)?;
    let phi = field.scalar_flux(quad);
    for (i, p) in mesh.nodes().iter().enumerate() {
        let y = if mesh.dim() == 1 { 0.0 } else { p[1] };
        write!(w, "{i},{:.6e},{:.6e},{:.6e}", p[0], y, phi[i])?;
        for k in 0..field.n_angles {
            write!(w, ",{:.6e}", field.get(i, k))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_uniform_1d, SquareMeshBuilder};

    #[test]
    fn vtk_sections_match_mesh() {
        let mesh = SquareMeshBuilder::new(4).build().unwrap();
        let quad = crate::cases::planar_quadrature(2).unwrap();
        let n = mesh.n_nodes();
        let field = AngularFluxField::new(vec![1.0; n * quad.len()], n, quad.len()).unwrap();
        let mut buf = Vec::new();
        write_vtk(&mesh, &field, &quad, &[0, 1], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains(&format!("POINTS {n} double")));
        assert!(text.contains(&format!("CELLS {} {}", mesh.n_cells(), 4 * mesh.n_cells())));
        assert!(text.contains("SCALARS psi_1 double 1"));
        assert_eq!(text.lines().filter(|l| *l == "5").count(), mesh.n_cells());
        assert!(write_vtk(&mesh, &field, &quad, &[99], Vec::new()).is_err());
    }

    #[test]
    fn csv_has_one_row_per_node() {
        let mesh = build_uniform_1d(&[1.0], &[3]).unwrap();
        let quad = AngularQuadrature::slab(2).unwrap();
        let field = AngularFluxField::new(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 3, 2).unwrap();
        let mut buf = Vec::new();
        write_flux_csv(&mesh, &field, &quad, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "node,x1,x2,scalar_flux,psi_0,psi_1");
        assert_eq!(lines[1], "0,0.000000e0,0.000000e0,2.500000e0,1.000000e0,4.000000e0");
        assert_eq!(lines.len(), 4);
    }
}
