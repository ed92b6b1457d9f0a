//! Simplicial meshes (segments in 1D, triangles in 2D) and their P1
//! geometric operators.

mod generate;
mod io;
mod operators;

pub use generate::{build_uniform_1d, Lattice, SquareMeshBuilder};
pub use io::{read_mesh, write_mesh};
pub use operators::{build_operators, sigma_tilde, MeshOperators, SIGMA_TILDE_FLOOR};

use std::collections::HashMap;

use crate::{Error, Result};

/// A face lying on the domain boundary, with its outward unit normal.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryFace {
    pub cell: usize,
    /// One vertex in 1D, two in 2D.
    pub nodes: Vec<usize>,
    pub normal: [f64; 2],
    /// Length of the edge in 2D; 1 for a 1D end point.
    pub measure: f64,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    dim: usize,
    nodes: Vec<[f64; 2]>,
    cells: Vec<usize>,
    regions: Vec<usize>,
    boundary_faces: Vec<BoundaryFace>,
}

impl Mesh {
    /// Validates and orients a mesh. `cells` is flat with `dim + 1` vertex
    /// indices per cell; 1D coordinates use the first component only.
    pub fn new(dim: usize, nodes: Vec<[f64; 2]>, mut cells: Vec<usize>, regions: Vec<usize>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidArgument(format!("unsupported dimension {dim}")));
        }
        let nv = dim + 1;
        if !cells.len().is_multiple_of(nv) {
            return Err(Error::InvalidArgument("cell array length".into()));
        }
        let n_cells = cells.len() / nv;
        if regions.len() != n_cells {
            return Err(Error::InvalidArgument(format!(
                "{} region ids for {n_cells} cells",
                regions.len()
            )));
        }
        if nodes.is_empty() || n_cells == 0 {
            return Err(Error::InvalidArgument("empty mesh".into()));
        }
        for (c, cell) in cells.chunks_mut(nv).enumerate() {
            for (a, &v) in cell.iter().enumerate() {
                if v >= nodes.len() {
                    return Err(Error::DegenerateCell {
                        cell: c,
                        msg: format!("vertex index {v} out of range"),
                    });
                }
                if cell[..a].contains(&v) {
                    return Err(Error::DegenerateCell {
                        cell: c,
                        msg: format!("repeated vertex {v}"),
                    });
                }
            }
            let m = signed_measure(&nodes, cell);
            if m == 0.0 || !m.is_finite() {
                return Err(Error::DegenerateCell {
                    cell: c,
                    msg: "zero measure".into(),
                });
            }
            if m < 0.0 {
                cell.swap(0, 1);
            }
        }
        let mut mesh = Self {
            dim,
            nodes,
            cells,
            regions,
            boundary_faces: Vec::new(),
        };
        mesh.boundary_faces = mesh.find_boundary_faces()?;
        let components = mesh.count_components();
        if components != 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(mesh)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_cells(&self) -> usize {
        self.regions.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> [f64; 2] {
        self.nodes[i]
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        let nv = self.dim + 1;
        &self.cells[c * nv..(c + 1) * nv]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[usize]> {
        self.cells.chunks(self.dim + 1)
    }

    pub fn region(&self, c: usize) -> usize {
        self.regions[c]
    }

    pub fn regions(&self) -> &[usize] {
        &self.regions
    }

    pub fn boundary_faces(&self) -> &[BoundaryFace] {
        &self.boundary_faces
    }

    /// Length (1D) or area (2D) of a cell.
    pub fn cell_measure(&self, c: usize) -> f64 {
        signed_measure(&self.nodes, self.cell(c))
    }

    pub fn cell_centroid(&self, c: usize) -> [f64; 2] {
        let cell = self.cell(c);
        let k = cell.len() as f64;
        let mut out = [0.0; 2];
        for &v in cell {
            out[0] += self.nodes[v][0] / k;
            out[1] += self.nodes[v][1] / k;
        }
        out
    }

    pub fn total_measure(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_measure(c)).sum()
    }

    /// Diagonal of the bounding box (the diameter for the convex domains used here).
    pub fn diameter(&self) -> f64 {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.nodes {
            for a in 0..2 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt()
    }

    /// Cell lists per node, `T(i)`.
    pub fn node_cells(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_nodes()];
        for (c, cell) in self.cells().enumerate() {
            for &v in cell {
                out[v].push(c);
            }
        }
        out
    }

    /// Nodes lying on at least one boundary face.
    pub fn boundary_nodes(&self) -> Vec<bool> {
        let mut out = vec![false; self.n_nodes()];
        for f in &self.boundary_faces {
            for &v in &f.nodes {
                out[v] = true;
            }
        }
        out
    }

    fn find_boundary_faces(&self) -> Result<Vec<BoundaryFace>> {
        let mut incidence: HashMap<Vec<usize>, Vec<(usize, usize)>> = HashMap::new();
        for (c, cell) in self.cells().enumerate() {
            for local in 0..cell.len() {
                let mut face = face_nodes(cell, local);
                face.sort_unstable();
                incidence.entry(face).or_default().push((c, local));
            }
        }
        let mut faces = Vec::new();
        for (key, owners) in incidence {
            if owners.len() > 2 {
                return Err(Error::NonManifold {
                    face: key,
                    count: owners.len(),
                });
            }
            if owners.len() == 1 {
                let (c, local) = owners[0];
                faces.push(self.boundary_face(c, local));
            }
        }
        faces.sort_by(|a, b| (a.cell, &a.nodes).cmp(&(b.cell, &b.nodes)));
        Ok(faces)
    }

    fn boundary_face(&self, c: usize, local: usize) -> BoundaryFace {
        let cell = self.cell(c);
        let nodes = face_nodes(cell, local);
        let opposite = self.nodes[cell[local]];
        let (normal, measure) = if self.dim == 1 {
            let x = self.nodes[nodes[0]][0];
            ([(x - opposite[0]).signum(), 0.0], 1.0)
        } else {
            let (a, b) = (self.nodes[nodes[0]], self.nodes[nodes[1]]);
            let t = [b[0] - a[0], b[1] - a[1]];
            let len = (t[0] * t[0] + t[1] * t[1]).sqrt();
            let mut n = [t[1] / len, -t[0] / len];
            // Point away from the opposite vertex.
            let to_opp = [opposite[0] - a[0], opposite[1] - a[1]];
            if n[0] * to_opp[0] + n[1] * to_opp[1] > 0.0 {
                n = [-n[0], -n[1]];
            }
            (n, len)
        };
        BoundaryFace {
            cell: c,
            nodes,
            normal,
            measure,
        }
    }

    fn count_components(&self) -> usize {
        let n = self.n_nodes();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut used = vec![false; n];
        for cell in self.cells() {
            used[cell[0]] = true;
            for &v in &cell[1..] {
                used[v] = true;
                let (a, b) = (find(&mut parent, cell[0]), find(&mut parent, v));
                parent[a] = b;
            }
        }
        // Orphan nodes count as separate components.
        (0..n).filter(|&i| !used[i] || find(&mut parent, i) == i).count()
    }
}

/// Vertices of the face opposite local vertex `local`.
fn face_nodes(cell: &[usize], local: usize) -> Vec<usize> {
    cell.iter()
        .enumerate()
        .filter(|&(a, _)| a != local)
        .map(|(_, &v)| v)
        .collect()
}

fn signed_measure(nodes: &[[f64; 2]], cell: &[usize]) -> f64 {
    match cell.len() {
        2 => nodes[cell[1]][0] - nodes[cell[0]][0],
        3 => {
            let (a, b, c) = (nodes[cell[0]], nodes[cell[1]], nodes[cell[2]]);
            0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
        }
        _ => unreachable!("only segments and triangles"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_triangle_square() -> Mesh {
        Mesh::new(
            2,
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![0, 1, 2, 0, 2, 3],
            vec![0, 0],
        )
        .unwrap()
    }

    #[test]
    fn unit_square_topology() {
        let m = two_triangle_square();
        assert_eq!(m.n_nodes(), 4);
        assert_eq!(m.n_cells(), 2);
        assert_eq!(m.boundary_faces().len(), 4);
        assert!((m.total_measure() - 1.0).abs() < 1e-15);
        for f in m.boundary_faces() {
            let mid = [
                0.5 * (m.node(f.nodes[0])[0] + m.node(f.nodes[1])[0]),
                0.5 * (m.node(f.nodes[0])[1] + m.node(f.nodes[1])[1]),
            ];
            // outward: stepping along the normal leaves the unit square
            let p = [mid[0] + 0.1 * f.normal[0], mid[1] + 0.1 * f.normal[1]];
            assert!(p[0] < 0.0 || p[0] > 1.0 || p[1] < 0.0 || p[1] > 1.0);
        }
    }

    #[test]
    fn clockwise_cells_are_reoriented() {
        let m = Mesh::new(2, vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![0, 2, 1], vec![0]).unwrap();
        assert!(m.cell_measure(0) > 0.0);
    }

    #[test]
    fn degenerate_and_nonmanifold_cells() {
        let e = Mesh::new(2, vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![0, 0, 1], vec![0]);
        assert!(matches!(e, Err(Error::DegenerateCell { .. })));
        let e = Mesh::new(2, vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], vec![0, 1, 2], vec![0]);
        assert!(matches!(e, Err(Error::DegenerateCell { .. })));
        let e = Mesh::new(
            2,
            vec![[0.0, 0.0], [1.0, 0.0], [0.5, 1.0], [0.5, -1.0], [0.5, 2.0]],
            vec![0, 1, 2, 0, 1, 3, 1, 0, 4],
            vec![0, 0, 0],
        );
        assert!(matches!(e, Err(Error::NonManifold { count: 3, .. })));
    }

    #[test]
    fn disconnected_mesh_is_rejected() {
        let e = Mesh::new(
            1,
            vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]],
            vec![0, 1, 2, 3],
            vec![0, 0],
        );
        assert!(matches!(e, Err(Error::Disconnected { components: 2 })));
    }
}
