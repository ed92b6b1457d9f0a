use super::Mesh;
use crate::{Error, Result, Vec3};

/// Relative floor used by [`sigma_tilde`].
pub const SIGMA_TILDE_FLOOR: f64 = 1e-14;

/// `σ̃ = max(σ_s, ε·max(1/diam, max σ_s))` with `ε = SIGMA_TILDE_FLOOR`.
pub fn sigma_tilde(sigma_s: &[f64], domain_diameter: f64) -> Vec<f64> {
    let smax = sigma_s.iter().copied().fold(0.0, f64::max);
    let floor = SIGMA_TILDE_FLOOR * (1.0 / domain_diameter).max(smax);
    sigma_s.iter().map(|&s| s.max(floor)).collect()
}

/// Lumped P1 operators on a sparsity graph `I(i)` that includes `i`.
///
/// Pair quantities are stored in CSR order: entry `e` of row `i` couples
/// `i` to `cols[e]`, and `transpose[e]` is the index of the `(j, i)` entry.
#[derive(Clone, Debug)]
pub struct MeshOperators {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub transpose: Vec<usize>,
    /// `∫ φ_i ∇φ_j`.
    pub c: Vec<Vec3>,
    /// `∫ ∇φ_i·∇φ_j`.
    pub stiffness: Vec<f64>,
    /// `∫ ∇φ_i·∇φ_j / σ̃_s`.
    pub c_diff: Vec<f64>,
    pub m: Vec<f64>,
    pub m_bnd: Vec<f64>,
    /// Unit outward normal on boundary dofs, zero elsewhere.
    pub n_bnd: Vec<Vec3>,
    pub on_boundary: Vec<bool>,
    pub h_geo: Vec<f64>,
    /// Off-diagonal pairs with a positive stiffness entry.
    pub acute_violations: usize,
}

impl MeshOperators {
    pub fn n_dofs(&self) -> usize {
        self.m.len()
    }

    pub fn row(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// CSR index of the diagonal entry of row `i`.
    pub fn diag(&self, i: usize) -> usize {
        self.entry(i, i).expect("diagonal is always stored")
    }

    pub fn entry(&self, i: usize, j: usize) -> Option<usize> {
        let r = self.row(i);
        self.cols[r.clone()].binary_search(&j).ok().map(|p| r.start + p)
    }

    pub fn boundary_dofs(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_dofs()).filter(|&i| self.on_boundary[i])
    }
}

/// P1 gradients of the cell's hat functions.
fn gradients(mesh: &Mesh, cell: &[usize], measure: f64) -> Vec<Vec3> {
    if mesh.dim() == 1 {
        let g = 1.0 / measure;
        vec![Vec3::new(-g, 0.0, 0.0), Vec3::new(g, 0.0, 0.0)]
    } else {
        let p: Vec<[f64; 2]> = cell.iter().map(|&v| mesh.node(v)).collect();
        (0..3)
            .map(|a| {
                let (b, c) = (p[(a + 1) % 3], p[(a + 2) % 3]);
                Vec3::new((b[1] - c[1]) / (2.0 * measure), (c[0] - b[0]) / (2.0 * measure), 0.0)
            })
            .collect()
    }
}

/// Builds the operators with the cell-wise `σ̃_s` (one value per cell).
pub fn build_operators(mesh: &Mesh, sigma_tilde_cell: &[f64]) -> Result<MeshOperators> {
    let n = mesh.n_nodes();
    let d = mesh.dim();
    if sigma_tilde_cell.len() != mesh.n_cells() {
        return Err(Error::InvalidArgument(format!(
            "{} σ̃ values for {} cells",
            sigma_tilde_cell.len(),
            mesh.n_cells()
        )));
    }
    if let Some(c) = sigma_tilde_cell.iter().position(|&s| !(s > 0.0)) {
        return Err(Error::InvalidArgument(format!("σ̃ must be positive, cell {c}")));
    }

    let mut adj: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for cell in mesh.cells() {
        for &a in cell {
            for &b in cell {
                adj[a].push(b);
            }
        }
    }
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    row_ptr.push(0);
    for mut r in adj {
        r.sort_unstable();
        r.dedup();
        cols.extend_from_slice(&r);
        row_ptr.push(cols.len());
    }
    let nnz = cols.len();
    let mut ops = MeshOperators {
        dim: d,
        row_ptr,
        cols,
        transpose: vec![0; nnz],
        c: vec![Vec3::ZERO; nnz],
        stiffness: vec![0.0; nnz],
        c_diff: vec![0.0; nnz],
        m: vec![0.0; n],
        m_bnd: vec![0.0; n],
        n_bnd: vec![Vec3::ZERO; n],
        on_boundary: vec![false; n],
        h_geo: vec![0.0; n],
        acute_violations: 0,
    };
    for i in 0..n {
        for e in ops.row(i) {
            let j = ops.cols[e];
            ops.transpose[e] = ops.entry(j, i).expect("symmetric pattern");
        }
    }

    let factorial = if d == 1 { 1.0 } else { 2.0 };
    let mut incident = vec![0usize; n];
    for (c, cell) in mesh.cells().enumerate() {
        let measure = mesh.cell_measure(c);
        if !(measure > 0.0) {
            return Err(Error::DegenerateCell {
                cell: c,
                msg: "zero measure".into(),
            });
        }
        let grads = gradients(mesh, cell, measure);
        let share = measure / (d + 1) as f64;
        let size = (factorial * measure).powf(1.0 / d as f64);
        for (a, &i) in cell.iter().enumerate() {
            ops.m[i] += share;
            ops.h_geo[i] += size;
            incident[i] += 1;
            for (b, &j) in cell.iter().enumerate() {
                let e = ops.entry(i, j).unwrap();
                let k = measure * grads[a].dot(&grads[b]);
                ops.c[e] += grads[b] * share;
                ops.stiffness[e] += k;
                ops.c_diff[e] += k / sigma_tilde_cell[c];
            }
        }
    }
    for i in 0..n {
        ops.h_geo[i] /= incident[i] as f64;
    }

    let mut normal_sum = vec![Vec3::ZERO; n];
    for f in mesh.boundary_faces() {
        let share = f.measure / f.nodes.len() as f64;
        let nf = Vec3::new(f.normal[0], f.normal[1], 0.0);
        for &i in &f.nodes {
            ops.m_bnd[i] += share;
            ops.on_boundary[i] = true;
            normal_sum[i] += nf * share;
        }
    }
    for i in 0..n {
        if ops.on_boundary[i] {
            // Opposite faces cancel only on degenerate boundaries (a 1D single cell never does).
            ops.n_bnd[i] = normal_sum[i].normalized().unwrap_or(Vec3::ZERO);
        }
    }

    for i in 0..n {
        let r = ops.row(i);
        let scale = ops.stiffness[r.clone()].iter().fold(0.0f64, |a, &s| a.max(s.abs()));
        for e in r {
            if ops.cols[e] != i && ops.stiffness[e] > 1e-12 * scale {
                ops.acute_violations += 1;
            }
        }
    }
    if ops.acute_violations > 0 {
        log::warn!(
            "{} off-diagonal pairs violate the acute-angle condition",
            ops.acute_violations / 2
        );
    }
    Ok(ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::tests::two_triangle_square;
    use crate::mesh::{build_uniform_1d, SquareMeshBuilder};

    /// Gauss-Legendre (3 point) integration of `φ_i φ_j'` on each segment,
    /// independent of the closed forms above.
    fn c_oracle_1d(mesh: &Mesh, i: usize, j: usize) -> f64 {
        let gp = [
            (-(0.6f64).sqrt(), 5.0 / 9.0),
            (0.0, 8.0 / 9.0),
            ((0.6f64).sqrt(), 5.0 / 9.0),
        ];
        let mut total = 0.0;
        for cell in mesh.cells() {
            let (xa, xb) = (mesh.node(cell[0])[0], mesh.node(cell[1])[0]);
            let hat = |v: usize, x: f64| {
                if v == cell[0] {
                    (xb - x) / (xb - xa)
                } else if v == cell[1] {
                    (x - xa) / (xb - xa)
                } else {
                    0.0
                }
            };
            let dhat = |v: usize| {
                if v == cell[0] {
                    -1.0 / (xb - xa)
                } else if v == cell[1] {
                    1.0 / (xb - xa)
                } else {
                    0.0
                }
            };
            for (t, w) in gp {
                let x = 0.5 * (xa + xb) + 0.5 * (xb - xa) * t;
                total += 0.5 * (xb - xa) * w * hat(i, x) * dhat(j);
            }
        }
        total
    }

    #[test]
    fn uniform_1d_values() {
        let mesh = build_uniform_1d(&[1.0], &[11]).unwrap();
        let h = 0.1;
        let sigma = 4.0;
        let ops = build_operators(&mesh, &vec![sigma; mesh.n_cells()]).unwrap();
        let i = 5;
        let up = ops.entry(i, i + 1).unwrap();
        let dn = ops.entry(i, i - 1).unwrap();
        assert!((ops.c[up].x() - 0.5).abs() < 1e-14);
        assert!((ops.c[dn].x() + 0.5).abs() < 1e-14);
        assert!((ops.c[up].x() - c_oracle_1d(&mesh, i, i + 1)).abs() < 1e-12);
        assert!((ops.m[i] - h).abs() < 1e-14);
        assert!((ops.c_diff[up] + 1.0 / (sigma * h)).abs() < 1e-9);
        assert_eq!(ops.m_bnd[0], 1.0);
        assert_eq!(ops.n_bnd[0].x(), -1.0);
        assert_eq!(ops.n_bnd[10].x(), 1.0);
        for a in 0..11 {
            for b in 0..11 {
                if let Some(e) = ops.entry(a, b) {
                    assert!((ops.c[e].x() - c_oracle_1d(&mesh, a, b)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn corner_normal() {
        let mesh = two_triangle_square();
        let ops = build_operators(&mesh, &[1.0, 1.0]).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((ops.n_bnd[0].x() + s).abs() < 1e-15 && (ops.n_bnd[0].y() + s).abs() < 1e-15);
        assert!((ops.m_bnd[0] - 1.0).abs() < 1e-15);
    }

    fn check_identities(mesh: &Mesh) {
        let sig: Vec<f64> = (0..mesh.n_cells()).map(|c| 1.0 + (c % 3) as f64).collect();
        let ops = build_operators(mesh, &sig).unwrap();
        let cmax = ops.c.iter().fold(0.0f64, |a, v| a.max(v.max_abs()));
        let dmax = ops.c_diff.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for i in 0..ops.n_dofs() {
            let s: Vec3 = ops.row(i).map(|e| ops.c[e]).sum();
            assert!(s.max_abs() <= 1e-12 * cmax);
            let sd: f64 = ops.row(i).map(|e| ops.c_diff[e]).sum();
            assert!(sd.abs() <= 1e-12 * dmax);
            for e in ops.row(i) {
                let j = ops.cols[e];
                if !ops.on_boundary[i] || !ops.on_boundary[j] {
                    assert!((ops.c[e] + ops.c[ops.transpose[e]]).max_abs() <= 1e-12 * cmax);
                }
                assert_eq!(ops.cols[ops.transpose[e]], i);
            }
        }
        let total: f64 = ops.m.iter().sum();
        assert!((total - mesh.total_measure()).abs() <= 1e-10 * mesh.total_measure());
    }

    #[test]
    fn identities_on_test_meshes() {
        check_identities(&two_triangle_square());
        check_identities(&build_uniform_1d(&[2.0, 1.0, 2.0], &[5, 4, 6]).unwrap());
        check_identities(&SquareMeshBuilder::new(10).build().unwrap());
        check_identities(&SquareMeshBuilder::new(9).side(100.0).split_x2(50.0).build().unwrap());
    }

    #[test]
    fn sigma_tilde_examples() {
        assert_eq!(sigma_tilde(&[0.0, 0.0], 1.0), vec![1e-14, 1e-14]);
        assert_eq!(sigma_tilde(&[100.0], 1.0), vec![100.0]);
        let s = sigma_tilde(&[0.0, 2.0], 10.0);
        assert!((s[0] - 2e-14).abs() < 1e-28);
        assert_eq!(s[1], 2.0);
    }

    #[test]
    fn structured_mesh_is_acute() {
        let mesh = SquareMeshBuilder::new(6)
            .jitter(0.0)
            .lattice(crate::mesh::Lattice::Square)
            .build()
            .unwrap();
        let ops = build_operators(&mesh, &vec![1.0; mesh.n_cells()]).unwrap();
        assert_eq!(ops.acute_violations, 0);
    }
}
