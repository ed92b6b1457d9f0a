//! Compressed sparse row matrices and assembled linear systems.

use std::io::Write;

use crate::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Duplicates are summed; entries that end up exactly zero are dropped.
    pub fn from_triplets(n_rows: usize, n_cols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; n_rows + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < n_rows && c < n_cols, "triplet ({r}, {c}) out of bounds");
            if rows.last() == Some(&r) && cols.last() == Some(&c) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                cols.push(c);
                vals.push(v);
            }
        }
        let mut keep_cols = Vec::with_capacity(cols.len());
        let mut keep_vals = Vec::with_capacity(vals.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v != 0.0 {
                row_ptr[r + 1] += 1;
                keep_cols.push(c);
                keep_vals.push(v);
            }
        }
        for r in 0..n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            n_rows,
            n_cols,
            row_ptr,
            cols: keep_cols,
            vals: keep_vals,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `(column, value)` pairs of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(p) => self.vals[span.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        (0..self.n_rows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n_rows)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise difference, over the union of both patterns.
    pub fn max_abs_diff(&self, other: &CsrMatrix) -> f64 {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        let mut worst = 0.0f64;
        for (r, c, v) in self.triplets() {
            worst = worst.max((v - other.get(r, c)).abs());
        }
        for (r, c, v) in other.triplets() {
            worst = worst.max((v - self.get(r, c)).abs());
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Matrix Market coordinate format, one-based indices.
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.n_rows, self.n_cols, self.nnz())?;
        for (r, c, v) in self.triplets() {
            writeln!(w, "{} {} {:.17e}", r + 1, c + 1, v)?;
        }
        Ok(())
    }
}

/// A square system over the unknowns `Ψ_ik`, stored at row `k * n_nodes + i`.
#[derive(Clone, Debug)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub n_nodes: usize,
    pub n_angles: usize,
}

impl SparseSystem {
    pub fn index(&self, node: usize, angle: usize) -> usize {
        angle * self.n_nodes + node
    }

    /// `(node, angle)` of a row.
    pub fn locate(&self, row: usize) -> (usize, usize) {
        (row % self.n_nodes, row / self.n_nodes)
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        self.matrix
            .matvec(x)
            .iter()
            .zip(&self.rhs)
            .map(|(ax, b)| ax - b)
            .collect()
    }
}

/// A discrete-ordinates system kept in factored form: one transport block
/// per direction on a shared pattern plus a rank-one scattering coupling.
///
/// Row `(i, k)` reads
/// `Σ_e A^k[e] Ψ_{cols[e], k} − s_{ik} Σ_l w_l Ψ_{il} = rhs_{ik}`.
#[derive(Clone, Debug)]
pub struct TransportSystem {
    pub n_nodes: usize,
    pub n_angles: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    /// `n_angles` blocks of `cols.len()` values each.
    pub blocks: Vec<f64>,
    /// Scattering coefficient per row.
    pub scatter: Vec<f64>,
    /// Normalized angular weights `μ_l/|S|`.
    pub weights: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TransportSystem {
    pub fn nnz_block(&self) -> usize {
        self.cols.len()
    }

    pub fn block_values(&self, k: usize) -> &[f64] {
        let nnz = self.nnz_block();
        &self.blocks[k * nnz..(k + 1) * nnz]
    }

    /// The transport block of direction `k` as a matrix.
    pub fn block(&self, k: usize) -> CsrMatrix {
        let vals = self.block_values(k);
        let mut t = Vec::with_capacity(vals.len());
        for i in 0..self.n_nodes {
            for e in self.row_ptr[i]..self.row_ptr[i + 1] {
                t.push((i, self.cols[e], vals[e]));
            }
        }
        CsrMatrix::from_triplets(self.n_nodes, self.n_nodes, t)
    }

    pub fn to_sparse(&self) -> SparseSystem {
        let (n, l) = (self.n_nodes, self.n_angles);
        let nnz = self.nnz_block();
        let mut t = Vec::with_capacity(l * nnz + l * l * n);
        for k in 0..l {
            let vals = self.block_values(k);
            for i in 0..n {
                let row = k * n + i;
                for e in self.row_ptr[i]..self.row_ptr[i + 1] {
                    t.push((row, k * n + self.cols[e], vals[e]));
                }
                let s = self.scatter[row];
                if s != 0.0 {
                    for (m, &w) in self.weights.iter().enumerate() {
                        t.push((row, m * n + i, -s * w));
                    }
                }
            }
        }
        SparseSystem {
            matrix: CsrMatrix::from_triplets(n * l, n * l, t),
            rhs: self.rhs.clone(),
            n_nodes: n,
            n_angles: l,
        }
    }

    /// `Ψ̄_i = Σ_l w_l Ψ_il` of a full solution vector.
    pub fn scalar_flux(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_nodes)
            .map(|i| {
                (0..self.n_angles)
                    .map(|l| self.weights[l] * x[l * self.n_nodes + i])
                    .sum()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_are_summed_and_zeros_dropped() {
        let m = CsrMatrix::from_triplets(
            2,
            2,
            vec![(0, 0, 1.0), (1, 0, 2.0), (0, 0, 3.0), (0, 1, 1.0), (0, 1, -1.0)],
        );
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 0), 4.0);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.matvec(&[1.0, 1.0]), vec![4.0, 2.0]);
        assert_eq!(m.norm_inf(), 4.0);
    }

    #[test]
    fn matrix_market_header() {
        let mut out = Vec::new();
        CsrMatrix::identity(2).write_matrix_market(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("%%MatrixMarket matrix coordinate real general"));
        assert_eq!(lines.next(), Some("2 2 2"));
        assert!(lines.next().unwrap().starts_with("1 1 1.0"));
    }

    #[test]
    fn transport_system_expansion() {
        // two nodes, two directions, identity blocks and uniform scattering
        let sys = TransportSystem {
            n_nodes: 2,
            n_angles: 2,
            row_ptr: vec![0, 1, 2],
            cols: vec![0, 1],
            blocks: vec![2.0, 2.0, 3.0, 3.0],
            scatter: vec![1.0; 4],
            weights: vec![0.5, 0.5],
            rhs: vec![1.0; 4],
        };
        let full = sys.to_sparse();
        assert_eq!(full.matrix.get(0, 0), 1.5);
        assert_eq!(full.matrix.get(0, 2), -0.5);
        assert_eq!(full.matrix.get(3, 3), 2.5);
        assert_eq!(full.locate(3), (1, 1));
        assert_eq!(sys.scalar_flux(&[1.0, 2.0, 3.0, 4.0]), vec![2.0, 3.0]);
    }
}
