use std::collections::HashMap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Mesh;
use crate::{Error, Result};

/// Concatenated uniform zones. Zone `z` contributes `dofs_per_zone[z]` new
/// nodes (the first zone also owns the left end point), so the total node
/// count is `Σ dofs_per_zone`. Cells inherit their zone index as region id.
pub fn build_uniform_1d(zone_lengths: &[f64], dofs_per_zone: &[usize]) -> Result<Mesh> {
    if zone_lengths.len() != dofs_per_zone.len() || zone_lengths.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{} zone lengths for {} dof counts",
            zone_lengths.len(),
            dofs_per_zone.len()
        )));
    }
    if zone_lengths.iter().any(|&l| !(l > 0.0)) || dofs_per_zone.contains(&0) {
        return Err(Error::InvalidArgument(
            "zone lengths and dof counts must be positive".into(),
        ));
    }
    if dofs_per_zone[0] < 2 {
        return Err(Error::InvalidArgument("first zone needs at least two nodes".into()));
    }
    let mut nodes = vec![[0.0, 0.0]];
    let mut cells = Vec::new();
    let mut regions = Vec::new();
    let mut x0 = 0.0;
    for (z, (&len, &dofs)) in zone_lengths.iter().zip(dofs_per_zone).enumerate() {
        let n_cells = if z == 0 { dofs - 1 } else { dofs };
        for c in 1..=n_cells {
            let x = if c == n_cells {
                x0 + len
            } else {
                x0 + len * c as f64 / n_cells as f64
            };
            let i = nodes.len();
            nodes.push([x, 0.0]);
            cells.extend_from_slice(&[i - 1, i]);
            regions.push(z);
        }
        x0 += len;
    }
    Mesh::new(1, nodes, cells, regions)
}

/// Node layout of [`SquareMeshBuilder`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Lattice {
    /// Rows offset by half a spacing, row pitch `√3/2 h`, extra nodes on the
    /// side walls: near-equilateral triangles.
    #[default]
    Equilateral,
    /// Tensor grid, every square split along its `(0,0)-(1,1)` diagonal;
    /// the unjittered mesh is symmetric about `x = y`.
    Square,
}

/// Triangulation of a square from a jittered structured lattice, made
/// Delaunay by edge flips.
///
/// `nodes_per_side` nodes sit on the bottom edge. Interior nodes move by up
/// to `jitter · h` in a random direction, boundary nodes by a quarter of that
/// along the boundary; corners stay put. The default jitter cannot invert a
/// triangle.
#[derive(Clone, Debug)]
pub struct SquareMeshBuilder {
    nodes_per_side: usize,
    side: f64,
    jitter: f64,
    seed: u64,
    split_x2: Option<f64>,
    lattice: Lattice,
}

impl SquareMeshBuilder {
    pub const DEFAULT_JITTER: f64 = 0.15;
    pub const DEFAULT_SEED: u64 = 20190611;

    pub fn new(nodes_per_side: usize) -> Self {
        Self {
            nodes_per_side,
            side: 1.0,
            jitter: Self::DEFAULT_JITTER,
            seed: Self::DEFAULT_SEED,
            split_x2: None,
            lattice: Lattice::default(),
        }
    }

    pub fn side(mut self, side: f64) -> Self {
        self.side = side;
        self
    }

    pub fn jitter(mut self, jitter: f64) -> Self {
        self.jitter = jitter;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn lattice(mut self, lattice: Lattice) -> Self {
        self.lattice = lattice;
        self
    }

    /// Two regions: 0 below `x2`, 1 above. The lattice row closest to `x2`
    /// is snapped onto it and only jittered horizontally.
    pub fn split_x2(mut self, x2: f64) -> Self {
        self.split_x2 = Some(x2);
        self
    }

    fn row_xs(&self, row: usize, h: f64) -> Vec<f64> {
        let n = self.nodes_per_side;
        let mut xs: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        if self.lattice == Lattice::Equilateral && !row.is_multiple_of(2) {
            xs = std::iter::once(0.0)
                .chain((0..n - 1).map(|i| (i as f64 + 0.5) * h))
                .chain(std::iter::once(self.side))
                .collect();
        }
        if let Some(last) = xs.last_mut() {
            *last = self.side;
        }
        xs
    }

    pub fn build(&self) -> Result<Mesh> {
        let n = self.nodes_per_side;
        if n < 2 || !(self.side > 0.0) || !(0.0..0.5).contains(&self.jitter) {
            return Err(Error::InvalidArgument(format!(
                "square mesh needs >= 2 nodes per side, positive side and jitter in [0, 0.5), got {n}, {}, {}",
                self.side, self.jitter
            )));
        }
        let h = self.side / (n - 1) as f64;
        let n_rows = match self.lattice {
            Lattice::Square => n,
            Lattice::Equilateral => (((n - 1) as f64 * 2.0 / 3f64.sqrt()).round() as usize).max(1) + 1,
        };
        let pitch = self.side / (n_rows - 1) as f64;
        let snap_row = self.split_x2.filter(|_| n_rows > 2).map(|y| {
            let r = (y / pitch).round() as isize;
            r.clamp(1, n_rows as isize - 2) as usize
        });
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut nodes = Vec::new();
        let mut on_split = Vec::new();
        let mut rows: Vec<Vec<usize>> = Vec::with_capacity(n_rows);
        for j in 0..n_rows {
            let y = match snap_row {
                Some(r) if r == j => self.split_x2.unwrap(),
                _ if j == n_rows - 1 => self.side,
                _ => j as f64 * pitch,
            };
            let xs = self.row_xs(j, h);
            rows.push((nodes.len()..nodes.len() + xs.len()).collect());
            nodes.extend(xs.into_iter().map(|x| [x, y]));
            on_split.extend(std::iter::repeat_n(snap_row == Some(j), rows[j].len()));
        }
        let lattice = nodes.clone();
        let mut zipped = Vec::new();
        for j in 0..n_rows - 1 {
            zip_rows(&lattice, &rows[j], &rows[j + 1], &mut zipped);
        }
        let mut shift = vec![[0.0; 2]; nodes.len()];
        for (j, row) in rows.iter().enumerate() {
            let last = row.len() - 1;
            for (i, &v) in row.iter().enumerate() {
                let (bx, by) = (i == 0 || i == last, j == 0 || j == n_rows - 1);
                let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let radius: f64 = rng.random_range(0.0..1.0f64).sqrt();
                let (sin, cos) = angle.sin_cos();
                let d = &mut shift[v];
                match (bx, by) {
                    (true, true) => {}
                    // boundary nodes slide along their side, a quarter as far
                    (true, false) if !on_split[v] => d[1] = 0.25 * self.jitter * pitch * sin,
                    (true, false) => {}
                    (false, true) => d[0] = 0.25 * self.jitter * h * cos,
                    (false, false) if on_split[v] => d[0] = self.jitter * h * radius * cos,
                    (false, false) => *d = [self.jitter * h * radius * cos, self.jitter * h * radius * sin],
                }
            }
        }
        // Nodes on an edge whose cotangent weight nearly vanishes are pulled
        // halfway back to the lattice until no such edge can be repaired.
        let mut tris;
        loop {
            for (p, (l, d)) in nodes.iter_mut().zip(lattice.iter().zip(&shift)) {
                *p = [l[0] + d[0], l[1] + d[1]];
            }
            if let Some(t) = zipped
                .iter()
                .position(|t| orient(nodes[t[0]], nodes[t[1]], nodes[t[2]]) <= 0.0)
            {
                return Err(Error::DegenerateCell {
                    cell: t,
                    msg: format!("jitter {} inverts the lattice", self.jitter),
                });
            }
            tris = zipped.clone();
            delaunay_flips(&nodes, &mut tris, h.min(pitch), &on_split);
            let movable: Vec<usize> = weak_edges(&nodes, &tris)
                .into_iter()
                .flat_map(|(a, b)| [a, b])
                .filter(|&v| shift[v][0].hypot(shift[v][1]) > 1e-3 * h)
                .collect();
            if movable.is_empty() {
                break;
            }
            for v in movable {
                shift[v] = [0.5 * shift[v][0], 0.5 * shift[v][1]];
            }
        }
        let regions = tris
            .iter()
            .map(|t| match self.split_x2 {
                Some(split) => {
                    let yc = (nodes[t[0]][1] + nodes[t[1]][1] + nodes[t[2]][1]) / 3.0;
                    usize::from(yc > split)
                }
                None => 0,
            })
            .collect();
        Mesh::new(2, nodes, tris.into_iter().flatten().collect(), regions)
    }
}

/// Triangulates the strip between two rows, ordered by `x`, advancing
/// along the row whose next node lies further left. Ties advance the upper
/// row, which puts square-lattice diagonals on `(i,j)-(i+1,j+1)`.
fn zip_rows(nodes: &[[f64; 2]], lower: &[usize], upper: &[usize], tris: &mut Vec<[usize; 3]>) {
    let (mut a, mut b) = (0, 0);
    while a + 1 < lower.len() || b + 1 < upper.len() {
        let take_lower =
            b + 1 == upper.len() || (a + 1 < lower.len() && nodes[lower[a + 1]][0] < nodes[upper[b + 1]][0]);
        if take_lower {
            tris.push(ccw([lower[a], lower[a + 1], upper[b]], nodes));
            a += 1;
        } else {
            tris.push(ccw([lower[a], upper[b + 1], upper[b]], nodes));
            b += 1;
        }
    }
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
}

/// Positive when `d` lies strictly inside the circumcircle of CCW `(a, b, c)`.
fn in_circle(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> f64 {
    let (adx, ady) = (a[0] - d[0], a[1] - d[1]);
    let (bdx, bdy) = (b[0] - d[0], b[1] - d[1]);
    let (cdx, cdy) = (c[0] - d[0], c[1] - d[1]);
    let ad = adx * adx + ady * ady;
    let bd = bdx * bdx + bdy * bdy;
    let cd = cdx * cdx + cdy * cdy;
    adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx)
}

/// Lawson flips until every interior edge is locally Delaunay. Edges
/// between two `locked` nodes are kept.
fn delaunay_flips(nodes: &[[f64; 2]], tris: &mut [[usize; 3]], h: f64, locked: &[bool]) {
    let tol = 1e-10 * h.powi(4);
    loop {
        let mut edges: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (t, tri) in tris.iter().enumerate() {
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                edges.entry((a.min(b), a.max(b))).or_default().push(t);
            }
        }
        let mut keys: Vec<_> = edges.keys().copied().collect();
        keys.sort_unstable();
        let mut touched = vec![false; tris.len()];
        let mut flipped = 0;
        for key in keys {
            let owners = &edges[&key];
            if owners.len() != 2 || touched[owners[0]] || touched[owners[1]] || (locked[key.0] && locked[key.1]) {
                continue;
            }
            let (t1, t2) = (owners[0], owners[1]);
            let (mut a, mut b) = key;
            let c = third(&tris[t1], a, b);
            let d = third(&tris[t2], a, b);
            if orient(nodes[a], nodes[b], nodes[c]) < 0.0 {
                std::mem::swap(&mut a, &mut b);
            }
            if in_circle(nodes[a], nodes[b], nodes[c], nodes[d]) > tol {
                tris[t1] = ccw([a, d, c], nodes);
                tris[t2] = ccw([d, b, c], nodes);
                touched[t1] = true;
                touched[t2] = true;
                flipped += 1;
            }
        }
        if flipped == 0 {
            break;
        }
    }
}

/// Smallest cotangent weight `½ Σ cot` an interior edge may carry.
const MIN_EDGE_WEIGHT: f64 = 0.05;

fn weak_edges(nodes: &[[f64; 2]], tris: &[[usize; 3]]) -> Vec<(usize, usize)> {
    let mut weight: HashMap<(usize, usize), (f64, usize)> = HashMap::new();
    for t in tris {
        for e in 0..3 {
            let (a, b, c) = (t[e], t[(e + 1) % 3], t[(e + 2) % 3]);
            let (p, q, r) = (nodes[a], nodes[b], nodes[c]);
            let (u, v) = ([p[0] - r[0], p[1] - r[1]], [q[0] - r[0], q[1] - r[1]]);
            let cot = (u[0] * v[0] + u[1] * v[1]) / (u[0] * v[1] - u[1] * v[0]).abs();
            let w = weight.entry((a.min(b), a.max(b))).or_insert((0.0, 0));
            w.0 += 0.5 * cot;
            w.1 += 1;
        }
    }
    let mut weak: Vec<_> = weight
        .into_iter()
        .filter(|&(_, (w, owners))| owners == 2 && w < MIN_EDGE_WEIGHT)
        .map(|(k, _)| k)
        .collect();
    weak.sort_unstable();
    weak
}

fn third(tri: &[usize; 3], a: usize, b: usize) -> usize {
    *tri.iter()
        .find(|&&v| v != a && v != b)
        .expect("edge belongs to triangle")
}

fn ccw(mut t: [usize; 3], nodes: &[[f64; 2]]) -> [usize; 3] {
    if orient(nodes[t[0]], nodes[t[1]], nodes[t[2]]) < 0.0 {
        t.swap(1, 2);
    }
    t
}
