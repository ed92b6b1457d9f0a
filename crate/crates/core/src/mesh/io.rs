//! Plain-text mesh format.
//!
//! ```text
//! nodes N cells M dim d
//! x y          (N lines; a single coordinate when d = 1)
//! v0 v1 v2 r   (M lines; d+1 zero-based vertex indices, then the region id)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::io::{BufRead, Write};

use super::Mesh;
use crate::{Error, Result};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn read_mesh<R: BufRead>(reader: R) -> Result<Mesh> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| {
        l.as_ref()
            .map(|s| !s.trim().is_empty() && !s.trim_start().starts_with('#'))
            .unwrap_or(true)
    });

    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let header = header?;
    let tok: Vec<&str> = header.split_whitespace().collect();
    if tok.len() != 6 || tok[0] != "nodes" || tok[2] != "cells" || tok[4] != "dim" {
        return Err(parse_err(hline, "expected 'nodes N cells M dim d'"));
    }
    let parse_usize = |s: &str, line: usize| -> Result<usize> {
        s.parse().map_err(|_| parse_err(line, format!("invalid integer '{s}'")))
    };
    let n_nodes = parse_usize(tok[1], hline)?;
    let n_cells = parse_usize(tok[3], hline)?;
    let dim = parse_usize(tok[5], hline)?;
    if dim != 1 && dim != 2 {
        return Err(parse_err(hline, format!("unsupported dim {dim}")));
    }

    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| parse_err(hline, "unexpected end of input in node block"))?;
        let line = line?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| parse_err(ln, format!("invalid coordinate '{s}'")))
            })
            .collect::<Result<_>>()?;
        if vals.len() != dim {
            return Err(parse_err(ln, format!("expected {dim} coordinates, got {}", vals.len())));
        }
        nodes.push([vals[0], if dim == 2 { vals[1] } else { 0.0 }]);
    }

    let mut cells = Vec::with_capacity(n_cells * (dim + 1));
    let mut regions = Vec::with_capacity(n_cells);
    for _ in 0..n_cells {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| parse_err(hline, "unexpected end of input in cell block"))?;
        let line = line?;
        let vals: Vec<usize> = line
            .split_whitespace()
            .map(|s| parse_usize(s, ln))
            .collect::<Result<_>>()?;
        if vals.len() != dim + 2 {
            return Err(parse_err(
                ln,
                format!("expected {} vertex indices and a region id", dim + 1),
            ));
        }
        cells.extend_from_slice(&vals[..=dim]);
        regions.push(vals[dim + 1]);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing data after cell block"));
    }
    Mesh::new(dim, nodes, cells, regions)
}

pub fn write_mesh<W: Write>(mesh: &Mesh, mut w: W) -> Result<()> {
    writeln!(
        w,
        "nodes {} cells {} dim {}",
        mesh.n_nodes(),
        mesh.n_cells(),
        mesh.dim()
    )?;
    for p in mesh.nodes() {
        if mesh.dim() == 1 {
            writeln!(w, "{}", p[0])?;
        } else {
            writeln!(w, "{} {}", p[0], p[1])?;
        }
    }
    for (c, cell) in mesh.cells().enumerate() {
        for v in cell {
            write!(w, "{v} ")?;
        }
        writeln!(w, "{}", mesh.region(c))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_uniform_1d;

    #[test]
    fn reads_unit_square() {
        let text = "nodes 4 cells 2 dim 2\n0 0\n1 0\n1 1\n0 1\n0 1 2 0\n0 2 3 0\n";
        let m = read_mesh(text.as_bytes()).unwrap();
        assert_eq!((m.n_nodes(), m.n_cells(), m.boundary_faces().len()), (4, 2, 4));
    }

    #[test]
    fn repeated_vertex_is_degenerate() {
        let text = "nodes 3 cells 1 dim 2\n0 0\n1 0\n0 1\n0 1 1 0\n";
        assert!(matches!(read_mesh(text.as_bytes()), Err(Error::DegenerateCell { .. })));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "nodes 2 cells 1 dim 1\n0\nabc\n0 1 0\n";
        match read_mesh(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            read_mesh("bogus".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn uniform_1d_round_trip() {
        let m = build_uniform_1d(&[2.0, 1.0, 2.0], &[5, 4, 6]).unwrap();
        let mut buf = Vec::new();
        write_mesh(&m, &mut buf).unwrap();
        let back = read_mesh(buf.as_slice()).unwrap();
        assert_eq!(back.nodes(), m.nodes());
        assert_eq!(back.regions(), m.regions());
        assert_eq!(back.cells().collect::<Vec<_>>(), m.cells().collect::<Vec<_>>());
    }
}
