//! Text mesh format:
//!
//! ```text
//! polymesh 1
//! <nv> <nc>
//! x y                  (nv lines, 17 significant digits)
//! k i1 ... ik          (nc lines, 0-based, counterclockwise)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{geometry, Point2, PolygonCell, PolygonMesh};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MeshWarning {
    /// The cell was given clockwise and has been reversed.
    Reoriented { cell: usize },
}

pub fn write_mesh_string<T: Real>(mesh: &PolygonMesh<T>) -> String {
    let mut s = String::with_capacity(48 * (mesh.num_vertices() + mesh.num_cells()));
    s.push_str("polymesh 1\n");
    let _ = writeln!(s, "{} {}", mesh.num_vertices(), mesh.num_cells());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{:.16e} {:.16e}", p.x.to_f64_lossy(), p.y.to_f64_lossy());
    }
    for c in mesh.cells() {
        let _ = write!(s, "{}", c.vertex_ids.len());
        for v in &c.vertex_ids {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    s
}

pub fn write_mesh<T: Real>(mesh: &PolygonMesh<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_mesh_string(mesh))?;
    Ok(())
}

pub fn read_mesh<T: Real>(path: impl AsRef<Path>) -> Result<(PolygonMesh<T>, Vec<MeshWarning>)> {
    let text = std::fs::read_to_string(path)?;
    read_mesh_str(&text)
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

pub fn read_mesh_str<T: Real>(text: &str) -> Result<(PolygonMesh<T>, Vec<MeshWarning>)> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    if header != "polymesh 1" {
        return Err(parse_err(ln, format!("expected header 'polymesh 1', found '{header}'")));
    }
    let (ln, counts) = lines.next().ok_or_else(|| parse_err(ln + 1, "missing counts line"))?;
    let nums: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad count '{t}'"))))
        .collect::<Result<_>>()?;
    let [nv, nc] = nums[..] else {
        return Err(parse_err(ln, "expected '<nv> <nc>'"));
    };
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| parse_err(0, "unexpected end of file in vertex block"))?;
        let xy: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| parse_err(ln, format!("bad coordinate '{t}'"))))
            .collect::<Result<_>>()?;
        if xy.len() != 2 || !xy.iter().all(|v| v.is_finite()) {
            return Err(parse_err(ln, "expected two finite coordinates"));
        }
        vertices.push(Point2::new(T::lit(xy[0]), T::lit(xy[1])));
    }
    let mut cells = Vec::with_capacity(nc);
    let mut warnings = Vec::new();
    for c in 0..nc {
        let (ln, l) = lines.next().ok_or_else(|| parse_err(0, "unexpected end of file in cell block"))?;
        let ids: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad index '{t}'"))))
            .collect::<Result<_>>()?;
        let (&k, rest) = ids.split_first().ok_or_else(|| parse_err(ln, "empty cell line"))?;
        if rest.len() != k {
            return Err(parse_err(ln, format!("cell declares {k} vertices but lists {}", rest.len())));
        }
        if k < 3 {
            return Err(parse_err(ln, "cell needs at least 3 vertices"));
        }
        if let Some(&bad) = rest.iter().find(|&&v| v >= nv) {
            return Err(parse_err(ln, format!("dangling vertex reference {bad} (vertex count {nv})")));
        }
        let mut ids = rest.to_vec();
        let poly: Vec<Point2<T>> = ids.iter().map(|&v| vertices[v]).collect();
        if geometry::signed_area(&poly) < T::zero() {
            ids.reverse();
            warnings.push(MeshWarning::Reoriented { cell: c });
        }
        cells.push(PolygonCell { vertex_ids: ids });
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing content after cell block"));
    }
    Ok((PolygonMesh::new(vertices, cells)?, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymesh::{generate_mesh, Domain, FamilyTag, MeshFamily};

    #[test]
    fn round_trip_is_bit_identical() {
        let m: PolygonMesh<f64> =
            generate_mesh(&MeshFamily::new(FamilyTag::T4Voronoi), 5, Domain::LShape).unwrap();
        let (back, warnings) = read_mesh_str::<f64>(&write_mesh_string(&m)).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(back, m);
    }

    #[test]
    fn dangling_reference_is_reported_with_line() {
        let text = "polymesh 1\n3 1\n0 0\n1 0\n0 1\n3 0 1 3\n";
        let err = read_mesh_str::<f64>(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("dangling vertex reference"), "{msg}");
        assert!(matches!(err, Error::Parse { line: 6, .. }));
    }

    #[test]
    fn clockwise_cell_is_reoriented() {
        let text = "polymesh 1\n3 1\n0 0\n1 0\n0 1\n3 0 2 1\n";
        let (m, warnings) = read_mesh_str::<f64>(text).unwrap();
        assert_eq!(warnings, vec![MeshWarning::Reoriented { cell: 0 }]);
        assert!(m.cell_area(0) > 0.0);
    }

    #[test]
    fn bad_header() {
        assert!(matches!(read_mesh_str::<f64>("mesh\n"), Err(Error::Parse { line: 1, .. })));
    }
}
