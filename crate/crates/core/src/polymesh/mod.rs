//! Polygonal meshes: data model, generators for the six mesh families,
//! regularity auditing and a plain-text file format.

mod generate;
pub mod geometry;
mod io;
mod quality;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use generate::{generate_mesh, Domain, FamilyTag, MeshFamily};
pub use geometry::Point2;
pub use io::{read_mesh, read_mesh_str, write_mesh, write_mesh_string, MeshWarning};
pub use quality::{audit_regularity, MeshQualityReport};

/// Counterclockwise list of vertex indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolygonCell {
    pub vertex_ids: Vec<usize>,
}

/// Mesh edge. `vertices` follow the left cell's counterclockwise traversal and
/// `normal` points out of the left cell.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge<T> {
    pub vertices: [usize; 2],
    pub left: usize,
    pub right: Option<usize>,
    pub normal: Point2<T>,
}

impl<T> Edge<T> {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }
}

/// Local edge `i` of a cell runs from vertex `i` to vertex `i + 1`. `sign` is
/// `+1` when the cell is the edge's left cell, `-1` otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HalfEdge {
    pub edge: usize,
    pub sign: i8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolygonMesh<T> {
    vertices: Vec<Point2<T>>,
    cells: Vec<PolygonCell>,
    edges: Vec<Edge<T>>,
    boundary_flags: Vec<bool>,
    cell_edges: Vec<Vec<HalfEdge>>,
}

impl<T: Real> PolygonMesh<T> {
    /// Builds the edge table and validates every cell. Cells must already be
    /// counterclockwise; use [`read_mesh`] for lenient input.
    pub fn new(vertices: Vec<Point2<T>>, cells: Vec<PolygonCell>) -> Result<Self> {
        for (i, v) in vertices.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidMesh(format!("vertex {i} has non-finite coordinates")));
            }
        }
        let mut edges: Vec<Edge<T>> = Vec::new();
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut cell_edges = Vec::with_capacity(cells.len());
        let mut poly = Vec::new();
        for (c, cell) in cells.iter().enumerate() {
            let ids = &cell.vertex_ids;
            let n = ids.len();
            if n < 3 {
                return Err(Error::DegenerateCell { cell: c, reason: "fewer than 3 vertices".into() });
            }
            if let Some(&bad) = ids.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!("cell {c}: dangling vertex reference {bad}")));
            }
            let mut sorted = ids.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::DegenerateCell { cell: c, reason: "repeated vertex".into() });
            }
            poly.clear();
            poly.extend(ids.iter().map(|&v| vertices[v]));
            if geometry::signed_area(&poly) <= T::zero() {
                return Err(Error::DegenerateCell {
                    cell: c,
                    reason: "nonpositive signed area (clockwise or collapsed)".into(),
                });
            }
            if !geometry::is_simple(&poly) {
                return Err(Error::DegenerateCell { cell: c, reason: "self-intersecting boundary".into() });
            }
            let mut half = Vec::with_capacity(n);
            for i in 0..n {
                let a = ids[i];
                let b = ids[(i + 1) % n];
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    None => {
                        let d = vertices[b] - vertices[a];
                        let len = d.norm();
                        if len <= T::zero() {
                            return Err(Error::DegenerateCell { cell: c, reason: "zero-length edge".into() });
                        }
                        lookup.insert(key, edges.len());
                        half.push(HalfEdge { edge: edges.len(), sign: 1 });
                        edges.push(Edge {
                            vertices: [a, b],
                            left: c,
                            right: None,
                            normal: Point2::new(d.y / len, -d.x / len),
                        });
                    }
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if edge.right.is_some() || edge.vertices != [b, a] {
                            return Err(Error::Orientation { edge: e });
                        }
                        edge.right = Some(c);
                        half.push(HalfEdge { edge: e, sign: -1 });
                    }
                }
            }
            cell_edges.push(half);
        }
        let boundary_flags = edges.iter().map(|e| e.right.is_none()).collect();
        Ok(Self { vertices, cells, edges, boundary_flags, cell_edges })
    }

    pub fn vertices(&self) -> &[Point2<T>] {
        &self.vertices
    }

    pub fn cells(&self) -> &[PolygonCell] {
        &self.cells
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary_flags
    }

    pub fn cell_edges(&self, cell: usize) -> &[HalfEdge] {
        &self.cell_edges[cell]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Vertex coordinates of a cell in counterclockwise order.
    pub fn cell_polygon(&self, cell: usize) -> Vec<Point2<T>> {
        self.cells[cell].vertex_ids.iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn cell_area(&self, cell: usize) -> T {
        geometry::signed_area(&self.cell_polygon(cell))
    }

    pub fn total_area(&self) -> T {
        (0..self.num_cells()).map(|c| self.cell_area(c)).sum()
    }

    pub fn edge_midpoint(&self, edge: usize) -> Point2<T> {
        let [a, b] = self.edges[edge].vertices;
        (self.vertices[a] + self.vertices[b]) * T::lit(0.5)
    }

    pub fn edge_length(&self, edge: usize) -> T {
        let [a, b] = self.edges[edge].vertices;
        (self.vertices[b] - self.vertices[a]).norm()
    }

    pub fn cell_centroid(&self, cell: usize) -> Point2<T> {
        geometry::centroid(&self.cell_polygon(cell))
    }

    /// Vertices touched by at least one boundary edge.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut flags = vec![false; self.vertices.len()];
        for e in self.edges.iter().filter(|e| e.is_boundary()) {
            flags[e.vertices[0]] = true;
            flags[e.vertices[1]] = true;
        }
        flags
    }

    /// Same topology with moved vertices.
    pub fn with_vertices(&self, vertices: Vec<Point2<T>>) -> Result<Self> {
        Self::new(vertices, self.cells.clone())
    }
}

/// Collects polygons with floating-point vertices and merges coincident
/// vertices (within `tol`) into a shared index space.
pub(crate) struct PolygonSoup<T> {
    tol: T,
    vertices: Vec<Point2<T>>,
    bins: HashMap<(i64, i64), Vec<usize>>,
    cells: Vec<PolygonCell>,
}

impl<T: Real> PolygonSoup<T> {
    pub(crate) fn new(tol: T) -> Self {
        Self { tol, vertices: Vec::new(), bins: HashMap::new(), cells: Vec::new() }
    }

    fn bin(&self, p: Point2<T>) -> (i64, i64) {
        let bx = (p.x / self.tol).floor().to_i64().unwrap_or(i64::MAX);
        let by = (p.y / self.tol).floor().to_i64().unwrap_or(i64::MAX);
        (bx, by)
    }

    pub(crate) fn vertex(&mut self, p: Point2<T>) -> usize {
        let (bx, by) = self.bin(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.bins.get(&(bx + dx, by + dy)) {
                    for &id in ids {
                        if (self.vertices[id] - p).norm() <= self.tol {
                            return id;
                        }
                    }
                }
            }
        }
        let id = self.vertices.len();
        self.vertices.push(p);
        self.bins.entry((bx, by)).or_default().push(id);
        id
    }

    /// Adds a polygon; consecutive merged vertices are dropped and polygons
    /// collapsing below three vertices are discarded.
    pub(crate) fn push(&mut self, poly: &[Point2<T>]) {
        let mut ids: Vec<usize> = Vec::with_capacity(poly.len());
        for &p in poly {
            let id = self.vertex(p);
            if ids.last() != Some(&id) {
                ids.push(id);
            }
        }
        while ids.len() > 1 && ids.first() == ids.last() {
            ids.pop();
        }
        if ids.len() >= 3 {
            self.cells.push(PolygonCell { vertex_ids: ids });
        }
    }

    pub(crate) fn into_parts(self) -> (Vec<Point2<T>>, Vec<PolygonCell>) {
        (self.vertices, self.cells)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_squares() -> PolygonMesh<f64> {
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(2.0, 1.0),
        ];
        let cells = vec![
            PolygonCell { vertex_ids: vec![0, 1, 4, 3] },
            PolygonCell { vertex_ids: vec![1, 2, 5, 4] },
        ];
        PolygonMesh::new(v, cells).unwrap()
    }

    #[test]
    fn shared_edge_has_two_cells_and_opposite_signs() {
        let m = two_squares();
        assert_eq!(m.num_edges(), 7);
        let interior: Vec<_> = m.edges().iter().enumerate().filter(|(_, e)| !e.is_boundary()).collect();
        assert_eq!(interior.len(), 1);
        let (id, e) = interior[0];
        assert_eq!((e.left, e.right), (0, Some(1)));
        assert_eq!(e.normal, Point2::new(1.0, 0.0));
        let s0 = m.cell_edges(0).iter().find(|h| h.edge == id).unwrap().sign;
        let s1 = m.cell_edges(1).iter().find(|h| h.edge == id).unwrap().sign;
        assert_eq!((s0, s1), (1, -1));
    }

    #[test]
    fn normals_are_unit_and_orthogonal() {
        let m = two_squares();
        for (i, e) in m.edges().iter().enumerate() {
            let [a, b] = e.vertices;
            let d = m.vertices()[b] - m.vertices()[a];
            assert!((e.normal.norm() - 1.0).abs() < 1e-15);
            assert!(e.normal.dot(d).abs() < 1e-15, "edge {i}");
        }
    }

    #[test]
    fn clockwise_cell_is_rejected() {
        let v = vec![Point2::new(0.0, 0.0), Point2::new(0.0, 1.0), Point2::new(1.0, 0.0)];
        let err = PolygonMesh::new(v, vec![PolygonCell { vertex_ids: vec![0, 1, 2] }]).unwrap_err();
        assert!(matches!(err, Error::DegenerateCell { cell: 0, .. }));
    }

    #[test]
    fn same_direction_neighbours_are_inconsistent() {
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.5, -1.0),
        ];
        let overlapping = vec![
            PolygonCell { vertex_ids: vec![0, 1, 3, 2] },
            PolygonCell { vertex_ids: vec![0, 1, 3] },
        ];
        assert!(matches!(PolygonMesh::new(v.clone(), overlapping), Err(Error::Orientation { .. })));
        let ok = vec![
            PolygonCell { vertex_ids: vec![0, 1, 3, 2] },
            PolygonCell { vertex_ids: vec![0, 4, 1] },
        ];
        assert!(PolygonMesh::new(v, ok).is_ok());
    }

    #[test]
    fn soup_merges_close_vertices() {
        let mut soup = PolygonSoup::new(1e-9);
        soup.push(&[Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)]);
        soup.push(&[Point2::new(1.0 + 1e-12, 0.0), Point2::new(1.0, 1.0), Point2::new(0.0, 1.0 - 1e-12)]);
        let (v, c) = soup.into_parts();
        assert_eq!(v.len(), 4);
        assert_eq!(c[1].vertex_ids, vec![1, 3, 2]);
    }
}
