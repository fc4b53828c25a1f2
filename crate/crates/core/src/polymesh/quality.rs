use serde::{Deserialize, Serialize};

use super::geometry;
use super::PolygonMesh;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshQualityReport {
    /// Largest cell diameter.
    pub h_max: f64,
    /// Minimum over cells of `min_e |e| / h_E`.
    pub min_edge_ratio: f64,
    /// Whether the kernel of each cell has positive area.
    pub star_shaped_ok: Vec<bool>,
    pub cell_count: usize,
    pub edge_count: usize,
    pub vertex_count: usize,
}

impl MeshQualityReport {
    pub fn all_star_shaped(&self) -> bool {
        self.star_shaped_ok.iter().all(|&ok| ok)
    }
}

/// Checks the regularity assumptions cell by cell. Failures are flagged in the
/// report rather than returned as errors.
pub fn audit_regularity<T: Real>(mesh: &PolygonMesh<T>) -> MeshQualityReport {
    let mut h_max = T::zero();
    let mut min_ratio = T::infinity();
    let mut star = Vec::with_capacity(mesh.num_cells());
    for c in 0..mesh.num_cells() {
        let poly = mesh.cell_polygon(c);
        let h = geometry::diameter(&poly);
        h_max = h_max.max(h);
        let n = poly.len();
        let shortest = (0..n)
            .map(|i| (poly[(i + 1) % n] - poly[i]).norm())
            .fold(T::infinity(), |a, b| a.min(b));
        min_ratio = min_ratio.min(shortest / h);
        let area = geometry::signed_area(&poly);
        let k = geometry::kernel(&poly);
        let ok = k.len() >= 3 && geometry::signed_area(&k) > area * T::lit(1e-12);
        star.push(ok);
    }
    MeshQualityReport {
        h_max: h_max.to_f64_lossy(),
        min_edge_ratio: min_ratio.to_f64_lossy(),
        star_shaped_ok: star,
        cell_count: mesh.num_cells(),
        edge_count: mesh.num_edges(),
        vertex_count: mesh.num_vertices(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymesh::{generate_mesh, FamilyTag, MeshFamily, PolygonCell, Point2, Domain};

    #[test]
    fn uniform_two_by_two_squares() {
        let fam = MeshFamily::new(FamilyTag::T3DistortedSquares).with_amplitude(0.0);
        let m: PolygonMesh<f64> = generate_mesh(&fam, 2, Domain::UnitSquare).unwrap();
        let q = audit_regularity(&m);
        assert!((q.h_max - 2f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((q.min_edge_ratio - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!((q.cell_count, q.edge_count, q.vertex_count), (4, 12, 9));
    }

    #[test]
    fn equilateral_triangle() {
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.5, 3f64.sqrt() / 2.0),
        ];
        let m = PolygonMesh::new(v, vec![PolygonCell { vertex_ids: vec![0, 1, 2] }]).unwrap();
        let q = audit_regularity(&m);
        assert!(q.all_star_shaped());
        assert!((q.h_max - 1.0).abs() < 1e-15);
    }

    #[test]
    fn strongly_distorted_squares_stay_star_shaped() {
        let fam = MeshFamily::new(FamilyTag::T3DistortedSquares).with_amplitude(0.25);
        for n in [4, 8, 16, 32] {
            let m: PolygonMesh<f64> = generate_mesh(&fam, n, Domain::UnitSquare).unwrap();
            assert!(audit_regularity(&m).all_star_shaped(), "n = {n}");
        }
    }

    #[test]
    fn hexagon_regularity() {
        let m: PolygonMesh<f64> = generate_mesh(&MeshFamily::new(FamilyTag::T2Hexagons), 16, Domain::UnitSquare).unwrap();
        let q = audit_regularity(&m);
        assert!(q.min_edge_ratio > 0.2, "{}", q.min_edge_ratio);
        assert!((m.total_area() - 1.0).abs() < 1e-10);
    }
}
