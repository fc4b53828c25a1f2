//! Scaled monomials, polygon quadrature and piecewise-constant L² projection.

mod rules;

pub use rules::{edge_quadrature, gauss_legendre, triangle_rule};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polymesh::geometry::{self, Point2};
use crate::polymesh::PolygonMesh;
use crate::scalar::Real;

/// Default exactness degree for cell integrals.
pub const DEFAULT_CELL_DEGREE: usize = 4;

/// Monomials `((x - x0) / h)^alpha` with `|alpha| <= degree`.
///
/// In dimension 1 the coordinate is the signed distance along `tangent`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledMonomialBasis<T> {
    pub center: Point2<T>,
    pub diameter: T,
    pub degree: usize,
    pub dim: usize,
    /// Unit direction used to parametrise an edge (dimension 1 only).
    pub tangent: Point2<T>,
}

pub fn monomial_basis<T: Real>(center: Point2<T>, diameter: T, degree: usize, dim: usize) -> Result<ScaledMonomialBasis<T>> {
    if !(diameter > T::zero()) || !diameter.is_finite() {
        return Err(Error::InvalidArgument(format!("monomial basis needs a positive diameter, got {diameter}")));
    }
    if dim != 1 && dim != 2 {
        return Err(Error::InvalidArgument(format!("monomial basis dimension must be 1 or 2, got {dim}")));
    }
    Ok(ScaledMonomialBasis { center, diameter, degree, dim, tangent: Point2::new(T::one(), T::zero()) })
}

impl<T: Real> ScaledMonomialBasis<T> {
    /// Basis on the segment `[a, b]`, centred at its midpoint.
    pub fn on_edge(a: Point2<T>, b: Point2<T>, degree: usize) -> Result<Self> {
        let len = (b - a).norm();
        let mut basis = monomial_basis(a.lerp(b, T::lit(0.5)), len, degree, 1)?;
        basis.tangent = (b - a) * (T::one() / len);
        Ok(basis)
    }

    pub fn dimension(&self) -> usize {
        match self.dim {
            1 => self.degree + 1,
            _ => (self.degree + 1) * (self.degree + 2) / 2,
        }
    }

    /// Exponent pairs in graded order: (0,0), (1,0), (0,1), (2,0), (1,1), ...
    pub fn exponents(&self) -> Vec<(usize, usize)> {
        match self.dim {
            1 => (0..=self.degree).map(|a| (a, 0)).collect(),
            _ => (0..=self.degree)
                .flat_map(|total| (0..=total).map(move |b| (total - b, b)))
                .collect(),
        }
    }

    pub fn evaluate(&self, p: Point2<T>) -> Vec<T> {
        let d = (p - self.center) * (T::one() / self.diameter);
        match self.dim {
            1 => {
                let s = d.dot(self.tangent);
                (0..=self.degree).map(|a| s.powi(a as i32)).collect()
            }
            _ => self
                .exponents()
                .into_iter()
                .map(|(a, b)| d.x.powi(a as i32) * d.y.powi(b as i32))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule<T> {
    pub points: Vec<Point2<T>>,
    pub weights: Vec<T>,
    pub degree: usize,
}

impl<T: Real> QuadratureRule<T> {
    pub fn integrate(&self, f: impl Fn(Point2<T>) -> T) -> T {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }

    pub fn total_weight(&self) -> T {
        self.weights.iter().copied().sum()
    }
}

/// Splits a simple counterclockwise polygon into triangles by ear clipping.
fn ear_clip<T: Real>(poly: &[Point2<T>]) -> Vec<[Point2<T>; 3]> {
    let mut idx: Vec<usize> = (0..poly.len()).collect();
    let mut tris = Vec::with_capacity(poly.len().saturating_sub(2));
    let mut guard = 0;
    while idx.len() > 3 && guard < 4 * poly.len() * poly.len() {
        guard += 1;
        let n = idx.len();
        let mut clipped = false;
        for i in 0..n {
            let (a, b, c) = (poly[idx[(i + n - 1) % n]], poly[idx[i]], poly[idx[(i + 1) % n]]);
            if (b - a).cross(c - b) <= T::zero() {
                continue;
            }
            let blocked = idx.iter().any(|&j| {
                let p = poly[j];
                if p == a || p == b || p == c {
                    return false;
                }
                (b - a).cross(p - a) >= T::zero() && (c - b).cross(p - b) >= T::zero() && (a - c).cross(p - c) >= T::zero()
            });
            if !blocked {
                tris.push([a, b, c]);
                idx.remove(i);
                clipped = true;
                break;
            }
        }
        if !clipped {
            break;
        }
    }
    if idx.len() == 3 {
        tris.push([poly[idx[0]], poly[idx[1]], poly[idx[2]]]);
    }
    tris
}

/// Sub-triangles for integration: a fan from a kernel point when the polygon
/// is star-shaped, ear clipping otherwise.
pub fn triangulate<T: Real>(poly: &[Point2<T>]) -> Result<Vec<[Point2<T>; 3]>> {
    if !geometry::is_simple(poly) {
        return Err(Error::InvalidArgument("polygon is not simple".into()));
    }
    if geometry::signed_area(poly) <= T::zero() {
        return Err(Error::InvalidArgument("polygon is not counterclockwise".into()));
    }
    let n = poly.len();
    if n == 3 {
        return Ok(vec![[poly[0], poly[1], poly[2]]]);
    }
    let ker = geometry::kernel(poly);
    if ker.len() >= 3 && geometry::signed_area(&ker) > T::zero() {
        let c = geometry::centroid(poly);
        let scale = geometry::diameter(poly);
        let margin = T::lit(1e-10) * scale;
        let fan_point = if geometry::inset_distance(&ker, c) > margin { c } else { geometry::centroid(&ker) };
        if geometry::inset_distance(&ker, fan_point) > T::zero() {
            return Ok((0..n).map(|i| [fan_point, poly[i], poly[(i + 1) % n]]).collect());
        }
    }
    let tris = ear_clip(poly);
    if tris.len() != n - 2 {
        return Err(Error::InvalidArgument("ear clipping failed".into()));
    }
    Ok(tris)
}

/// Quadrature on a polygon exact for polynomials of total degree `degree`.
pub fn polygon_quadrature<T: Real>(poly: &[Point2<T>], degree: usize) -> Result<QuadratureRule<T>> {
    let tris = triangulate(poly)?;
    let (bary, w_ref) = triangle_rule(degree);
    let mut points = Vec::with_capacity(tris.len() * w_ref.len());
    let mut weights = Vec::with_capacity(points.capacity());
    for [a, b, c] in tris {
        let area = (b - a).cross(c - a) * T::lit(0.5);
        for (l, &w) in bary.iter().zip(&w_ref) {
            let p = Point2::new(
                a.x * T::lit(l[0]) + b.x * T::lit(l[1]) + c.x * T::lit(l[2]),
                a.y * T::lit(l[0]) + b.y * T::lit(l[1]) + c.y * T::lit(l[2]),
            );
            points.push(p);
            weights.push(area * T::lit(w));
        }
    }
    Ok(QuadratureRule { points, weights, degree })
}

/// Cellwise L² projection of a vector field onto polynomials of degree `k`.
///
/// Only `k = 0` is supported; each cell gets a single coefficient, its average.
pub fn l2_project_vector<T: Real>(
    field: impl Fn(Point2<T>) -> [T; 2],
    mesh: &PolygonMesh<T>,
    k: usize,
) -> Result<Vec<Vec<[T; 2]>>> {
    if k != 0 {
        return Err(Error::Unsupported(format!("L2 projection of degree {k}")));
    }
    (0..mesh.num_cells())
        .map(|c| {
            let poly = mesh.cell_polygon(c);
            let rule = polygon_quadrature(&poly, DEFAULT_CELL_DEGREE)?;
            let area = rule.total_weight();
            let mut acc = [T::zero(); 2];
            for (&p, &w) in rule.points.iter().zip(&rule.weights) {
                let f = field(p);
                acc[0] += w * f[0];
                acc[1] += w * f[1];
            }
            Ok(vec![[acc[0] / area, acc[1] / area]])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymesh::PolygonCell;

    fn unit_square() -> Vec<Point2<f64>> {
        vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(1.0, 1.0), Point2::new(0.0, 1.0)]
    }

    #[test]
    fn monomial_values() {
        let b = monomial_basis(Point2::new(0.5, 0.5), 2f64.sqrt(), 1, 2).unwrap();
        let v = b.evaluate(Point2::new(1.0, 0.5));
        assert_eq!(v[0], 1.0);
        assert!((v[1] - 0.5 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(v[2], 0.0);
        assert_eq!(monomial_basis(Point2::new(0.0, 0.0), 1.0, 2, 2).unwrap().dimension(), 6);
        assert_eq!(monomial_basis(Point2::new(0.0, 0.0), 1.0, 2, 1).unwrap().dimension(), 3);
        assert!(monomial_basis(Point2::new(0.0, 0.0), 0.0, 1, 2).is_err());
    }

    #[test]
    fn non_constant_members_vanish_at_center() {
        let c = Point2::new(0.3, -0.2);
        let b = monomial_basis(c, 0.7, 3, 2).unwrap();
        let v = b.evaluate(c);
        assert_eq!(v[0], 1.0);
        assert!(v[1..].iter().all(|&x| x == 0.0));
        let e = ScaledMonomialBasis::<f64>::on_edge(Point2::new(0.0, 0.0), Point2::new(3.0, 4.0), 2).unwrap();
        assert!((e.evaluate(Point2::new(3.0, 4.0))[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn square_integrals() {
        let q: QuadratureRule<f64> = polygon_quadrature(&unit_square(), 0).unwrap();
        assert!((q.total_weight() - 1.0).abs() < 1e-15);
        let q: QuadratureRule<f64> = polygon_quadrature(&unit_square(), 2).unwrap();
        assert!((q.integrate(|p| p.x * p.x) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn hexagon_area() {
        let r = 0.5;
        let hex: Vec<Point2<f64>> = (0..6)
            .map(|i| {
                let t = std::f64::consts::PI / 3.0 * i as f64;
                Point2::new(r * t.cos(), r * t.sin())
            })
            .collect();
        let exact = 1.5 * 3f64.sqrt() * r * r;
        let q: QuadratureRule<f64> = polygon_quadrature(&hex, 4).unwrap();
        assert!((q.total_weight() - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn non_star_polygon_falls_back_to_ear_clipping() {
        let comb = vec![
            Point2::new(0.0, 0.0),
            Point2::new(5.0, 0.0),
            Point2::new(5.0, 3.0),
            Point2::new(4.0, 3.0),
            Point2::new(4.0, 0.5),
            Point2::new(3.0, 0.5),
            Point2::new(3.0, 3.0),
            Point2::new(2.0, 3.0),
            Point2::new(2.0, 0.5),
            Point2::new(1.0, 0.5),
            Point2::new(1.0, 3.0),
            Point2::new(0.0, 3.0),
        ];
        let q: QuadratureRule<f64> = polygon_quadrature(&comb, 3).unwrap();
        let area = geometry::signed_area(&comb);
        assert!((q.total_weight() - area).abs() < 1e-12 * area);
        // ∫ y dA computed by the divergence theorem
        let n = comb.len();
        let exact: f64 = (0..n)
            .map(|i| {
                let (a, b) = (comb[i], comb[(i + 1) % n]);
                -(b.x - a.x) * (a.y * a.y + a.y * b.y + b.y * b.y) / 6.0
            })
            .sum();
        assert!((q.integrate(|p| p.y) - exact).abs() < 1e-12 * exact.abs());
    }

    #[test]
    fn projection_of_fields() {
        let m = PolygonMesh::new(unit_square(), vec![PolygonCell { vertex_ids: vec![0, 1, 2, 3] }]).unwrap();
        let c: Vec<Vec<[f64; 2]>> = l2_project_vector(|_| [1.0, 2.0], &m, 0).unwrap();
        assert_eq!(c[0][0], [1.0, 2.0]);
        let c: Vec<Vec<[f64; 2]>> = l2_project_vector(|p| [p.x, 0.0], &m, 0).unwrap();
        assert!((c[0][0][0] - 0.5).abs() < 1e-15 && c[0][0][1] == 0.0);
        // triangle (0,0), (1,0), (0,1): mean of x² is 1/6, mean of xy is 1/12
        let t = PolygonMesh::new(
            vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)],
            vec![PolygonCell { vertex_ids: vec![0, 1, 2] }],
        )
        .unwrap();
        let c: Vec<Vec<[f64; 2]>> = l2_project_vector(|p| [p.x * p.x, p.x * p.y], &t, 0).unwrap();
        assert!((c[0][0][0] - 1.0 / 6.0).abs() < 1e-14);
        assert!((c[0][0][1] - 1.0 / 12.0).abs() < 1e-14);
        assert!(l2_project_vector(|_| [0.0, 0.0], &t, 1).is_err());
    }
}
