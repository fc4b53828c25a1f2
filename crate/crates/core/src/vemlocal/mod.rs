//! Lowest-order tensorial virtual element on a single polygon.
//!
//! Each edge carries the vector moment `m^e = ∫_e τ n ds` taken with the
//! cell's outward normal, so a cell with `n` edges has `2n` local unknowns
//! ordered `(m^0_x, m^0_y, m^1_x, ...)`.

mod material;

pub use material::{Lame, Material};

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::dense::Dense;
use crate::error::{Error, Result};
use crate::polymesh::geometry::{self, Point2};
use crate::polymesh::PolygonMesh;
use crate::polyquad::edge_quadrature;
use crate::scalar::Real;

/// 2×2 tensor, row-major.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Tensor2<T> {
    pub m: [[T; 2]; 2],
}

impl<T: Real> Tensor2<T> {
    pub fn new(xx: T, xy: T, yx: T, yy: T) -> Self {
        Self { m: [[xx, xy], [yx, yy]] }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    /// Unit tensor `e_i ⊗ e_j` for component index `2i + j`.
    pub fn basis(k: usize) -> Self {
        let mut t = Self::zero();
        t.m[k / 2][k % 2] = T::one();
        t
    }

    pub fn components(&self) -> [T; 4] {
        [self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]]
    }

    pub fn from_components(c: &[T]) -> Self {
        Self::new(c[0], c[1], c[2], c[3])
    }

    pub fn trace(&self) -> T {
        self.m[0][0] + self.m[1][1]
    }

    pub fn dev(&self) -> Self {
        let half = self.trace() * T::lit(0.5);
        Self::new(self.m[0][0] - half, self.m[0][1], self.m[1][0], self.m[1][1] - half)
    }

    pub fn ddot(&self, o: &Self) -> T {
        self.m[0][0] * o.m[0][0] + self.m[0][1] * o.m[0][1] + self.m[1][0] * o.m[1][0] + self.m[1][1] * o.m[1][1]
    }

    /// `τ n`.
    pub fn apply(&self, n: Point2<T>) -> [T; 2] {
        [self.m[0][0] * n.x + self.m[0][1] * n.y, self.m[1][0] * n.x + self.m[1][1] * n.y]
    }

    pub fn norm(&self) -> T {
        self.ddot(self).sqrt()
    }
}

impl<T: Real> Add for Tensor2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (a, b) = (self.components(), o.components());
        Self::new(a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3])
    }
}

impl<T: Real> Sub for Tensor2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let (a, b) = (self.components(), o.components());
        Self::new(a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3])
    }
}

impl<T: Real> Mul<T> for Tensor2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        let a = self.components();
        Self::new(a[0] * s, a[1] * s, a[2] * s, a[3] * s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalEdge<T> {
    pub a: Point2<T>,
    pub b: Point2<T>,
    pub length: T,
    /// Outward unit normal.
    pub normal: Point2<T>,
    pub midpoint: Point2<T>,
}

/// Geometric data of one cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellGeometry<T> {
    pub cell: usize,
    pub vertices: Vec<Point2<T>>,
    pub area: T,
    pub centroid: Point2<T>,
    pub diameter: T,
    pub edges: Vec<LocalEdge<T>>,
}

impl<T: Real> CellGeometry<T> {
    pub fn new(cell: usize, vertices: Vec<Point2<T>>) -> Result<Self> {
        let degenerate = |reason: &str| Error::DegenerateCell { cell, reason: reason.into() };
        if vertices.len() < 3 {
            return Err(degenerate("fewer than three vertices"));
        }
        let area = geometry::signed_area(&vertices);
        if !(area > T::zero()) {
            return Err(degenerate("non-positive area"));
        }
        let n = vertices.len();
        let mut edges = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            let d = b - a;
            let length = d.norm();
            if !(length > T::zero()) {
                return Err(degenerate("zero-length edge"));
            }
            let normal = Point2::new(d.y / length, -d.x / length);
            edges.push(LocalEdge { a, b, length, normal, midpoint: a.lerp(b, T::lit(0.5)) });
        }
        Ok(Self {
            cell,
            centroid: geometry::centroid(&vertices),
            diameter: geometry::diameter(&vertices),
            area,
            vertices,
            edges,
        })
    }

    pub fn from_mesh(mesh: &PolygonMesh<T>, cell: usize) -> Result<Self> {
        Self::new(cell, mesh.cell_polygon(cell))
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_dofs(&self) -> usize {
        2 * self.edges.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalDofSet<T> {
    pub cell: usize,
    /// `∫_e τ n ds` per edge, in cell edge order.
    pub moments: Vec<[T; 2]>,
}

impl<T: Real> LocalDofSet<T> {
    pub fn from_values(cell: usize, values: &[T]) -> Self {
        Self { cell, moments: values.chunks_exact(2).map(|c| [c[0], c[1]]).collect() }
    }

    pub fn values(&self) -> Vec<T> {
        self.moments.iter().flat_map(|m| m.iter().copied()).collect()
    }
}

/// Edge moments of an analytic tensor field.
pub fn dofs_of_field<T: Real>(geom: &CellGeometry<T>, field: impl Fn(Point2<T>) -> Tensor2<T>) -> LocalDofSet<T> {
    let moments = geom
        .edges
        .iter()
        .map(|e| {
            let (pts, wts) = edge_quadrature(e.a, e.b, 11);
            let mut m = [T::zero(); 2];
            for (&p, &w) in pts.iter().zip(&wts) {
                let tn = field(p).apply(e.normal);
                m[0] += w * tn[0];
                m[1] += w * tn[1];
            }
            m
        })
        .collect();
    LocalDofSet { cell: geom.cell, moments }
}

/// Constant divergence `(1/|E|) Σ_e m^e`.
pub fn recover_divergence<T: Real>(geom: &CellGeometry<T>, dofs: &LocalDofSet<T>) -> [T; 2] {
    let mut s = [T::zero(); 2];
    for m in &dofs.moments {
        s[0] += m[0];
        s[1] += m[1];
    }
    [s[0] / geom.area, s[1] / geom.area]
}

/// Linear maps from the local unknowns to the computable quantities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalProjector<T> {
    /// 4 × 2n: components `(xx, xy, yx, yy)` of the constant projection.
    pub pi_matrix: Dense<T>,
    /// 2 × 2n: the constant divergence.
    pub div_matrix: Dense<T>,
    /// `∫_E tr τ` as a functional on the local unknowns.
    pub trace_vector: Vec<T>,
}

impl<T: Real> LocalProjector<T> {
    pub fn project(&self, values: &[T]) -> Tensor2<T> {
        Tensor2::from_components(&self.pi_matrix.matvec(values))
    }

    pub fn divergence(&self, values: &[T]) -> [T; 2] {
        let d = self.div_matrix.matvec(values);
        [d[0], d[1]]
    }
}

/// Builds the projection onto constant tensors.
///
/// Integrating by parts against `x_j - c_j` (with `c` the centroid) gives
/// `(Πτ)_ij = (1/|E|) Σ_e m^e_i (mid_e - c)_j`; the divergence term drops out
/// because `∫_E (x - c) = 0`.
pub fn compute_projector<T: Real>(geom: &CellGeometry<T>) -> Result<LocalProjector<T>> {
    if !(geom.area > T::zero()) {
        return Err(Error::DegenerateCell { cell: geom.cell, reason: "non-positive area".into() });
    }
    let n = geom.num_dofs();
    let inv_area = T::one() / geom.area;
    let mut pi = Dense::zeros(4, n);
    let mut div = Dense::zeros(2, n);
    for (e, edge) in geom.edges.iter().enumerate() {
        let r = edge.midpoint - geom.centroid;
        let rel = [r.x, r.y];
        for i in 0..2 {
            div[(i, 2 * e + i)] = inv_area;
            for j in 0..2 {
                pi[(2 * i + j, 2 * e + i)] = rel[j] * inv_area;
            }
        }
    }
    let trace_vector = (0..n).map(|k| geom.area * (pi[(0, k)] + pi[(3, k)])).collect();
    Ok(LocalProjector { pi_matrix: pi, div_matrix: div, trace_vector })
}

/// Local unknowns of a constant tensor: `m^e = τ n_e |e|`. Returned as the
/// 2n × 4 matrix acting on tensor components.
pub fn constant_tensor_dofs<T: Real>(geom: &CellGeometry<T>) -> Dense<T> {
    let n = geom.num_dofs();
    let mut r = Dense::zeros(n, 4);
    for (e, edge) in geom.edges.iter().enumerate() {
        let nl = [edge.normal.x * edge.length, edge.normal.y * edge.length];
        for i in 0..2 {
            for j in 0..2 {
                r[(2 * e + i, 2 * i + j)] = nl[j];
            }
        }
    }
    r
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalMatrices<T> {
    /// Consistency plus stabilisation.
    pub a_local: Dense<T>,
    /// 2 × 2n: `v · Σ_e m^e` for the two unit vectors `v`.
    pub b_local: Dense<T>,
    /// `|E| I`.
    pub c_local: Dense<T>,
    /// Stabilisation part of `a_local`.
    pub s_local: Dense<T>,
}

/// Compliance form on constant tensors as a 4×4 matrix per unit area.
fn compliance_matrix<T: Real>(material: &Material) -> Dense<T> {
    let inv_mu = T::lit(1.0 / material.mu);
    let tr = T::lit(material.trace_coefficient());
    // (1/μ) dev σ : dev τ + c tr σ tr τ = (1/μ) σ:τ + (c - 1/(2μ)) tr σ tr τ
    let shift = tr - inv_mu * T::lit(0.5);
    let mut d = Dense::identity(4).scale(inv_mu);
    for i in [0, 3] {
        for j in [0, 3] {
            d[(i, j)] += shift;
        }
    }
    d
}

/// Compliance form on two constant tensors per unit area.
pub fn compliance<T: Real>(material: &Material, s: &Tensor2<T>, t: &Tensor2<T>) -> T {
    s.dev().ddot(&t.dev()) * T::lit(1.0 / material.mu) + s.trace() * t.trace() * T::lit(material.trace_coefficient())
}

pub fn local_matrices<T: Real>(
    geom: &CellGeometry<T>,
    projector: &LocalProjector<T>,
    material: &Material,
    gamma: T,
) -> Result<LocalMatrices<T>> {
    if !(gamma >= T::zero()) || !gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("stabilisation constant must be finite and >= 0, got {gamma}")));
    }
    if !(material.mu > 0.0) {
        return Err(Error::InvalidMaterial(format!("shear modulus must be positive, got {}", material.mu)));
    }
    let n = geom.num_dofs();
    let pi = &projector.pi_matrix;
    let consistency = pi.transpose().matmul(&compliance_matrix(material)).matmul(pi).scale(geom.area);
    // (I - RΠ) removes the constant part of the unknowns
    let residual = Dense::identity(n).sub(&constant_tensor_dofs(geom).matmul(pi));
    let s_local = residual.transpose().matmul(&residual).scale(gamma / T::lit(material.mu));
    let mut a_local = consistency.add(&s_local);
    // symmetrise away rounding
    for i in 0..n {
        for j in 0..i {
            let v = (a_local[(i, j)] + a_local[(j, i)]) * T::lit(0.5);
            a_local[(i, j)] = v;
            a_local[(j, i)] = v;
        }
    }
    let mut b_local = Dense::zeros(2, n);
    for e in 0..geom.num_edges() {
        b_local[(0, 2 * e)] = T::one();
        b_local[(1, 2 * e + 1)] = T::one();
    }
    let c_local = Dense::identity(2).scale(geom.area);
    Ok(LocalMatrices { a_local, b_local, c_local, s_local })
}

/// Cellwise constant fields recovered from a solution: `(Π ρ, u)`.
pub fn interpolate_solution<T: Real>(projector: &LocalProjector<T>, dofs: &[T], u: [T; 2]) -> (Tensor2<T>, [T; 2]) {
    (projector.project(dofs), u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> CellGeometry<f64> {
        CellGeometry::new(
            0,
            vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(1.0, 1.0), Point2::new(0.0, 1.0)],
        )
        .unwrap()
    }

    fn pentagon() -> CellGeometry<f64> {
        CellGeometry::new(
            7,
            vec![
                Point2::new(0.1, 0.0),
                Point2::new(1.2, 0.2),
                Point2::new(1.4, 1.0),
                Point2::new(0.5, 1.5),
                Point2::new(-0.2, 0.8),
            ],
        )
        .unwrap()
    }

    #[test]
    fn moments_of_simple_fields() {
        let g = unit_square();
        let d = dofs_of_field(&g, |_| Tensor2::identity());
        assert!(d.moments[0][0].abs() < 1e-15 && (d.moments[0][1] + 1.0).abs() < 1e-15);
        let z = dofs_of_field(&g, |_| Tensor2::zero());
        assert!(z.values().iter().all(|&v| v == 0.0));
        let d = dofs_of_field(&g, |p| Tensor2::new(p.x, 0.0, 0.0, 0.0));
        assert!((d.moments[1][0] - 1.0).abs() < 1e-15 && d.moments[1][1] == 0.0);
        assert!(d.moments[3][0].abs() < 1e-15);
    }

    #[test]
    fn divergence_recovery() {
        let g = pentagon();
        let d = recover_divergence(&g, &dofs_of_field(&g, |_| Tensor2::identity()));
        assert!(d[0].abs() < 1e-15 && d[1].abs() < 1e-15);
        let s = unit_square();
        let d = recover_divergence(&s, &dofs_of_field(&s, |p| Tensor2::new(p.x, 0.0, 0.0, 0.0)));
        assert!((d[0] - 1.0).abs() < 1e-15 && d[1].abs() < 1e-15);
    }

    #[test]
    fn projector_reproduces_constants_and_averages() {
        let g = pentagon();
        let p = compute_projector(&g).unwrap();
        let t0 = Tensor2::new(1.5, -0.3, 0.7, 2.0);
        let back = p.project(&dofs_of_field(&g, |_| t0).values());
        assert!((back - t0).norm() < 1e-13);
        let s = unit_square();
        let p = compute_projector(&s).unwrap();
        let back = p.project(&dofs_of_field(&s, |x| Tensor2::new(x.x, 0.0, 0.0, 0.0)).values());
        assert!((back - Tensor2::new(0.5, 0.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn identity_energy_on_unit_square() {
        let g = unit_square();
        let mat = Material::new(1.0, 0.35).unwrap();
        let p = compute_projector(&g).unwrap();
        let lm = local_matrices(&g, &p, &mat, 1.0).unwrap();
        let d = dofs_of_field(&g, |_| Tensor2::identity()).values();
        let a = lm.a_local.matvec(&d).iter().zip(&d).map(|(x, y)| x * y).sum::<f64>();
        let lambda = mat.lambda_value();
        let expected = 4.0 / (4.0 * lambda + 6.0 * mat.mu);
        assert!((a - expected).abs() < 1e-14, "{a} vs {expected}");
        assert!((expected - 0.704348).abs() < 1e-6);
    }

    #[test]
    fn stabilisation_vanishes_on_constants() {
        let g = pentagon();
        let mat = Material::new(1.0, 0.3).unwrap();
        let p = compute_projector(&g).unwrap();
        let lm = local_matrices(&g, &p, &mat, 3.0).unwrap();
        for k in 0..4 {
            let d = dofs_of_field(&g, |_| Tensor2::basis(k)).values();
            let sd = lm.s_local.matvec(&d);
            assert!(sd.iter().all(|v| v.abs() < 1e-13));
        }
        assert_eq!(lm.c_local[(0, 0)], g.area);
        assert_eq!(lm.a_local.symmetry_defect(), 0.0);
    }

    #[test]
    fn degenerate_cell_is_rejected() {
        let flat = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(2.0, 0.0)];
        assert!(matches!(CellGeometry::new(3, flat), Err(Error::DegenerateCell { cell: 3, .. })));
    }

    #[test]
    fn interpolation() {
        let g = pentagon();
        let p = compute_projector(&g).unwrap();
        let (r, u) = interpolate_solution(&p, &vec![0.0; g.num_dofs()], [0.0, 0.0]);
        assert_eq!(r, Tensor2::zero());
        assert_eq!(u, [0.0, 0.0]);
        let s0 = Tensor2::new(0.2, 0.1, -0.4, 0.9);
        let (r, _) = interpolate_solution(&p, &dofs_of_field(&g, |_| s0).values(), [1.0, 2.0]);
        assert!((r - s0).norm() < 1e-14);
    }
}
