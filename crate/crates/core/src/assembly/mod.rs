//! Global numbering and assembly of the pencil `K x = κ M x`.
//!
//! Unknowns are ordered `(σ, u, ξ)`: two edge moments per edge taken with the
//! edge's stored normal, two displacement values per cell, and one multiplier
//! enforcing `∫_Ω tr σ = 0`.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel;
use crate::polymesh::geometry::Point2;
use crate::polymesh::PolygonMesh;
use crate::scalar::Real;
use crate::sparse::{geometric_nested_dissection, CooMatrix, CscMatrix};
use crate::vemlocal::{compute_projector, local_matrices, CellGeometry, LocalProjector, Material, Tensor2};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DofMap {
    pub edge_dof_offset: Vec<usize>,
    pub cell_dof_offset: Vec<usize>,
    pub n_sigma: usize,
    pub n_u: usize,
    pub constraint_index: usize,
    /// Global edge id of each local edge, per cell.
    pub cell_edges: Vec<Vec<usize>>,
    /// +1 when the cell's outward normal matches the edge normal, -1 otherwise.
    pub cell_signs: Vec<Vec<i8>>,
}

impl DofMap {
    pub fn dim(&self) -> usize {
        self.n_sigma + self.n_u + 1
    }

    /// Global indices and signs of a cell's local σ unknowns.
    pub fn cell_sigma_dofs(&self, cell: usize) -> impl Iterator<Item = (usize, i8)> + '_ {
        self.cell_edges[cell].iter().zip(&self.cell_signs[cell]).flat_map(move |(&e, &s)| {
            let o = self.edge_dof_offset[e];
            [(o, s), (o + 1, s)]
        })
    }

    /// +1 on σ unknowns, -1 on u and the multiplier.
    pub fn block_signs(&self) -> Vec<i8> {
        let mut s = vec![1i8; self.n_sigma];
        s.resize(self.dim(), -1);
        s
    }
}

pub fn build_dof_map<T: Real>(mesh: &PolygonMesh<T>) -> DofMap {
    let ne = mesh.num_edges();
    let nc = mesh.num_cells();
    let n_sigma = 2 * ne;
    let n_u = 2 * nc;
    let mut cell_edges = Vec::with_capacity(nc);
    let mut cell_signs = Vec::with_capacity(nc);
    for c in 0..nc {
        let he = mesh.cell_edges(c);
        cell_edges.push(he.iter().map(|h| h.edge).collect());
        cell_signs.push(he.iter().map(|h| h.sign).collect());
    }
    DofMap {
        edge_dof_offset: (0..ne).map(|e| 2 * e).collect(),
        cell_dof_offset: (0..nc).map(|c| n_sigma + 2 * c).collect(),
        n_sigma,
        n_u,
        constraint_index: n_sigma + n_u,
        cell_edges,
        cell_signs,
    }
}

#[derive(Clone, Debug)]
pub struct GlobalSystem<T> {
    /// `[[A, Bᵀ, g], [B, 0, 0], [gᵀ, 0, 0]]`, both triangles stored.
    pub k: CscMatrix<T>,
    /// `diag(0, -C, 0)`.
    pub m: CscMatrix<T>,
    /// Diagonal of `C` (cell areas, each repeated twice).
    pub c_diag: Vec<T>,
    /// Trace functional on the σ block.
    pub trace_row: Vec<T>,
    pub dof_map: DofMap,
    /// Fill-reducing elimination order for `K`.
    pub ordering: Vec<usize>,
    pub projectors: Vec<LocalProjector<T>>,
    pub material: Material,
    pub gamma: f64,
}

impl<T: Real> GlobalSystem<T> {
    pub fn dim(&self) -> usize {
        self.dof_map.dim()
    }

    pub fn write_matrices(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        self.k.write_matrix_market(dir.join("K.mtx"))?;
        self.m.write_matrix_market(dir.join("M.mtx"))?;
        Ok(())
    }

    /// Per-cell constant pseudostress `Π ρ` and displacement of a global vector.
    pub fn cell_fields(&self, x: &[T]) -> Vec<(Tensor2<T>, [T; 2])> {
        (0..self.dof_map.cell_edges.len())
            .map(|c| {
                let local: Vec<T> = self
                    .dof_map
                    .cell_sigma_dofs(c)
                    .map(|(g, s)| if s > 0 { x[g] } else { -x[g] })
                    .collect();
                let o = self.dof_map.cell_dof_offset[c];
                crate::vemlocal::interpolate_solution(&self.projectors[c], &local, [x[o], x[o + 1]])
            })
            .collect()
    }
}

fn elimination_order<T: Real>(mesh: &PolygonMesh<T>, map: &DofMap) -> Vec<usize> {
    let ne = mesh.num_edges();
    let nc = mesh.num_cells();
    // nodes 0..ne are edges, ne..ne+nc are cells
    let mut coords = Vec::with_capacity(ne + nc);
    for e in 0..ne {
        let m = mesh.edge_midpoint(e);
        coords.push([m.x.to_f64_lossy(), m.y.to_f64_lossy()]);
    }
    for c in 0..nc {
        let m = mesh.cell_centroid(c);
        coords.push([m.x.to_f64_lossy(), m.y.to_f64_lossy()]);
    }
    let mut adjacency = vec![Vec::new(); ne + nc];
    for (c, edges) in map.cell_edges.iter().enumerate() {
        for &e in edges {
            adjacency[ne + c].push(e);
            adjacency[e].push(ne + c);
            for &f in edges {
                if f != e {
                    adjacency[e].push(f);
                }
            }
        }
    }
    let groups = geometric_nested_dissection(&coords, &adjacency, 32);
    let mut order = Vec::with_capacity(map.dim());
    for g in groups {
        let base = if g < ne { map.edge_dof_offset[g] } else { map.cell_dof_offset[g - ne] };
        order.push(base);
        order.push(base + 1);
    }
    order.push(map.constraint_index);
    order
}

/// Assembles `K` and `M` for the given material and stabilisation constant.
pub fn assemble_system<T: Real>(mesh: &PolygonMesh<T>, material: &Material, gamma: f64) -> Result<GlobalSystem<T>> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("stabilisation constant must be finite and >= 0, got {gamma}")));
    }
    let map = build_dof_map(mesh);
    let nc = mesh.num_cells();
    let locals: Vec<_> = parallel::install(|| {
        (0..nc)
            .into_par_iter()
            .map(|c| {
                let geom = CellGeometry::from_mesh(mesh, c)?;
                let proj = compute_projector(&geom)?;
                let lm = local_matrices(&geom, &proj, material, T::lit(gamma))?;
                Ok((geom.area, proj, lm))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let n = map.dim();
    let nnz_hint: usize = map.cell_edges.iter().map(|e| 4 * e.len() * e.len() + 12 * e.len()).sum();
    let mut coo = CooMatrix::with_capacity(n, n, nnz_hint);
    let mut trace_row = vec![T::zero(); map.n_sigma];
    let mut c_diag = vec![T::zero(); map.n_u];
    for (c, (area, proj, lm)) in locals.iter().enumerate() {
        let dofs: Vec<(usize, T)> = map
            .cell_sigma_dofs(c)
            .map(|(g, s)| (g, if s > 0 { T::one() } else { -T::one() }))
            .collect();
        for (i, &(gi, si)) in dofs.iter().enumerate() {
            for (j, &(gj, sj)) in dofs.iter().enumerate() {
                let v = lm.a_local[(i, j)];
                if v != T::zero() {
                    coo.push(gi, gj, si * sj * v);
                }
            }
            trace_row[gi] += si * proj.trace_vector[i];
        }
        let uo = map.cell_dof_offset[c];
        for r in 0..2 {
            for (j, &(gj, sj)) in dofs.iter().enumerate() {
                let v = lm.b_local[(r, j)];
                if v != T::zero() {
                    coo.push(uo + r, gj, sj * v);
                    coo.push(gj, uo + r, sj * v);
                }
            }
            c_diag[2 * c + r] = *area;
        }
    }
    let xi = map.constraint_index;
    for (j, &g) in trace_row.iter().enumerate() {
        if g != T::zero() {
            coo.push(j, xi, g);
            coo.push(xi, j, g);
        }
    }
    let k = coo.to_csc();
    let mut mcoo = CooMatrix::with_capacity(n, n, map.n_u);
    for (i, &a) in c_diag.iter().enumerate() {
        mcoo.push(map.n_sigma + i, map.n_sigma + i, -a);
    }
    let ordering = elimination_order(mesh, &map);
    Ok(GlobalSystem {
        k,
        m: mcoo.to_csc(),
        c_diag,
        trace_row,
        ordering,
        projectors: locals.into_iter().map(|(_, p, _)| p).collect(),
        dof_map: map,
        material: *material,
        gamma,
    })
}

/// Global σ unknowns of an analytic tensor field.
pub fn interpolate_field<T: Real>(mesh: &PolygonMesh<T>, field: impl Fn(Point2<T>) -> Tensor2<T>) -> Vec<T> {
    let mut out = vec![T::zero(); 2 * mesh.num_edges()];
    for (e, edge) in mesh.edges().iter().enumerate() {
        let [a, b] = edge.vertices;
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        let (pts, wts) = crate::polyquad::edge_quadrature(pa, pb, 11);
        for (&p, &w) in pts.iter().zip(&wts) {
            let tn = field(p).apply(edge.normal);
            out[2 * e] += w * tn[0];
            out[2 * e + 1] += w * tn[1];
        }
    }
    out
}

fn norm2<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// `‖K x - κ M x‖ / ‖x‖` for a full vector `x = (ρ, u, ξ)`.
pub fn residual_norm<T: Real>(system: &GlobalSystem<T>, x: &[T], kappa: T) -> Result<T> {
    if x.len() != system.dim() {
        return Err(Error::InvalidArgument(format!("vector length {} does not match system {}", x.len(), system.dim())));
    }
    let xn = norm2(x);
    if !(xn > T::zero()) {
        return Err(Error::InvalidArgument("residual check needs a nonzero vector".into()));
    }
    let mut r = system.k.matvec(x);
    let mx = system.m.matvec(x);
    for (ri, mi) in r.iter_mut().zip(&mx) {
        *ri -= kappa * *mi;
    }
    Ok(norm2(&r) / xn)
}

/// Residual of a candidate eigenpair given its σ and u parts; the multiplier
/// is chosen to minimise the residual.
pub fn residual_check<T: Real>(system: &GlobalSystem<T>, rho: &[T], u: &[T], kappa: T) -> Result<T> {
    let map = &system.dof_map;
    if rho.len() != map.n_sigma || u.len() != map.n_u {
        return Err(Error::InvalidArgument("block lengths do not match the system".into()));
    }
    let mut x = Vec::with_capacity(map.dim());
    x.extend_from_slice(rho);
    x.extend_from_slice(u);
    x.push(T::zero());
    let kx = system.k.matvec(&x);
    let g = &system.trace_row;
    let gg: T = g.iter().map(|&v| v * v).sum();
    let xi = if gg > T::zero() { -g.iter().zip(&kx).map(|(&a, &b)| a * b).sum::<T>() / gg } else { T::zero() };
    *x.last_mut().unwrap() = xi;
    residual_norm(system, &x, kappa)
}
