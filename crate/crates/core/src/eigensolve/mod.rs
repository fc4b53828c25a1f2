//! Smallest eigenvalues of `K x = κ M x` with `M = diag(0, -C, 0)`.
//!
//! Eliminating σ and ξ leaves the operator `T f = u-part of K⁻¹ [0; -C f; 0]`
//! on displacements. It is self-adjoint and positive in the `C` inner product
//! with eigenvalues `θ = 1/κ`, so the wanted modes are its largest ones.

mod dense;

pub use dense::{dense_pencil_eigenvalues, DENSE_LIMIT};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assembly::{residual_norm, GlobalSystem};
use crate::error::{Error, Result};
use crate::sparse::{CooMatrix, LdlOptions, SaddleSolver};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverPath {
    /// Dense below the size threshold, Krylov above.
    Auto,
    Krylov,
    Dense,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Search subspace size; `None` means `max(40, 4 count)`.
    pub krylov_dim: Option<usize>,
    /// Relative tolerance on Ritz residuals.
    pub tol: f64,
    pub max_restarts: usize,
    /// Spectral shift `s`: the operator becomes `(K - s M)⁻¹ M`.
    pub shift: f64,
    pub path: SolverPath,
    /// Size at or below which `Auto` uses the dense solver.
    pub dense_threshold: usize,
    pub cluster_tol: f64,
    /// Ritz values with `|Im θ| > imag_tol |θ|` are discarded.
    pub imag_tol: f64,
    pub ldl: LdlOptions,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            krylov_dim: None,
            tol: 1e-10,
            max_restarts: 300,
            shift: 0.0,
            path: SolverPath::Auto,
            dense_threshold: DENSE_LIMIT,
            cluster_tol: 1e-3,
            imag_tol: 1e-8,
            ldl: LdlOptions::default(),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub kappas: Vec<f64>,
    /// `ω = √κ`, ascending.
    pub frequencies: Vec<f64>,
    /// Full vectors `(ρ, u, ξ)`, unit 2-norm.
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    /// `‖K x - κ M x‖ / ‖x‖` per pair.
    pub residuals: Vec<f64>,
    pub clusters: Vec<Vec<usize>>,
    pub path: SolverPath,
    pub restarts: usize,
    pub operator_applications: usize,
}

/// Groups adjacent frequencies whose relative gap is at most `tol`.
pub fn cluster_multiplicities(frequencies: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, &w) in frequencies.iter().enumerate() {
        match clusters.last_mut() {
            Some(last) if tol > 0.0 && (w - frequencies[*last.last().unwrap()]).abs() <= tol * w.abs() => last.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    clusters
}

struct Operator<'a> {
    solver: SaddleSolver<f64>,
    system: &'a GlobalSystem<f64>,
    applications: usize,
}

impl<'a> Operator<'a> {
    fn new(system: &'a GlobalSystem<f64>, shift: f64, ldl: LdlOptions) -> Result<Self> {
        let k = if shift == 0.0 {
            system.k.clone()
        } else {
            let k = &system.k;
            let mut coo = CooMatrix::with_capacity(k.nrows, k.ncols, k.nnz() + system.c_diag.len());
            for j in 0..k.ncols {
                for q in k.colptr[j]..k.colptr[j + 1] {
                    coo.push(k.rowidx[q], j, k.values[q]);
                }
            }
            let n_sigma = system.dof_map.n_sigma;
            for (i, &c) in system.c_diag.iter().enumerate() {
                coo.push(n_sigma + i, n_sigma + i, shift * c);
            }
            coo.to_csc()
        };
        let solver = SaddleSolver::new(k, &system.dof_map.block_signs(), Some(&system.ordering), ldl)?;
        Ok(Self { solver, system, applications: 0 })
    }

    /// Full solution of `(K - sM) x = [0; -C f; 0]`.
    fn solve_full(&mut self, f: &[f64]) -> Vec<f64> {
        let map = &self.system.dof_map;
        let mut b = vec![0.0; map.dim()];
        for (i, (&fi, &ci)) in f.iter().zip(&self.system.c_diag).enumerate() {
            b[map.n_sigma + i] = -ci * fi;
        }
        self.applications += 1;
        self.solver.solve(&b).0
    }

    fn apply(&mut self, f: &[f64]) -> Vec<f64> {
        let n_sigma = self.system.dof_map.n_sigma;
        let n_u = self.system.dof_map.n_u;
        self.solve_full(f)[n_sigma..n_sigma + n_u].to_vec()
    }
}

fn c_dot(c: &[f64], a: &[f64], b: &[f64]) -> f64 {
    c.iter().zip(a).zip(b).map(|((&c, &a), &b)| c * a * b).sum()
}

/// Orthogonalises `w` against `basis` in the `C` inner product (two passes)
/// and returns its remaining norm.
fn orthogonalize(c: &[f64], basis: &[Vec<f64>], w: &mut [f64]) -> f64 {
    for _ in 0..2 {
        for v in basis {
            let h = c_dot(c, v, w);
            for (wi, &vi) in w.iter_mut().zip(v) {
                *wi -= h * vi;
            }
        }
    }
    c_dot(c, w, w).sqrt()
}

fn combine(vectors: &[Vec<f64>], coeffs: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out = vec![0.0; vectors[0].len()];
    for (v, s) in vectors.iter().zip(coeffs) {
        if s != 0.0 {
            for (o, &vi) in out.iter_mut().zip(v) {
                *o += s * vi;
            }
        }
    }
    out
}

/// Returns the `count` smallest positive eigenvalues with eigenvectors.
pub fn solve_smallest(system: &GlobalSystem<f64>, count: usize, options: &EigenOptions) -> Result<SpectralResult> {
    if count == 0 {
        return Err(Error::InvalidArgument("eigenpair count must be at least 1".into()));
    }
    let n_u = system.dof_map.n_u;
    if count > n_u {
        return Err(Error::InvalidArgument(format!("requested {count} eigenpairs but only {n_u} displacement unknowns")));
    }
    // without stabilisation a cell with n > 3 edges leaves 2n - 6 unknowns
    // seen by neither Π nor the divergence, so K is singular
    if system.gamma == 0.0 {
        if let Some(c) = system.dof_map.cell_edges.iter().position(|e| e.len() > 3) {
            return Err(Error::Factorization(format!(
                "K is singular: stabilisation constant 0 on cell {c} with {} edges",
                system.dof_map.cell_edges[c].len()
            )));
        }
    }
    let use_dense = match options.path {
        SolverPath::Dense => true,
        SolverPath::Krylov => false,
        SolverPath::Auto => system.dim() <= options.dense_threshold,
    };
    let (pairs, restarts, applications, path) = if use_dense {
        (dense::smallest_pairs(system, count, options.imag_tol)?, 0, 0, SolverPath::Dense)
    } else {
        let (p, r, a) = krylov(system, count, options)?;
        (p, r, a, SolverPath::Krylov)
    };
    let mut kappas = Vec::with_capacity(count);
    let mut eigenvectors = Vec::with_capacity(count);
    let mut residuals = Vec::with_capacity(count);
    for (kappa, x) in pairs {
        residuals.push(residual_norm(system, &x, kappa)?);
        kappas.push(kappa);
        eigenvectors.push(x);
    }
    let frequencies: Vec<f64> = kappas.iter().map(|k| k.sqrt()).collect();
    let clusters = cluster_multiplicities(&frequencies, options.cluster_tol);
    Ok(SpectralResult {
        kappas,
        frequencies,
        eigenvectors,
        residuals,
        clusters,
        path,
        restarts,
        operator_applications: applications,
    })
}

type Pairs = Vec<(f64, Vec<f64>)>;

fn krylov(system: &GlobalSystem<f64>, count: usize, options: &EigenOptions) -> Result<(Pairs, usize, usize)> {
    let c = &system.c_diag;
    let n = c.len();
    let mut op = Operator::new(system, options.shift, options.ldl)?;
    let m = options.krylov_dim.unwrap_or((4 * count).max(40)).min(n).max(count + 1).min(n);
    let keep = (count + (m - count) / 2).min(m - 1).max(count);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);

    let mut start: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nrm = c_dot(c, &start, &start).sqrt();
    start.iter_mut().for_each(|v| *v /= nrm);
    let mut basis: Vec<Vec<f64>> = vec![start];
    let mut images: Vec<Vec<f64>> = vec![op.apply(&basis[0])];
    let mut last_residuals = Vec::new();

    for restart in 0..=options.max_restarts {
        while basis.len() < m {
            let mut w = images.last().unwrap().clone();
            let mut norm = orthogonalize(c, &basis, &mut w);
            let scale = c_dot(c, images.last().unwrap(), images.last().unwrap()).sqrt();
            if !(norm > 1e-12 * scale) {
                // invariant subspace: continue with a fresh random direction
                w = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                norm = orthogonalize(c, &basis, &mut w);
                if !(norm > 0.0) {
                    break;
                }
            }
            w.iter_mut().for_each(|v| *v /= norm);
            let tw = op.apply(&w);
            basis.push(w);
            images.push(tw);
        }
        let k = basis.len();
        let h = DMatrix::from_fn(k, k, |i, j| c_dot(c, &basis[i], &images[j]));
        let hs = (&h + h.transpose()) * 0.5;
        let eig = SymmetricEigen::new(hs);
        let complex = h.complex_eigenvalues();
        let mut idx: Vec<usize> = (0..k).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        // drop Ritz values whose nonsymmetric counterpart is not real
        let is_real = |theta: f64| {
            complex
                .iter()
                .min_by(|a, b| ((a.re - theta).hypot(a.im)).total_cmp(&(b.re - theta).hypot(b.im)))
                .is_none_or(|z| z.im.abs() <= options.imag_tol * theta.abs().max(f64::MIN_POSITIVE))
        };
        let wanted: Vec<usize> = idx.iter().copied().filter(|&i| eig.eigenvalues[i] > 0.0 && is_real(eig.eigenvalues[i])).collect();
        let mut residuals = Vec::with_capacity(count);
        let mut converged = wanted.len() >= count;
        for &i in wanted.iter().take(count) {
            let theta = eig.eigenvalues[i];
            let s = eig.eigenvectors.column(i);
            let y = combine(&basis, s.iter().copied());
            let ty = combine(&images, s.iter().copied());
            let r: Vec<f64> = ty.iter().zip(&y).map(|(a, b)| a - theta * b).collect();
            let res = c_dot(c, &r, &r).sqrt() / theta.abs();
            residuals.push(res);
            if res > options.tol {
                converged = false;
            }
        }
        last_residuals = residuals;
        if converged || k >= n {
            let pairs = wanted
                .iter()
                .take(count)
                .map(|&i| {
                    let theta = eig.eigenvalues[i];
                    let kappa = options.shift + 1.0 / theta;
                    let y = combine(&basis, eig.eigenvectors.column(i).iter().copied());
                    let mut x = op.solve_full(&y);
                    let scale = 1.0 / theta;
                    x.iter_mut().for_each(|v| *v *= scale);
                    let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    x.iter_mut().for_each(|v| *v /= nx);
                    (kappa, x)
                })
                .collect::<Vec<_>>();
            if pairs.len() < count {
                return Err(Error::NotConverged { restarts: restart, residuals: last_residuals });
            }
            let mut pairs = pairs;
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            return Ok((pairs, restart, op.applications));
        }
        if restart == options.max_restarts {
            break;
        }
        // thick restart: keep the leading Ritz vectors plus the next Krylov direction
        let mut next = images.last().unwrap().clone();
        let nn = orthogonalize(c, &basis, &mut next);
        let kept: Vec<usize> = idx.iter().copied().take(keep).collect();
        let new_basis: Vec<Vec<f64>> =
            kept.iter().map(|&i| combine(&basis, eig.eigenvectors.column(i).iter().copied())).collect();
        let new_images: Vec<Vec<f64>> =
            kept.iter().map(|&i| combine(&images, eig.eigenvectors.column(i).iter().copied())).collect();
        basis = new_basis;
        images = new_images;
        if nn > 1e-14 {
            next.iter_mut().for_each(|v| *v /= nn);
            let norm = orthogonalize(c, &basis, &mut next);
            next.iter_mut().for_each(|v| *v /= norm);
            let tn = op.apply(&next);
            basis.push(next);
            images.push(tn);
        }
    }
    Err(Error::NotConverged { restarts: options.max_restarts, residuals: last_residuals })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clustering() {
        assert_eq!(cluster_multiplicities(&[1.0, 2.0, 3.0], 1e-3), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(cluster_multiplicities(&[4.0, 5.352, 5.3520001, 6.3], 1e-4), vec![vec![0], vec![1, 2], vec![3]]);
        assert_eq!(cluster_multiplicities(&[1.0, 1.0], 0.0), vec![vec![0], vec![1]]);
    }
}
