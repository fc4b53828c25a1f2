use nalgebra::{DMatrix, SymmetricEigen};

use crate::assembly::GlobalSystem;
use crate::error::{Error, Result};

/// Largest pencil handled by the dense paths.
pub const DENSE_LIMIT: usize = 600;

fn dense_k(system: &GlobalSystem<f64>) -> DMatrix<f64> {
    let k = &system.k;
    let mut d = DMatrix::zeros(k.nrows, k.ncols);
    for j in 0..k.ncols {
        for p in k.colptr[j]..k.colptr[j + 1] {
            d[(k.rowidx[p], j)] = k.values[p];
        }
    }
    d
}

/// All finite real positive eigenvalues κ of the full pencil, ascending,
/// from the spectrum of `K⁻¹ M` via a dense Schur decomposition.
pub fn dense_pencil_eigenvalues(system: &GlobalSystem<f64>, imag_tol: f64) -> Result<Vec<f64>> {
    let n = system.dim();
    if n > 4 * DENSE_LIMIT {
        return Err(Error::InvalidArgument(format!("dense pencil of size {n} is too large")));
    }
    let lu = dense_k(system).lu();
    let mut m = DMatrix::zeros(n, n);
    let mk = &system.m;
    for j in 0..mk.ncols {
        for p in mk.colptr[j]..mk.colptr[j + 1] {
            m[(mk.rowidx[p], j)] = mk.values[p];
        }
    }
    let t = lu.solve(&m).ok_or_else(|| Error::Factorization("K is singular".into()))?;
    let theta = t.complex_eigenvalues();
    let scale = theta.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut kappas: Vec<f64> = theta
        .iter()
        .filter(|z| z.re > 1e-12 * scale && z.im.abs() <= imag_tol * z.re)
        .map(|z| 1.0 / z.re)
        .collect();
    kappas.sort_by(f64::total_cmp);
    Ok(kappas)
}

/// Smallest eigenpairs through the symmetric form `C^½ T C^{-½}` of the
/// displacement operator.
pub(super) fn smallest_pairs(system: &GlobalSystem<f64>, count: usize, _imag_tol: f64) -> Result<Vec<(f64, Vec<f64>)>> {
    let map = &system.dof_map;
    let n = map.dim();
    let n_u = map.n_u;
    let lu = dense_k(system).lu();
    // columns: K⁻¹ [0; e_i; 0]
    let mut rhs = DMatrix::zeros(n, n_u);
    for i in 0..n_u {
        rhs[(map.n_sigma + i, i)] = 1.0;
    }
    let kinv = lu.solve(&rhs).ok_or_else(|| Error::Factorization("K is singular".into()))?;
    let sq: Vec<f64> = system.c_diag.iter().map(|c| c.sqrt()).collect();
    // S = -C^½ (K⁻¹)_uu C^½
    let s = DMatrix::from_fn(n_u, n_u, |i, j| -sq[i] * kinv[(map.n_sigma + i, j)] * sq[j]);
    let s = (&s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::new(s);
    let mut idx: Vec<usize> = (0..n_u).filter(|&i| eig.eigenvalues[i] > 0.0).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    if idx.len() < count {
        return Err(Error::NotConverged { restarts: 0, residuals: vec![] });
    }
    let mut pairs = Vec::with_capacity(count);
    for &i in idx.iter().take(count) {
        let theta = eig.eigenvalues[i];
        let z = eig.eigenvectors.column(i);
        // u = C^{-½} z; x = κ K⁻¹ [0; -C u; 0] = -κ K⁻¹ [0; C^½ z; 0]
        let coeff: Vec<f64> = (0..n_u).map(|j| -sq[j] * z[j] / theta).collect();
        let mut x = vec![0.0; n];
        for (j, &cj) in coeff.iter().enumerate() {
            for r in 0..n {
                x[r] += kinv[(r, j)] * cj;
            }
        }
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= nx);
        pairs.push((1.0 / theta, x));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs)
}
