use serde::{Deserialize, Serialize};

use super::CscMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

const NONE: usize = usize::MAX;

/// Up-looking sparse LDLᵀ of a symmetric matrix under a fixed permutation.
#[derive(Clone, Debug)]
pub struct LdlFactor<T> {
    n: usize,
    perm: Vec<usize>,
    iperm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<u32>,
    lx: Vec<T>,
    d: Vec<T>,
}

impl<T: Real> LdlFactor<T> {
    /// Factors `P (A + diag(shift)) Pᵀ`, where `perm[k]` is the original
    /// index eliminated k-th. Only the stored symmetric pattern of `a` is
    /// read; both triangles must be present.
    pub fn factor(a: &CscMatrix<T>, shift: &[T], perm: Option<&[usize]>) -> Result<Self> {
        let n = a.ncols;
        if a.nrows != n || shift.len() != n {
            return Err(Error::InvalidArgument("LDL needs a square matrix and matching shift".into()));
        }
        let perm: Vec<usize> = perm.map(|p| p.to_vec()).unwrap_or_else(|| (0..n).collect());
        let mut iperm = vec![NONE; n];
        for (k, &p) in perm.iter().enumerate() {
            if p >= n || iperm[p] != NONE {
                return Err(Error::InvalidArgument("ordering is not a permutation".into()));
            }
            iperm[p] = k;
        }
        // upper triangle of the permuted matrix, by columns
        let mut count = vec![0usize; n + 1];
        for j in 0..n {
            let pj = iperm[j];
            for p in a.colptr[j]..a.colptr[j + 1] {
                let pi = iperm[a.rowidx[p]];
                if pi < pj {
                    count[pj + 1] += 1;
                }
            }
            count[pj + 1] += 1; // diagonal
        }
        for k in 0..n {
            count[k + 1] += count[k];
        }
        let mut next = count.clone();
        let mut ci = vec![0usize; count[n]];
        let mut cx = vec![T::zero(); count[n]];
        for k in 0..n {
            ci[next[k]] = k;
            cx[next[k]] = shift[perm[k]];
            next[k] += 1;
        }
        for j in 0..n {
            let pj = iperm[j];
            for p in a.colptr[j]..a.colptr[j + 1] {
                let pi = iperm[a.rowidx[p]];
                if pi < pj {
                    ci[next[pj]] = pi;
                    cx[next[pj]] = a.values[p];
                    next[pj] += 1;
                } else if pi == pj {
                    cx[count[pj]] += a.values[p];
                }
            }
        }

        // symbolic: elimination tree and column counts
        let mut parent = vec![NONE; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            for p in count[k]..count[k + 1] {
                let mut i = ci[p];
                while i < k && flag[i] != k {
                    if parent[i] == NONE {
                        parent[i] = k;
                    }
                    lnz[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for k in 0..n {
            lp[k + 1] = lp[k] + lnz[k];
        }
        if lp[n] > u32::MAX as usize || n > u32::MAX as usize {
            return Err(Error::Factorization("factor too large".into()));
        }

        // numeric
        let mut li = vec![0u32; lp[n]];
        let mut lx = vec![T::zero(); lp[n]];
        let mut d = vec![T::zero(); n];
        let mut y = vec![T::zero(); n];
        let mut pattern = vec![0usize; n];
        lnz.iter_mut().for_each(|v| *v = 0);
        flag.iter_mut().for_each(|v| *v = NONE);
        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            for p in count[k]..count[k + 1] {
                let mut i = ci[p];
                y[i] += cx[p];
                let mut len = 0;
                while i < k && flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = parent[i];
                }
                while len > 0 {
                    top -= 1;
                    len -= 1;
                    pattern[top] = pattern[len];
                }
            }
            d[k] = y[k];
            y[k] = T::zero();
            for &i in &pattern[top..n] {
                let yi = y[i];
                y[i] = T::zero();
                let end = lp[i] + lnz[i];
                for p in lp[i]..end {
                    y[li[p] as usize] -= lx[p] * yi;
                }
                let l_ki = yi / d[i];
                d[k] -= l_ki * yi;
                li[end] = k as u32;
                lx[end] = l_ki;
                lnz[i] += 1;
            }
            if d[k] == T::zero() || !d[k].is_finite() {
                return Err(Error::Factorization(format!("zero or non-finite pivot at step {k} (original index {})", perm[k])));
            }
        }
        Ok(Self { n, perm, iperm, lp, li, lx, d })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz_l(&self) -> usize {
        self.lp[self.n]
    }

    /// Numbers of positive and negative pivots.
    pub fn inertia(&self) -> (usize, usize) {
        let pos = self.d.iter().filter(|&&v| v > T::zero()).count();
        (pos, self.n - pos)
    }

    /// Overwrites `b` with the solution of the factored system.
    pub fn solve_in_place(&self, b: &mut [T]) {
        assert_eq!(b.len(), self.n);
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for j in 0..self.n {
            let xj = x[j];
            if xj != T::zero() {
                for p in self.lp[j]..self.lp[j + 1] {
                    x[self.li[p] as usize] -= self.lx[p] * xj;
                }
            }
        }
        for (v, &dj) in x.iter_mut().zip(&self.d) {
            *v /= dj;
        }
        for j in (0..self.n).rev() {
            let mut s = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                s -= self.lx[p] * x[self.li[p] as usize];
            }
            x[j] = s;
        }
        for (k, &xk) in x.iter().enumerate() {
            b[self.perm[k]] = xk;
        }
    }

    pub fn inverse_permutation(&self) -> &[usize] {
        &self.iperm
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdlOptions {
    /// Diagonal regularisation relative to the largest matrix entry.
    pub regularization: f64,
    pub max_refinement: usize,
    /// Stop refining when `‖b - Ax‖ ≤ tol (‖A‖ ‖x‖ + ‖b‖)` (max norms).
    pub refinement_tol: f64,
}

impl Default for LdlOptions {
    fn default() -> Self {
        Self { regularization: 1e-10, max_refinement: 30, refinement_tol: 1e-15 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub refinement_steps: usize,
    pub relative_residual: f64,
}

/// Solver for a symmetric indefinite system with known block signs.
///
/// The factorisation is of the quasi-definite matrix `A + ε diag(signs)`;
/// iterative refinement against `A` removes the perturbation.
#[derive(Clone, Debug)]
pub struct SaddleSolver<T> {
    matrix: CscMatrix<T>,
    factor: LdlFactor<T>,
    options: LdlOptions,
    norm: T,
}

impl<T: Real> SaddleSolver<T> {
    pub fn new(matrix: CscMatrix<T>, signs: &[i8], perm: Option<&[usize]>, options: LdlOptions) -> Result<Self> {
        let norm = matrix.max_abs();
        let eps = norm * T::lit(options.regularization);
        let shift: Vec<T> = signs.iter().map(|&s| if s >= 0 { eps } else { -eps }).collect();
        let factor = LdlFactor::factor(&matrix, &shift, perm)?;
        Ok(Self { matrix, factor, options, norm })
    }

    pub fn matrix(&self) -> &CscMatrix<T> {
        &self.matrix
    }

    pub fn factor(&self) -> &LdlFactor<T> {
        &self.factor
    }

    pub fn solve(&self, b: &[T]) -> (Vec<T>, SolveStats) {
        let mut x = b.to_vec();
        self.factor.solve_in_place(&mut x);
        let bnorm = b.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let mut r = vec![T::zero(); b.len()];
        let mut stats = SolveStats::default();
        let mut best = T::infinity();
        for step in 0..=self.options.max_refinement {
            self.matrix.matvec_into(&x, &mut r);
            for (ri, &bi) in r.iter_mut().zip(b) {
                *ri = bi - *ri;
            }
            let rnorm = r.iter().fold(T::zero(), |m, v| m.max(v.abs()));
            let xnorm = x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
            let scale = self.norm * xnorm + bnorm;
            let rel = if scale > T::zero() { rnorm / scale } else { T::zero() };
            stats.refinement_steps = step;
            stats.relative_residual = rel.to_f64_lossy();
            if rel <= T::lit(self.options.refinement_tol).max(T::epsilon()) || step == self.options.max_refinement {
                break;
            }
            // stagnation: stop once the residual no longer halves
            if rnorm > best * T::lit(0.5) && step > 2 {
                break;
            }
            best = best.min(rnorm);
            self.factor.solve_in_place(&mut r);
            for (xi, &ri) in x.iter_mut().zip(&r) {
                *xi += ri;
            }
        }
        (x, stats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::CooMatrix;

    fn saddle() -> CscMatrix<f64> {
        // [[2, 1, 1], [1, 3, 0], [1, 0, 0]]
        let mut c = CooMatrix::new(3, 3);
        for (i, j, v) in [(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0), (0, 2, 1.0), (2, 0, 1.0)] {
            c.push(i, j, v);
        }
        c.to_csc()
    }

    #[test]
    fn solves_indefinite_system() {
        let a = saddle();
        let s = SaddleSolver::new(a.clone(), &[1, 1, -1], Some(&[2, 1, 0]), LdlOptions::default()).unwrap();
        let b = [1.0, 2.0, 3.0];
        let (x, stats) = s.solve(&b);
        let r = a.matvec(&x);
        for i in 0..3 {
            assert!((r[i] - b[i]).abs() < 1e-14, "{stats:?}");
        }
        assert_eq!(s.factor().inertia(), (2, 1));
    }

    #[test]
    fn zero_pivot_without_regularisation() {
        let a = saddle();
        // eliminating index 2 first hits its zero diagonal
        assert!(LdlFactor::factor(&a, &[0.0; 3], Some(&[2, 0, 1])).is_err());
    }
}
