//! Compressed sparse matrices, a fill-reducing ordering and a symmetric
//! LDLᵀ factorisation for quasi-definite saddle-point systems.

mod ldl;
mod ordering;

pub use ldl::{LdlFactor, LdlOptions, SaddleSolver, SolveStats};
pub use ordering::geometric_nested_dissection;

use std::fmt::Write as _;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;
use crate::scalar::Real;

/// Triplet form; duplicates are summed on conversion.
#[derive(Clone, Debug, Default)]
pub struct CooMatrix<T> {
    pub nrows: usize,
    pub ncols: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<T>,
}

impl<T: Real> CooMatrix<T> {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, rows: Vec::new(), cols: Vec::new(), vals: Vec::new() }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self { nrows, ncols, rows: Vec::with_capacity(cap), cols: Vec::with_capacity(cap), vals: Vec::with_capacity(cap) }
    }

    #[inline]
    pub fn push(&mut self, i: usize, j: usize, v: T) {
        debug_assert!(i < self.nrows && j < self.ncols);
        self.rows.push(i);
        self.cols.push(j);
        self.vals.push(v);
    }

    pub fn to_csc(&self) -> CscMatrix<T> {
        let mut count = vec![0usize; self.ncols + 1];
        for &j in &self.cols {
            count[j + 1] += 1;
        }
        for j in 0..self.ncols {
            count[j + 1] += count[j];
        }
        let mut next = count.clone();
        let mut ri = vec![0usize; self.vals.len()];
        let mut rv = vec![T::zero(); self.vals.len()];
        for k in 0..self.vals.len() {
            let j = self.cols[k];
            ri[next[j]] = self.rows[k];
            rv[next[j]] = self.vals[k];
            next[j] += 1;
        }
        // sort each column and merge duplicates
        let mut colptr = Vec::with_capacity(self.ncols + 1);
        let mut rowidx = Vec::with_capacity(ri.len());
        let mut values = Vec::with_capacity(ri.len());
        colptr.push(0);
        let mut buf: Vec<(usize, T)> = Vec::new();
        for j in 0..self.ncols {
            buf.clear();
            buf.extend((count[j]..count[j + 1]).map(|p| (ri[p], rv[p])));
            buf.sort_unstable_by_key(|e| e.0);
            let mut k = 0;
            while k < buf.len() {
                let (r, mut v) = buf[k];
                k += 1;
                while k < buf.len() && buf[k].0 == r {
                    v += buf[k].1;
                    k += 1;
                }
                rowidx.push(r);
                values.push(v);
            }
            colptr.push(rowidx.len());
        }
        CscMatrix { nrows: self.nrows, ncols: self.ncols, colptr, rowidx, values }
    }
}

/// Compressed sparse column matrix with sorted row indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CscMatrix<T> {
    pub nrows: usize,
    pub ncols: usize,
    pub colptr: Vec<usize>,
    pub rowidx: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Real> CscMatrix<T> {
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let rows = &self.rowidx[self.colptr[j]..self.colptr[j + 1]];
        match rows.binary_search(&i) {
            Ok(p) => self.values[self.colptr[j] + p],
            Err(_) => T::zero(),
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    /// `y = A x`.
    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        y.iter_mut().for_each(|v| *v = T::zero());
        for j in 0..self.ncols {
            let xj = x[j];
            if xj == T::zero() {
                continue;
            }
            for p in self.colptr[j]..self.colptr[j + 1] {
                y[self.rowidx[p]] += self.values[p] * xj;
            }
        }
    }

    pub fn transpose(&self) -> Self {
        let mut coo = CooMatrix::with_capacity(self.ncols, self.nrows, self.nnz());
        for j in 0..self.ncols {
            for p in self.colptr[j]..self.colptr[j + 1] {
                coo.push(j, self.rowidx[p], self.values[p]);
            }
        }
        coo.to_csc()
    }

    /// Largest `|a_ij - a_ji|` over stored entries.
    pub fn symmetry_defect(&self) -> T {
        let mut d = T::zero();
        for j in 0..self.ncols {
            for p in self.colptr[j]..self.colptr[j + 1] {
                let i = self.rowidx[p];
                d = d.max((self.values[p] - self.get(j, i)).abs());
            }
        }
        d
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn to_dense_f64(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for j in 0..self.ncols {
            for p in self.colptr[j]..self.colptr[j + 1] {
                d[self.rowidx[p]][j] = self.values[p].to_f64_lossy();
            }
        }
        d
    }

    /// Coordinate-format text with 1-based indices.
    pub fn to_matrix_market(&self) -> String {
        let mut s = String::with_capacity(40 * self.nnz() + 64);
        s.push_str("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(s, "{} {} {}", self.nrows, self.ncols, self.nnz());
        for j in 0..self.ncols {
            for p in self.colptr[j]..self.colptr[j + 1] {
                let _ = writeln!(s, "{} {} {:.17e}", self.rowidx[p] + 1, j + 1, self.values[p].to_f64_lossy());
            }
        }
        s
    }

    pub fn write_matrix_market(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for j in 0..self.ncols {
            for p in self.colptr[j]..self.colptr[j + 1] {
                writeln!(w, "{} {} {:.17e}", self.rowidx[p] + 1, j + 1, self.values[p].to_f64_lossy())?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let mut c = CooMatrix::new(3, 3);
        c.push(0, 0, 1.0);
        c.push(2, 1, 2.0);
        c.push(0, 0, 3.0);
        c.push(1, 2, 2.0);
        let m = c.to_csc();
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(0, 0), 4.0);
        assert_eq!(m.symmetry_defect(), 0.0);
        assert_eq!(m.matvec(&[1.0, 1.0, 1.0]), vec![4.0, 2.0, 2.0]);
        assert_eq!(m.transpose().get(1, 2), 2.0);
    }

    #[test]
    fn matrix_market_is_one_based() {
        let mut c = CooMatrix::new(2, 2);
        c.push(1, 0, 0.5);
        let text = c.to_csc().to_matrix_market();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "2 2 1");
        assert!(lines[2].starts_with("2 1 5.0"));
    }
}
