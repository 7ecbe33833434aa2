//! Minimal complex CSR matrix used for the Hamiltonian pieces.
//!
//! Only the handful of operations the dynamics needs: assembly from
//! triplets, Kronecker products, linear combinations, adjoint and
//! matrix-vector products.

use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Complex64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![Complex64::new(1.0, 0.0); n],
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are
    /// summed and exact zeros dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, Complex64)>,
    ) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            debug_assert!(r < nrows && c < ncols);
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                rows.push(r);
                last = Some((r, c));
            }
        }
        let mut kept_idx = Vec::with_capacity(indices.len());
        let mut kept_val = Vec::with_capacity(values.len());
        for ((r, c), v) in rows.into_iter().zip(indices).zip(values) {
            if v != Complex64::new(0.0, 0.0) {
                indptr[r + 1] += 1;
                kept_idx.push(c);
                kept_val.push(v);
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        Self {
            nrows,
            ncols,
            indptr,
            indices: kept_idx,
            values: kept_val,
        }
    }

    pub fn from_dense(m: &DMatrix<Complex64>) -> Self {
        let mut t = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let v = m[(r, c)];
                if v != Complex64::new(0.0, 0.0) {
                    t.push((r, c, v));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), t)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.iter() {
            m[(r, c)] += v;
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.values[k]))
        })
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        (self.indptr[r]..self.indptr[r + 1])
            .find(|&k| self.indices[k] == c)
            .map(|k| self.values[k])
            .unwrap_or_default()
    }

    pub fn kron(&self, other: &CsrMatrix) -> CsrMatrix {
        let nrows = self.nrows * other.nrows;
        let ncols = self.ncols * other.ncols;
        let mut t = Vec::with_capacity(self.nnz() * other.nnz());
        for (r1, c1, v1) in self.iter() {
            for (r2, c2, v2) in other.iter() {
                t.push((r1 * other.nrows + r2, c1 * other.ncols + c2, v1 * v2));
            }
        }
        Self::from_triplets(nrows, ncols, t)
    }

    pub fn scaled(&self, s: Complex64) -> CsrMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out.prune();
        out
    }

    pub fn add(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let t = self.iter().chain(other.iter()).collect();
        Self::from_triplets(self.nrows, self.ncols, t)
    }

    /// Matrix product, used for operator algebra checks only.
    pub fn matmul(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.ncols, other.nrows);
        let mut t = Vec::new();
        for (r, k, a) in self.iter() {
            for j in other.indptr[k]..other.indptr[k + 1] {
                t.push((r, other.indices[j], a * other.values[j]));
            }
        }
        Self::from_triplets(self.nrows, other.ncols, t)
    }

    pub fn adjoint(&self) -> CsrMatrix {
        let t = self.iter().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.ncols, self.nrows, t)
    }

    /// `y += alpha * A x`.
    pub fn mul_add(&self, alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *yr += alpha * acc;
        }
    }

    /// Largest entry of `|A - A^dagger|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.adjoint();
        let diff = self.add(&adj.scaled(Complex64::new(-1.0, 0.0)));
        diff.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CsrMatrix) -> f64 {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
            .values
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    fn prune(&mut self) {
        if self.values.iter().all(|v| *v != Complex64::new(0.0, 0.0)) {
            return;
        }
        *self = Self::from_triplets(self.nrows, self.ncols, self.iter().collect());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let m = CsrMatrix::from_triplets(
            2,
            2,
            vec![
                (0, 1, c(1.0, 0.0)),
                (0, 1, c(-1.0, 0.0)),
                (1, 0, c(2.0, 1.0)),
            ],
        );
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(1, 0), c(2.0, 1.0));
    }

    #[test]
    fn kron_matches_dense() {
        let a =
            DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 2.0), c(0.0, 0.0), c(3.0, 0.0)]);
        let b =
            DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, -1.0), c(0.5, 0.0)]);
        let k = CsrMatrix::from_dense(&a)
            .kron(&CsrMatrix::from_dense(&b))
            .to_dense();
        let expected = a.kronecker(&b);
        assert!((k - expected).norm() < 1e-15);
    }

    #[test]
    fn mul_add_matches_dense() {
        let a = DMatrix::from_fn(3, 3, |r, c_| c(r as f64 - c_ as f64, (r * c_) as f64));
        let s = CsrMatrix::from_dense(&a);
        let x = vec![c(1.0, 0.5), c(-2.0, 0.0), c(0.0, 1.0)];
        let mut y = vec![c(0.0, 0.0); 3];
        s.mul_add(c(1.0, 0.0), &x, &mut y);
        let yd = &a * nalgebra::DVector::from_vec(x);
        for i in 0..3 {
            assert!((y[i] - yd[i]).norm() < 1e-14);
        }
    }
}
