//! Compressed-sparse-row complex matrices.
//!
//! Hamiltonians and collapse operators on truncated Fock spaces have a few
//! nonzeros per row, so every operator in the crate is stored this way and
//! densified only for small spectral computations.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    pub(crate) n: usize,
    pub(crate) indptr: Vec<usize>,
    pub(crate) indices: Vec<usize>,
    pub(crate) data: Vec<C64>,
}

impl SparseMatrix {
    /// Builds an `n x n` matrix from `(row, col, value)` triplets. Duplicate
    /// entries are summed and exact zeros dropped.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            assert!(i < n && j < n, "triplet ({i}, {j}) outside a {n}x{n} matrix");
            if last == Some((i, j)) {
                *data.last_mut().unwrap() += v;
                continue;
            }
            last = Some((i, j));
            indptr[i + 1] += 1;
            indices.push(j);
            data.push(v);
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }
        let mut m = SparseMatrix { n, indptr, indices, data };
        m.prune(0.0);
        m
    }

    pub fn zeros(n: usize) -> Self {
        SparseMatrix { n, indptr: vec![0; n + 1], indices: Vec::new(), data: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![C64::new(1.0, 0.0); n],
        }
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let n = values.len();
        Self::from_triplets(n, values.iter().enumerate().map(|(i, &v)| (i, i, v)).collect())
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "operators are square");
        let n = m.nrows();
        let mut triplets = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = m[(i, j)];
                if v != C64::new(0.0, 0.0) {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, triplets)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.iter() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    /// Entries `(col, value)` of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()].iter().copied().zip(self.data[span].iter().copied())
    }

    /// All stored entries as `(row, col, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.row(i).find(|&(c, _)| c == j).map(|(_, v)| v).unwrap_or_default()
    }

    /// Drops entries whose magnitude is at or below `threshold`.
    pub fn prune(&mut self, threshold: f64) {
        let mut indptr = vec![0usize; self.n + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut data = Vec::with_capacity(self.data.len());
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                if v.norm() > threshold {
                    indices.push(j);
                    data.push(v);
                }
            }
            indptr[i + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.data = data;
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.n, self.iter().map(|(i, j, v)| (j, i, v.conj())).collect())
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= c);
        out.prune(0.0);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch in sparse addition");
        Self::from_triplets(self.n, self.iter().chain(other.iter()).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch in sparse product");
        let mut triplets = Vec::new();
        for i in 0..self.n {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    triplets.push((i, j, a * b));
                }
            }
        }
        Self::from_triplets(self.n, triplets)
    }

    /// Kronecker product `self (x) other`, with `self` as the slow index.
    pub fn kron(&self, other: &Self) -> Self {
        let m = other.n;
        let mut triplets = Vec::with_capacity(self.nnz() * other.nnz());
        for (i, j, a) in self.iter() {
            for (k, l, b) in other.iter() {
                triplets.push((i * m + k, j * m + l, a * b));
            }
        }
        Self::from_triplets(self.n * m, triplets)
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `||A - A^dag||_F / ||A||_F`, zero for the zero matrix.
    pub fn hermiticity_error(&self) -> f64 {
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        self.sub(&self.adjoint()).frobenius_norm() / norm
    }

    /// `y = A x` for a dense vector.
    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.n);
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// `Tr[A rho]` for a dense row-major `rho`.
    pub fn trace_with(&self, rho: &DMatrix<C64>) -> C64 {
        self.iter().map(|(i, j, v)| v * rho[(j, i)]).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn duplicates_are_summed_and_zeros_dropped() {
        let m = SparseMatrix::from_triplets(
            2,
            vec![(0, 1, c(1.0)), (0, 1, c(2.0)), (1, 0, c(1.0)), (1, 0, c(-1.0))],
        );
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), c(3.0));
    }

    #[test]
    fn kron_matches_dense() {
        let a = SparseMatrix::from_triplets(2, vec![(0, 1, c(1.0)), (1, 1, C64::new(0.0, 2.0))]);
        let b = SparseMatrix::from_triplets(3, vec![(0, 0, c(1.0)), (2, 1, c(-3.0))]);
        let k = a.kron(&b).to_dense();
        let (ad, bd) = (a.to_dense(), b.to_dense());
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(k[(i, j)], ad[(i / 3, j / 3)] * bd[(i % 3, j % 3)]);
            }
        }
    }

    #[test]
    fn product_matches_dense() {
        let a = SparseMatrix::from_triplets(3, vec![(0, 1, c(1.0)), (1, 2, c(2.0)), (2, 0, C64::new(0.0, 1.0))]);
        let b = a.adjoint();
        let diff = a.mul(&b).to_dense() - a.to_dense() * b.to_dense();
        assert!(diff.norm() < 1e-15);
    }
}
