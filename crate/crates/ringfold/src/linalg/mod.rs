//! Sparse symmetric matrices and the factorizations/eigeniterations the
//! solver needs: banded LU with partial pivoting (Newton steps), banded
//! LDL^T (definiteness certification and shift-invert), and Lanczos with
//! full reorthogonalization (extreme and smallest eigenpairs).
//!
//! The matrices here are at most a few thousand rows; everything is written
//! for that desk scale, not for distributed or GPU use.

mod banded;
mod lanczos;

pub use banded::{BandedLdlt, BandedLu};
pub use lanczos::{lanczos, seed_vector, tridiag_eigen, LanczosRun, SymOp};

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("singular banded factorization: smallest pivot magnitude {smallest_pivot:.3e}")]
    SingularFactor { smallest_pivot: f64 },
    #[error("matrix not positive definite: pivot {index} is {value:.3e}")]
    NotPositiveDefinite { index: usize, value: f64 },
    #[error("eigeniteration stalled: attained residual {residual:.3e}, required {required:.3e}")]
    EigenNoConvergence { residual: f64, required: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Sparsity pattern shared between repeated assemblies of the same operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl SparsityPattern {
    /// Builds a pattern from (row, col) pairs; duplicates are merged.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, j) in pairs {
            assert!(i < n && j < n, "pattern index out of range");
            rows[i].push(j);
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
            col_idx.extend_from_slice(row);
            row_ptr.push(col_idx.len());
        }
        Self { n, row_ptr, col_idx }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Storage offset of entry (i, j), if present.
    #[inline]
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi].binary_search(&j).ok().map(|k| lo + k)
    }

    /// Maximum of |i - j| over stored entries.
    pub fn half_bandwidth(&self) -> usize {
        let mut bw = 0;
        for i in 0..self.n {
            for &j in &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]] {
                bw = bw.max(i.abs_diff(j));
            }
        }
        bw
    }
}

/// Symmetric sparse matrix in CSR form. Both triangles are stored, which
/// keeps the matrix-vector product a plain row sweep.
#[derive(Debug, Clone)]
pub struct SymCsr<T> {
    pattern: Arc<SparsityPattern>,
    vals: Vec<T>,
}

impl<T: Real> SymCsr<T> {
    pub fn zeroed(pattern: Arc<SparsityPattern>) -> Self {
        let nnz = pattern.nnz();
        Self { pattern, vals: vec![T::zero(); nnz] }
    }

    /// Builds from triplets, summing duplicates. Intended for tests and small
    /// problems; assembly uses a shared pattern plus `add_at` instead.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, T)]) -> Self {
        let pattern = Arc::new(SparsityPattern::from_pairs(
            n,
            triplets.iter().map(|&(i, j, _)| (i, j)),
        ));
        let mut m = Self::zeroed(pattern);
        for &(i, j, v) in triplets {
            let p = m.pattern.position(i, j).expect("triplet in own pattern");
            m.vals[p] += v;
        }
        m
    }

    pub fn n(&self) -> usize {
        self.pattern.n
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn reset(&mut self) {
        self.vals.fill(T::zero());
    }

    #[inline]
    pub fn add_at(&mut self, pos: usize, v: T) {
        self.vals[pos] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.pattern.position(i, j).map_or(T::zero(), |p| self.vals[p])
    }

    /// y = A x
    pub fn matvec(&self, x: &DVector<T>, y: &mut DVector<T>) {
        let n = self.pattern.n;
        assert_eq!(x.len(), n);
        assert_eq!(y.len(), n);
        for i in 0..n {
            let mut acc = T::zero();
            let lo = self.pattern.row_ptr[i];
            let hi = self.pattern.row_ptr[i + 1];
            for k in lo..hi {
                acc += self.vals[k] * x[self.pattern.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    pub fn matvec_alloc(&self, x: &DVector<T>) -> DVector<T> {
        let mut y = DVector::zeros(self.pattern.n);
        self.matvec(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let n = self.pattern.n;
        let mut d = DMatrix::zeros(n, n);
        for i in 0..n {
            for k in self.pattern.row_ptr[i]..self.pattern.row_ptr[i + 1] {
                d[(i, self.pattern.col_idx[k])] = self.vals[k];
            }
        }
        d
    }

    /// Same pattern, negated values.
    pub fn negated(&self) -> Self {
        Self { pattern: self.pattern.clone(), vals: self.vals.iter().map(|&v| -v).collect() }
    }

    /// Row-sum norm; for a symmetric matrix this bounds the spectral radius.
    pub fn inf_norm(&self) -> T {
        let mut best = T::zero();
        for i in 0..self.pattern.n {
            let mut acc = T::zero();
            for k in self.pattern.row_ptr[i]..self.pattern.row_ptr[i + 1] {
                acc += self.vals[k].abs();
            }
            best = best.max(acc);
        }
        best
    }

    /// Largest absolute asymmetry max |a_ij - a_ji|; the assembled Hessian
    /// must report exactly zero.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.pattern.n {
            for k in self.pattern.row_ptr[i]..self.pattern.row_ptr[i + 1] {
                let j = self.pattern.col_idx[k];
                worst = worst.max((self.vals[k] - self.get(j, i)).abs());
            }
        }
        worst
    }
}

/// Dense symmetric eigendecomposition, eigenvalues ascending with matching
/// unit eigenvectors. The oracle path for small matrices.
pub fn sym_eigen_dense<T: Real>(a: DMatrix<T>) -> (Vec<T>, Vec<DVector<T>>) {
    assert_eq!(a.nrows(), a.ncols());
    let eig = nalgebra::SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .expect("non-NaN eigenvalues")
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| DVector::from_column_slice(eig.eigenvectors.column(i).as_slice()))
        .collect();
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn csr_matvec_matches_dense() {
        let trips = vec![
            (0usize, 0usize, 2.0f64),
            (0, 1, -1.0),
            (1, 0, -1.0),
            (1, 1, 2.0),
            (1, 2, -1.0),
            (2, 1, -1.0),
            (2, 2, 2.0),
        ];
        let a = SymCsr::from_triplets(3, &trips);
        let x = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let y = a.matvec_alloc(&x);
        let yd = a.to_dense() * &x;
        assert_relative_eq!(y, yd, epsilon = 1e-15);
        assert_eq!(a.pattern().half_bandwidth(), 1);
        assert_eq!(a.asymmetry(), 0.0);
    }

    #[test]
    fn duplicate_triplets_accumulate() {
        let a = SymCsr::from_triplets(2, &[(0, 0, 1.0f64), (0, 0, 2.5), (1, 1, 1.0)]);
        assert_eq!(a.get(0, 0), 3.5);
        assert_eq!(a.get(0, 1), 0.0);
    }

    #[test]
    fn dense_eigen_sorted() {
        let a = DMatrix::from_row_slice(3, 3, &[3.0f64, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]);
        let (vals, vecs) = sym_eigen_dense(a);
        assert_relative_eq!(vals[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(vals[2], 3.0, epsilon = 1e-12);
        assert_relative_eq!(vecs[0][1].abs(), 1.0, epsilon = 1e-12);
    }
}
