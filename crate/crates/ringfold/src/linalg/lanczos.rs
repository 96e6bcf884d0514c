//! Lanczos iteration with full reorthogonalization.
//!
//! At the problem sizes this crate targets (a few thousand unknowns) keeping
//! and reorthogonalizing the whole Krylov basis is cheap and removes the
//! ghost-eigenvalue failure mode, so no restarting scheme is needed.

use nalgebra::{DMatrix, DVector};

use super::{sym_eigen_dense, SymCsr};
use crate::scalar::Real;

/// A symmetric linear operator. `apply` takes `&mut self` so operators may
/// keep scratch buffers or factorizations.
pub trait SymOp<T> {
    fn dim(&self) -> usize;
    /// y = A x
    fn apply(&mut self, x: &DVector<T>, y: &mut DVector<T>);
}

impl<T: Real> SymOp<T> for &SymCsr<T> {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&mut self, x: &DVector<T>, y: &mut DVector<T>) {
        self.matvec(x, y);
    }
}

/// Deterministic pseudo-random unit-scale start vector (xorshift64*). The
/// solver must be bitwise reproducible, so no entropy sources are used.
pub fn seed_vector<T: Real>(n: usize, salt: u64) -> DVector<T> {
    let mut state = 0x9E37_79B9_7F4A_7C15u64 ^ (salt.wrapping_mul(0xBF58_476D_1CE4_E5B9) + n as u64);
    DVector::from_fn(n, |_, _| {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        let u = (state >> 11) as f64 / (1u64 << 53) as f64;
        T::lit(u - 0.5)
    })
}

/// Outcome of a Lanczos sweep: tridiagonal coefficients plus the
/// orthonormal basis needed to assemble Ritz vectors.
pub struct LanczosRun<T: nalgebra::Scalar> {
    pub alphas: Vec<T>,
    pub betas: Vec<T>,
    pub basis: Vec<DVector<T>>,
    /// The off-diagonal that would couple to step m+1; zero on breakdown
    /// (exact invariant subspace).
    pub final_beta: T,
}

impl<T: Real> LanczosRun<T> {
    /// Ritz values (ascending) and the matching coefficient columns in the
    /// Lanczos basis.
    pub fn ritz(&self) -> (Vec<T>, DMatrix<T>) {
        tridiag_eigen(&self.alphas, &self.betas)
    }

    /// Lifts a tridiagonal eigenvector back to problem space.
    pub fn assemble(&self, coeffs: nalgebra::DVectorView<'_, T>) -> DVector<T> {
        let n = self.basis[0].len();
        let mut v = DVector::zeros(n);
        for (j, base) in self.basis.iter().enumerate() {
            v.axpy(coeffs[j], base, T::one());
        }
        v
    }

    /// Standard residual-norm estimate |beta_m s_{m,i}| for Ritz pair i.
    pub fn residual_estimate(&self, coeffs: nalgebra::DVectorView<'_, T>) -> T {
        self.final_beta.abs() * coeffs[coeffs.len() - 1].abs()
    }
}

/// Runs at most `m` Lanczos steps of `op` starting from `v0`, with two-pass
/// classical Gram-Schmidt reorthogonalization against the full basis.
pub fn lanczos<T: Real>(op: &mut impl SymOp<T>, v0: &DVector<T>, m: usize) -> LanczosRun<T> {
    let n = op.dim();
    let m = m.min(n).max(1);
    let mut v = v0.clone();
    let nrm = v.norm();
    if nrm <= T::default_epsilon() {
        v = seed_vector(n, 1);
    }
    v.normalize_mut();

    let mut alphas = Vec::with_capacity(m);
    let mut betas: Vec<T> = Vec::with_capacity(m.saturating_sub(1));
    let mut basis: Vec<DVector<T>> = Vec::with_capacity(m);
    let mut w = DVector::zeros(n);
    let mut final_beta = T::zero();

    basis.push(v);
    for j in 0..m {
        let vj = basis[j].clone();
        op.apply(&vj, &mut w);
        let alpha = vj.dot(&w);
        alphas.push(alpha);
        w.axpy(-alpha, &vj, T::one());
        if j > 0 {
            let beta_prev = betas[j - 1];
            w.axpy(-beta_prev, &basis[j - 1], T::one());
        }
        // full reorthogonalization, two passes
        for _ in 0..2 {
            for base in &basis {
                let c = base.dot(&w);
                w.axpy(-c, base, T::one());
            }
        }
        let beta = w.norm();
        if j + 1 == m {
            final_beta = beta;
            break;
        }
        if beta <= T::default_epsilon() * T::lit(16.0) * alpha.abs().max(T::one()) {
            final_beta = T::zero();
            break;
        }
        betas.push(beta);
        basis.push(&w / beta);
    }

    LanczosRun { alphas, betas, basis, final_beta }
}

/// Eigendecomposition of a symmetric tridiagonal matrix, ascending. Sizes
/// here are the Lanczos subspace dimension, so dense work is fine.
pub fn tridiag_eigen<T: Real>(alphas: &[T], betas: &[T]) -> (Vec<T>, DMatrix<T>) {
    let m = alphas.len();
    assert!(m > 0 && betas.len() + 1 >= m);
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let (vals, vecs) = sym_eigen_dense(t);
    let mut s = DMatrix::zeros(m, m);
    for (c, vec) in vecs.iter().enumerate() {
        s.set_column(c, vec);
    }
    (vals, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn laplacian(n: usize) -> SymCsr<f64> {
        let mut trips = Vec::new();
        for i in 0..n {
            trips.push((i, i, 2.0));
            if i + 1 < n {
                trips.push((i, i + 1, -1.0));
                trips.push((i + 1, i, -1.0));
            }
        }
        SymCsr::from_triplets(n, &trips)
    }

    #[test]
    fn full_sweep_recovers_spectrum_exactly() {
        let a = laplacian(12);
        let run = lanczos(&mut (&a), &seed_vector(12, 3), 12);
        let (theta, _) = run.ritz();
        let (exact, _) = sym_eigen_dense(a.to_dense());
        for (t, e) in theta.iter().zip(exact.iter()) {
            assert_relative_eq!(t, e, epsilon = 1e-10);
        }
    }

    #[test]
    fn partial_sweep_brackets_extremes() {
        let a = laplacian(200);
        let run = lanczos(&mut (&a), &seed_vector(200, 5), 60);
        let (theta, _) = run.ritz();
        let (exact, _) = sym_eigen_dense(a.to_dense());
        // interior estimates: Ritz values sit inside the true spectrum
        assert!(theta[0] >= exact[0] - 1e-12);
        assert!(*theta.last().unwrap() <= exact[199] + 1e-12);
    }

    #[test]
    fn separated_top_eigenpair_converges_fast() {
        // Laplacian plus one diagonal spike: isolated lambda_max
        let mut a = laplacian(200);
        let spike = a.pattern().position(0, 0).unwrap();
        a.add_at(spike, 4.0);
        let run = lanczos(&mut (&a), &seed_vector(200, 5), 60);
        let (theta, s) = run.ritz();
        let top = s.column(theta.len() - 1);
        let v = run.assemble(top);
        let lam = *theta.last().unwrap();
        let residual = (&a.matvec_alloc(&v) - &v * lam).norm();
        assert!(residual < 1e-8, "residual {residual}");
        assert_relative_eq!(v.norm(), 1.0, epsilon = 1e-10);
        let (exact, _) = sym_eigen_dense(a.to_dense());
        assert_relative_eq!(lam, exact[199], epsilon = 1e-9);
    }

    #[test]
    fn breakdown_on_invariant_subspace_is_clean() {
        // start vector is an exact eigenvector: one step, zero final beta
        let a = laplacian(6);
        let (_, vecs) = sym_eigen_dense(a.to_dense());
        let run = lanczos(&mut (&a), &vecs[2], 6);
        assert!(run.final_beta.abs() < 1e-12);
        assert!(run.alphas.len() < 6);
    }
}
