//! Eigen-analysis of the assembled Hessian: extreme eigenvalues for the
//! step-size rules, smallest-k eigenpairs for stability classification and
//! perturbation directions, and circumferential wavenumber identification of
//! eigenmodes.
//!
//! Small matrices go through a dense symmetric eigendecomposition. Above
//! `dense_cutoff` the smallest eigenpairs come from shift-invert Lanczos:
//! a shift is pushed below the spectrum until the banded LDL^T of
//! `H - sigma I` certifies positive definiteness, and the factorization is
//! then reused as the inverted operator. Every reported pair is backed by an
//! explicit residual check, so the two paths are interchangeable.

use nalgebra::DVector;
use thiserror::Error;

use crate::linalg::{
    lanczos, seed_vector, sym_eigen_dense, BandedLdlt, LanczosRun, LinalgError, SymCsr, SymOp,
};
use crate::mesh::Mesh;
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("eigensolver did not converge: worst residual {residual:.3e}, required {required:.3e}")]
    NoConvergence { residual: f64, required: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Local stability of a critical point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    LocalMinimizer,
    Saddle,
    Marginal,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Classification::LocalMinimizer => write!(f, "minimizer"),
            Classification::Saddle => write!(f, "saddle"),
            Classification::Marginal => write!(f, "marginal"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralConfig<T> {
    /// Problem size below which the dense eigendecomposition is used.
    pub dense_cutoff: usize,
    /// Eigenpair residual bound, relative to the row-sum norm of H.
    pub residual_tol_rel: T,
    /// Relative accuracy of the extreme eigenvalues.
    pub extreme_tol_rel: T,
    /// Hard cap on the Lanczos subspace dimension.
    pub max_lanczos: usize,
    /// Classification threshold relative to lambda_max; `classify` uses
    /// tol_eig = classify_tol_rel * lambda_max.
    pub classify_tol_rel: T,
}

impl<T: Real> Default for SpectralConfig<T> {
    fn default() -> Self {
        Self {
            dense_cutoff: 900,
            residual_tol_rel: T::lit(1e-8),
            extreme_tol_rel: T::lit(1e-6),
            max_lanczos: 320,
            classify_tol_rel: T::lit(1e-8),
        }
    }
}

/// Eigen summary at a critical point.
#[derive(Debug, Clone)]
pub struct SpectralReport<T: nalgebra::Scalar> {
    /// The k smallest eigenvalues, ascending.
    pub eigenvalues: Vec<T>,
    /// Matching unit eigenvectors over free DOFs.
    pub eigenvectors: Vec<DVector<T>>,
    pub lambda_max: T,
    pub classification: Classification,
    /// Dominant circumferential wavenumber per eigenvector, when one mode
    /// carries more than half the spectral power.
    pub mode_wavenumbers: Vec<Option<usize>>,
}

impl<T: Real> SpectralReport<T> {
    pub fn lambda_min(&self) -> T {
        self.eigenvalues[0]
    }
}

/// Largest eigenvalue by direct Lanczos with explicit residual control.
fn largest_eigenvalue<T: Real>(
    h: &SymCsr<T>,
    cfg: &SpectralConfig<T>,
) -> Result<(T, DVector<T>), SpectralError> {
    let n = h.n();
    let scale = h.inf_norm().max(T::default_epsilon());
    let mut m = 60.min(n);
    let mut v0 = seed_vector(n, 23);
    let mut best_residual = T::max_value().unwrap_or_else(T::one);
    for _ in 0..6 {
        let run = lanczos(&mut (&*h), &v0, m);
        let (theta, s) = run.ritz();
        let top = theta.len() - 1;
        let lam = theta[top];
        let v = run.assemble(s.column(top));
        let residual = (h.matvec_alloc(&v) - &v * lam).norm();
        let need = cfg.extreme_tol_rel * lam.abs().max(scale * T::lit(1e-12));
        best_residual = best_residual.min(residual);
        if residual <= need {
            return Ok((lam, v));
        }
        v0 = v;
        m = (m * 3 / 2).min(cfg.max_lanczos).min(n);
    }
    // clustered top: certify through shift-invert on -H instead
    let neg = h.negated();
    let (vals, mut vecs) = smallest_k_iterative(&neg, 1, cfg)?;
    Ok((-vals[0], vecs.swap_remove(0)))
}

/// The k smallest eigenpairs by shift-invert Lanczos. The shift is lowered
/// until LDL^T certifies `H - sigma I` positive definite, which guarantees
/// the inverted spectrum is positive and its largest values map exactly to
/// the smallest eigenvalues of H.
fn smallest_k_iterative<T: Real>(
    h: &SymCsr<T>,
    k: usize,
    cfg: &SpectralConfig<T>,
) -> Result<(Vec<T>, Vec<DVector<T>>), SpectralError> {
    let n = h.n();
    let hnorm = h.inf_norm().max(T::default_epsilon());
    let tol = cfg.residual_tol_rel * hnorm;

    // coarse bracket of the spectrum
    let probe = lanczos(&mut (&*h), &seed_vector(n, 31), 80.min(n));
    let (theta, s) = probe.ritz();
    let lam_min_est = theta[0];
    let spread = (*theta.last().unwrap() - lam_min_est).max(hnorm * T::lit(1e-10));
    let bottom_res = probe.residual_estimate(s.column(0));

    // push the shift below the spectrum
    let mut gap = (bottom_res + spread * T::lit(5e-3)).max(spread * T::lit(1e-6));
    let mut sigma;
    let mut ldlt = None;
    for _ in 0..40 {
        sigma = lam_min_est - gap;
        match BandedLdlt::factor(h, sigma) {
            Ok(f) => {
                ldlt = Some((f, sigma));
                break;
            }
            Err(_) => gap *= T::lit(3.0),
        }
    }
    let (ldlt, sigma) = ldlt.ok_or(LinalgError::NotPositiveDefinite {
        index: 0,
        value: f64::NAN,
    })?;

    // shift-invert sweeps with growing subspace until the top-k pairs pass
    // the explicit residual check on H itself AND an inertia count certifies
    // that nothing below the k-th value was missed (degenerate pairs are the
    // failure mode this guards against)
    let mut m = (2 * k + 28).min(n);
    let mut v0 = seed_vector(n, 47);
    let mut worst = T::max_value().unwrap_or_else(T::one);
    for attempt in 0..6 {
        let mut op = Deflated { ldlt: &ldlt, n, vs: &[] };
        let run: LanczosRun<T> = lanczos(&mut op, &v0, m);
        let (theta_inv, s_inv) = run.ritz();
        let found = theta_inv.len();
        if found < k && found < n {
            m = (m * 2).min(cfg.max_lanczos).min(n);
            v0 = seed_vector(n, 53);
            continue;
        }
        let take = k.min(found);
        let mut pairs: Vec<(T, DVector<T>)> = Vec::with_capacity(take + 4);
        let mut ok = true;
        worst = T::zero();
        // largest inverted Ritz values first: smallest eigenvalues of H
        for j in 0..take {
            let col = found - 1 - j;
            let mut v = run.assemble(s_inv.column(col));
            v.normalize_mut();
            // Rayleigh quotient sharpens the value beyond 1/theta accuracy
            let hv = h.matvec_alloc(&v);
            let lam = v.dot(&hv);
            let residual = (&hv - &v * lam).norm();
            worst = worst.max(residual);
            if residual > tol {
                ok = false;
            }
            pairs.push((lam, v));
        }

        if ok {
            // rescue sweeps on the deflated operator until the inertia
            // slices certify that nothing below the returned set was missed
            for _rescue in 0..4 {
                pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite eigenvalues"));
                pairs.truncate(k);
                let vals: Vec<T> = pairs.iter().map(|(v, _)| *v).collect();
                match certify_smallest(h, &vals, hnorm) {
                    Some(true) => {
                        debug_assert!(sigma < vals[0]);
                        let (vals, vecs) = pairs.into_iter().unzip();
                        return Ok((vals, vecs));
                    }
                    None => break, // slicing unreliable here; full retry
                    Some(false) => {
                        // a member below the top is missing (degenerate
                        // partner, typically): sweep the deflated complement
                        let held: Vec<DVector<T>> =
                            pairs.iter().map(|(_, v)| v.clone()).collect();
                        let mut op = Deflated { ldlt: &ldlt, n, vs: &held };
                        let seed = seed_vector(n, 101 + attempt as u64);
                        let run = lanczos(&mut op, &seed, (k + 16).min(n));
                        let (theta2, s2) = run.ritz();
                        let top = vals[vals.len() - 1];
                        let allow = top + slice_margin(top, hnorm);
                        let mut added = false;
                        for j in 0..theta2.len().min(4) {
                            let col = theta2.len() - 1 - j;
                            let mut v = run.assemble(s2.column(col));
                            for (_, held_v) in &pairs {
                                let c = held_v.dot(&v);
                                v.axpy(-c, held_v, T::one());
                            }
                            if v.norm() < T::lit(1e-6) {
                                continue;
                            }
                            v.normalize_mut();
                            let hv = h.matvec_alloc(&v);
                            let lam = v.dot(&hv);
                            if (&hv - &v * lam).norm() <= tol && lam <= allow {
                                pairs.push((lam, v));
                                added = true;
                            }
                        }
                        if !added {
                            break;
                        }
                    }
                }
            }
        }
        m = (m * 3 / 2 + 8).min(cfg.max_lanczos).min(n);
        v0 = seed_vector(n, 59 + m as u64);
    }
    Err(SpectralError::NoConvergence { residual: worst.as_f64(), required: tol.as_f64() })
}

/// Shift-inverted operator restricted to the orthogonal complement of `vs`.
struct Deflated<'f, T> {
    ldlt: &'f BandedLdlt<T>,
    n: usize,
    vs: &'f [DVector<T>],
}

impl<'f, T: Real> SymOp<T> for Deflated<'f, T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&mut self, x: &DVector<T>, y: &mut DVector<T>) {
        y.copy_from(x);
        for v in self.vs {
            let c = v.dot(y);
            y.axpy(-c, v, T::one());
        }
        self.ldlt.solve_in_place(y);
        for v in self.vs {
            let c = v.dot(y);
            y.axpy(-c, v, T::one());
        }
    }
}

/// Number of eigenvalues strictly below `tau`, by LDL^T inertia counting;
/// None when every nearby slice hits a breakdown pivot.
fn count_below<T: Real>(h: &SymCsr<T>, tau: T) -> Option<usize> {
    let mut t = tau;
    for _ in 0..4 {
        match BandedLdlt::factor_indefinite(h, t) {
            Ok((_, negatives)) => return Some(negatives),
            Err(_) => t += (h.inf_norm() * T::lit(1e-11)).max(t.abs() * T::lit(1e-10)),
        }
    }
    None
}

fn slice_margin<T: Real>(near: T, hnorm: T) -> T {
    hnorm * T::lit(1e-12) + near.abs() * T::lit(1e-9)
}

/// Inertia certificate for an ascending candidate set of smallest
/// eigenvalues: no eigenvalue sits below the first member, and at every
/// resolvable gap the count of eigenvalues below the midpoint matches.
/// Clusters tighter than the slice margin are not separable and need no
/// check: any members of such a cluster are interchangeable.
fn certify_smallest<T: Real>(h: &SymCsr<T>, vals: &[T], hnorm: T) -> Option<bool> {
    let d0 = slice_margin(vals[0], hnorm);
    if count_below(h, vals[0] - d0)? != 0 {
        return Some(false);
    }
    for i in 0..vals.len() - 1 {
        let gap = vals[i + 1] - vals[i];
        if gap > T::lit(4.0) * slice_margin(vals[i], hnorm) {
            let mid = (vals[i] + vals[i + 1]) * T::lit(0.5);
            if count_below(h, mid)? != i + 1 {
                return Some(false);
            }
        }
    }
    Some(true)
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn extreme_eigenvalues<T: Real>(
    h: &SymCsr<T>,
    cfg: &SpectralConfig<T>,
) -> Result<(T, T), SpectralError> {
    if h.n() <= cfg.dense_cutoff {
        let (vals, _) = sym_eigen_dense(h.to_dense());
        return Ok((vals[0], *vals.last().unwrap()));
    }
    let (lam_max, _) = largest_eigenvalue(h, cfg)?;
    let (vals, _) = smallest_k_iterative(h, 1, cfg)?;
    Ok((vals[0], lam_max))
}

/// The k smallest eigenpairs, ascending, residual-checked.
pub fn smallest_k_eigenpairs<T: Real>(
    h: &SymCsr<T>,
    k: usize,
    cfg: &SpectralConfig<T>,
) -> Result<(Vec<T>, Vec<DVector<T>>), SpectralError> {
    assert!(k >= 1, "k must be at least 1");
    let k = k.min(h.n());
    if h.n() <= cfg.dense_cutoff {
        let (vals, vecs) = sym_eigen_dense(h.to_dense());
        return Ok((vals[..k].to_vec(), vecs[..k].to_vec()));
    }
    smallest_k_iterative(h, k, cfg)
}

/// Stability from the smallest eigenvalue and a tolerance.
pub fn classify_value<T: Real>(lambda_min: T, tol_eig: T) -> Classification {
    if lambda_min > tol_eig {
        Classification::LocalMinimizer
    } else if lambda_min < -tol_eig {
        Classification::Saddle
    } else {
        Classification::Marginal
    }
}

/// Classifies a critical point from its Hessian. When `tol_eig` is `None`
/// the scale-aware default `classify_tol_rel * lambda_max` is used.
pub fn classify<T: Real>(
    h: &SymCsr<T>,
    tol_eig: Option<T>,
    cfg: &SpectralConfig<T>,
) -> Result<Classification, SpectralError> {
    let (lam_min, lam_max) = extreme_eigenvalues(h, cfg)?;
    let tol = tol_eig.unwrap_or(cfg.classify_tol_rel * lam_max.abs());
    Ok(classify_value(lam_min, tol))
}

/// Dominant circumferential Fourier mode of the radial displacement sampled
/// at the inner-boundary nodes; `None` when no single mode carries more than
/// half the power.
pub fn mode_wavenumber<T: Real>(v: &DVector<T>, mesh: &Mesh<T>) -> Option<usize> {
    let ring = mesh.inner_ring_nodes();
    let n = ring.len();
    if n < 3 {
        return None;
    }
    let mut radial = Vec::with_capacity(n);
    let mut angles = Vec::with_capacity(n);
    for &node in &ring {
        let p = mesh.node(node);
        let r = p.coords.norm();
        if r <= T::default_epsilon() {
            return None;
        }
        let base = mesh.free_dof(node)?;
        let u_r = (v[base] * p.x + v[base + 1] * p.y) / r;
        radial.push(u_r);
        angles.push(p.y.atan2(p.x));
    }

    let mut total = T::zero();
    let mut best_mode = 0usize;
    let mut best_power = T::zero();
    for m in 0..=(n / 2) {
        let mut c = T::zero();
        let mut s = T::zero();
        for (j, &u) in radial.iter().enumerate() {
            let ang = T::from_count(m) * angles[j];
            c += u * ang.cos();
            s += u * ang.sin();
        }
        let mut p = c * c + s * s;
        if m != 0 && 2 * m != n {
            p *= T::lit(2.0); // conjugate bin
        }
        total += p;
        if p > best_power {
            best_power = p;
            best_mode = m;
        }
    }
    if total <= T::default_epsilon() {
        return None;
    }
    (best_power / total > T::lit(0.5)).then_some(best_mode)
}

/// Full spectral summary at a critical point: k smallest pairs, lambda_max,
/// classification, per-vector wavenumbers.
pub fn spectral_report<T: Real>(
    h: &SymCsr<T>,
    k: usize,
    mesh: &Mesh<T>,
    tol_eig: Option<T>,
    cfg: &SpectralConfig<T>,
) -> Result<SpectralReport<T>, SpectralError> {
    let (eigenvalues, eigenvectors) = smallest_k_eigenpairs(h, k, cfg)?;
    let lambda_max = if h.n() <= cfg.dense_cutoff {
        let (vals, _) = sym_eigen_dense(h.to_dense());
        *vals.last().unwrap()
    } else {
        largest_eigenvalue(h, cfg)?.0
    };
    let tol = tol_eig.unwrap_or(cfg.classify_tol_rel * lambda_max.abs());
    let classification = classify_value(eigenvalues[0], tol);
    let mode_wavenumbers = eigenvectors.iter().map(|v| mode_wavenumber(v, mesh)).collect();
    Ok(SpectralReport { eigenvalues, eigenvectors, lambda_max, classification, mode_wavenumbers })
}
