//! Plane neo-Hookean constitutive law.
//!
//! The strain energy density is
//!
//! ```text
//! W(Fe) = mu/2 ((det Fe)^-1 tr(Fe^T Fe) - 2) + K/2 (det Fe - 1)^2
//! ```
//!
//! with shear modulus `mu` and bulk modulus `K`, evaluated on the elastic
//! part `Fe` of the deformation gradient. All tensors are 2x2. The closed
//! forms below are frozen in code; the finite-difference oracle that
//! validates them lives in the test suite, off the hot path.

use nalgebra::Matrix2;
use thiserror::Error;

use crate::mesh::Region;
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum MaterialError {
    #[error("inverted element state: det(Fe) = {det:.6e} <= 0")]
    InvertedElement { det: f64 },
    #[error("singular growth tensor: det(G) = {det:.6e}")]
    SingularGrowth { det: f64 },
    #[error("elastic moduli must be positive (got mu = {mu}, k = {k})")]
    NonPositiveModuli { mu: f64, k: f64 },
}

/// Moduli for the growing and non-growing layers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams<T> {
    pub mu_g: T,
    pub k_g: T,
    pub mu_ng: T,
    pub k_ng: T,
}

impl<T: Real> MaterialParams<T> {
    pub fn new(mu_g: T, k_g: T, mu_ng: T, k_ng: T) -> Result<Self, MaterialError> {
        for (mu, k) in [(mu_g, k_g), (mu_ng, k_ng)] {
            if mu <= T::zero() || k <= T::zero() {
                return Err(MaterialError::NonPositiveModuli { mu: mu.as_f64(), k: k.as_f64() });
            }
        }
        Ok(Self { mu_g, k_g, mu_ng, k_ng })
    }

    /// Baseline normalization mu_g = K_g = 1 with the non-growing moduli
    /// scaled by `ratio`. Only the ratio matters for the reported
    /// diagnostics, which are normalized by the annular-branch energy.
    pub fn from_stiffness_ratio(ratio: T) -> Result<Self, MaterialError> {
        Self::new(T::one(), T::one(), ratio, ratio)
    }

    pub fn for_region(&self, region: Region) -> (T, T) {
        match region {
            Region::Growing => (self.mu_g, self.k_g),
            Region::NonGrowing => (self.mu_ng, self.k_ng),
        }
    }
}

/// Cofactor of a 2x2 matrix: cof(A) = det(A) A^-T, linear in A.
#[inline]
pub fn cofactor<T: Real>(a: &Matrix2<T>) -> Matrix2<T> {
    Matrix2::new(a[(1, 1)], -a[(1, 0)], -a[(0, 1)], a[(0, 0)])
}

#[inline]
fn checked_det<T: Real>(fe: &Matrix2<T>) -> Result<T, MaterialError> {
    let det = fe.determinant();
    if det <= T::zero() {
        return Err(MaterialError::InvertedElement { det: det.as_f64() });
    }
    Ok(det)
}

/// W(Fe); zero exactly on rotations.
pub fn strain_energy_density<T: Real>(fe: &Matrix2<T>, mu: T, k: T) -> Result<T, MaterialError> {
    let je = checked_det(fe)?;
    let i1 = fe.norm_squared(); // tr(Fe^T Fe)
    let half = T::lit(0.5);
    let dev = mu * half * (i1 / je - T::lit(2.0));
    let vol = k * half * (je - T::one()) * (je - T::one());
    Ok(dev + vol)
}

/// dW/dFe, the Frechet derivative of `strain_energy_density` at `Fe`.
pub fn dw_dfe<T: Real>(fe: &Matrix2<T>, mu: T, k: T) -> Result<Matrix2<T>, MaterialError> {
    let je = checked_det(fe)?;
    let i1 = fe.norm_squared();
    let cof = cofactor(fe);
    let half = T::lit(0.5);
    Ok(fe * (mu / je) + cof * (k * (je - T::one()) - mu * i1 * half / (je * je)))
}

/// Cauchy stress sigma = Je^-1 (dW/dFe) Fe^T; symmetric by isotropy, and
/// deviatoric-plus-spherical in closed form:
///
/// ```text
/// sigma = mu/Je^2 (B - tr(B)/2 I) + K (Je - 1) I,   B = Fe Fe^T
/// ```
pub fn cauchy_stress<T: Real>(fe: &Matrix2<T>, mu: T, k: T) -> Result<Matrix2<T>, MaterialError> {
    let je = checked_det(fe)?;
    let b = fe * fe.transpose();
    let half = T::lit(0.5);
    let dev = (b - Matrix2::identity() * (b.trace() * half)) * (mu / (je * je));
    let sph = Matrix2::identity() * (k * (je - T::one()));
    Ok(dev + sph)
}

/// First Piola-Kirchhoff stress Pi = Jg (dW/dFe) G^-T with Fe = F G^-1.
/// Diagnostic only; satisfies the Piola relation
/// sigma = (det F)^-1 Pi F^T.
pub fn first_piola_diagnostic<T: Real>(
    f: &Matrix2<T>,
    g: &Matrix2<T>,
    mu: T,
    k: T,
) -> Result<Matrix2<T>, MaterialError> {
    let jg = g.determinant();
    let g_inv = g.try_inverse().ok_or(MaterialError::SingularGrowth { det: jg.as_f64() })?;
    if jg <= T::zero() {
        return Err(MaterialError::SingularGrowth { det: jg.as_f64() });
    }
    let fe = f * g_inv;
    let p = dw_dfe(&fe, mu, k)?;
    Ok(p * g_inv.transpose() * jg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rotation(theta: f64) -> Matrix2<f64> {
        Matrix2::new(theta.cos(), -theta.sin(), theta.sin(), theta.cos())
    }

    /// Random Fe = R(a) diag(l1, l2) R(b) with det in [0.2, 5].
    fn random_fe(rng: &mut StdRng) -> Matrix2<f64> {
        let l1: f64 = rng.random_range(0.45..2.2);
        let l2: f64 = rng.random_range(0.45..2.2);
        let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let b: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        rotation(a) * Matrix2::new(l1, 0.0, 0.0, l2) * rotation(b)
    }

    /// Central finite differences of W, the independent oracle for dw_dfe.
    fn dw_fd(fe: &Matrix2<f64>, mu: f64, k: f64, h: f64) -> Matrix2<f64> {
        let mut out = Matrix2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                let mut fp = *fe;
                let mut fm = *fe;
                fp[(i, j)] += h;
                fm[(i, j)] -= h;
                let wp = strain_energy_density(&fp, mu, k).unwrap();
                let wm = strain_energy_density(&fm, mu, k).unwrap();
                out[(i, j)] = (wp - wm) / (2.0 * h);
            }
        }
        out
    }

    #[test]
    fn identity_is_the_ground_state() {
        let fe = Matrix2::identity();
        assert_eq!(strain_energy_density(&fe, 1.3, 0.7).unwrap(), 0.0);
        assert_eq!(dw_dfe(&fe, 1.3, 0.7).unwrap(), Matrix2::zeros());
        assert_eq!(cauchy_stress(&fe, 1.3, 0.7).unwrap(), Matrix2::zeros());
    }

    #[test]
    fn frozen_value_from_direct_evaluation() {
        // det = 1, tr = 4.25: W = 1/2 (4.25 - 2) = 1.125
        let fe = Matrix2::new(2.0, 0.0, 0.0, 0.5);
        assert_relative_eq!(strain_energy_density(&fe, 1.0, 1.0).unwrap(), 1.125, epsilon = 1e-15);
    }

    #[test]
    fn rotations_cost_nothing() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let r = rotation(rng.random_range(0.0..std::f64::consts::TAU));
            let w = strain_energy_density(&r, 2.0, 3.0).unwrap();
            assert!(w.abs() < 1e-14, "w = {w}");
        }
    }

    #[test]
    fn energy_nonnegative_and_positive_off_rotations() {
        let mut rng = StdRng::seed_from_u64(12);
        for _ in 0..100 {
            let fe = random_fe(&mut rng);
            let w = strain_energy_density(&fe, 1.0, 1.0).unwrap();
            assert!(w >= -1e-15);
            // perturbed rotations gain energy
            let mut r = rotation(rng.random_range(0.0..std::f64::consts::TAU));
            r[(0, 0)] += 1e-3;
            assert!(strain_energy_density(&r, 1.0, 1.0).unwrap() > 0.0);
        }
    }

    #[test]
    fn derivative_matches_fd_on_frozen_case() {
        let fe = Matrix2::new(2.0, 0.0, 0.0, 0.5);
        let analytic = dw_dfe(&fe, 1.0, 0.0).unwrap();
        let numeric = dw_fd(&fe, 1.0, 0.0, 1e-6);
        assert_relative_eq!(analytic, numeric, max_relative = 1e-8);
    }

    #[test]
    fn derivative_matches_fd_on_random_states() {
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..100 {
            let fe = random_fe(&mut rng);
            let mu = rng.random_range(0.3..3.0);
            let k = rng.random_range(0.3..3.0);
            let analytic = dw_dfe(&fe, mu, k).unwrap();
            let numeric = dw_fd(&fe, mu, k, 1e-6);
            assert_relative_eq!(analytic, numeric, max_relative = 1e-7, epsilon = 1e-10);
        }
    }

    #[test]
    fn stress_is_symmetric_and_objective() {
        let mut rng = StdRng::seed_from_u64(14);
        for _ in 0..50 {
            let fe = random_fe(&mut rng);
            let s = cauchy_stress(&fe, 1.4, 0.9).unwrap();
            assert!((s[(0, 1)] - s[(1, 0)]).abs() < 1e-12);
            let r = rotation(rng.random_range(0.0..std::f64::consts::TAU));
            let s_rot = cauchy_stress(&(r * fe), 1.4, 0.9).unwrap();
            assert_relative_eq!(s_rot, r * s * r.transpose(), epsilon = 1e-12, max_relative = 1e-10);
        }
    }

    #[test]
    fn stress_diagonal_for_diagonal_stretch_and_cross_checked() {
        let lam = 1.7;
        let fe = Matrix2::new(lam, 0.0, 0.0, 1.0 / lam);
        let s = cauchy_stress(&fe, 1.0, 2.0).unwrap();
        assert_eq!(s[(0, 1)], 0.0);
        assert_eq!(s[(1, 0)], 0.0);
        // cross-check against sigma = Je^-1 (dW/dFe) Fe^T with the FD derivative
        let je = fe.determinant();
        let s_fd = dw_fd(&fe, 1.0, 2.0, 1e-6) * fe.transpose() / je;
        assert_relative_eq!(s, s_fd, max_relative = 1e-8, epsilon = 1e-10);
    }

    #[test]
    fn piola_identities() {
        // G = I: Pi reduces to dW/dFe
        let f = Matrix2::new(1.2, 0.1, -0.2, 0.9);
        let pi = first_piola_diagnostic(&f, &Matrix2::identity(), 1.0, 1.0).unwrap();
        assert_relative_eq!(pi, dw_dfe(&f, 1.0, 1.0).unwrap(), epsilon = 1e-14);

        // F = G = g I: stress-free growth
        let g = Matrix2::identity() * 1.3;
        let pi = first_piola_diagnostic(&g, &g, 1.0, 1.0).unwrap();
        assert!(pi.norm() < 1e-14);

        // Piola relation sigma = (det F)^-1 Pi F^T on random inputs
        let mut rng = StdRng::seed_from_u64(15);
        for _ in 0..50 {
            let f = random_fe(&mut rng);
            let gs: f64 = rng.random_range(0.8..1.5);
            let g = Matrix2::identity() * gs;
            let pi = first_piola_diagnostic(&f, &g, 1.1, 0.8).unwrap();
            let sigma = cauchy_stress(&(f * g.try_inverse().unwrap()), 1.1, 0.8).unwrap();
            let via_piola = pi * f.transpose() / f.determinant();
            assert_relative_eq!(sigma, via_piola, epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn inverted_state_is_an_error() {
        let fe = Matrix2::new(1.0, 0.0, 0.0, -1.0);
        assert!(matches!(
            strain_energy_density(&fe, 1.0, 1.0),
            Err(MaterialError::InvertedElement { .. })
        ));
        assert!(matches!(dw_dfe(&fe, 1.0, 1.0), Err(MaterialError::InvertedElement { .. })));
        assert!(matches!(
            cauchy_stress(&fe, 1.0, 1.0),
            Err(MaterialError::InvertedElement { .. })
        ));
    }

    #[test]
    fn moduli_validation() {
        assert!(MaterialParams::new(1.0, 1.0, 0.4, 0.4).is_ok());
        assert!(matches!(
            MaterialParams::new(-1.0, 1.0, 0.4, 0.4),
            Err(MaterialError::NonPositiveModuli { .. })
        ));
        let p = MaterialParams::from_stiffness_ratio(0.1).unwrap();
        assert_eq!(p.for_region(Region::Growing), (1.0, 1.0));
        assert_eq!(p.for_region(Region::NonGrowing), (0.1, 0.1));
    }
}
