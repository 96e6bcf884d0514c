//! Discrete elastic energy, analytic gradient, and analytic Hessian over the
//! free degrees of freedom.
//!
//! Uniform-strain (linear) triangles: on element `t` with counterclockwise
//! vertices (v0, v1, v2),
//!
//! ```text
//! m  = [p1 - p0, p2 - p0]     current edge matrix
//! M  = [X1 - X0, X2 - X0]     reference edge matrix, det M = 2 A0
//! F  = m M^-1,  Fe = F G^-1,  E_t = Jg W(Fe) A0
//! ```
//!
//! The gradient contribution of element `t` at vertex `k` is
//! `1/2 sigma phi_perp(k)` where `phi_perp(k)` is the counterclockwise
//! rotation of the current edge opposing `k`. Hessian blocks pair two
//! vertices of one element; the `eps`-weighted skew term encodes the second
//! derivative of the current area and flips sign with the pair orientation,
//! so accumulating all ordered pairs keeps the global matrix exactly
//! symmetric.
//!
//! Assembly sweeps triangles in index order with a single accumulator, so
//! results are bitwise reproducible.

use std::sync::Arc;

use nalgebra::{DVector, Matrix2, Point2, Vector2};
use thiserror::Error;

use crate::linalg::{SparsityPattern, SymCsr};
use crate::material::{self, MaterialParams};
use crate::mesh::{Mesh, Region};
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("inverted element {triangle}: det(Fe) = {det:.4e} <= 0")]
    InvertedElement { triangle: usize, det: f64 },
    #[error("growth stretch must be positive, got {0}")]
    InvalidGrowth(f64),
}

/// Piecewise-isotropic growth: `g I` on growing triangles, `I` elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthField<T> {
    g: T,
}

impl<T: Real> GrowthField<T> {
    pub fn new(g: T) -> Result<Self, AssemblyError> {
        if g <= T::zero() {
            return Err(AssemblyError::InvalidGrowth(g.as_f64()));
        }
        Ok(Self { g })
    }

    pub fn g(&self) -> T {
        self.g
    }

    /// Scalar stretch of the region: `g` or 1.
    #[inline]
    pub fn stretch(&self, region: Region) -> T {
        match region {
            Region::Growing => self.g,
            Region::NonGrowing => T::one(),
        }
    }

    pub fn tensor(&self, region: Region) -> Matrix2<T> {
        Matrix2::identity() * self.stretch(region)
    }

    /// det G of the region (g^2 in 2D).
    #[inline]
    pub fn jg(&self, region: Region) -> T {
        let s = self.stretch(region);
        s * s
    }
}

/// Current nodal coordinates. Dirichlet nodes always carry their reference
/// positions: the only mutators go through the free-DOF map.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField<T: nalgebra::Scalar> {
    coords: Vec<Point2<T>>,
}

impl<T: Real> NodalField<T> {
    pub fn reference(mesh: &Mesh<T>) -> Self {
        Self { coords: mesh.nodes().to_vec() }
    }

    pub fn from_free(mesh: &Mesh<T>, x: &DVector<T>) -> Self {
        let mut field = Self::reference(mesh);
        field.set_free(mesh, x);
        field
    }

    pub fn node(&self, k: usize) -> Point2<T> {
        self.coords[k]
    }

    pub fn coords(&self) -> &[Point2<T>] {
        &self.coords
    }

    pub fn free_vector(&self, mesh: &Mesh<T>) -> DVector<T> {
        let mut x = DVector::zeros(mesh.n_free_dofs());
        for &k in mesh.free_nodes() {
            let base = mesh.free_dof(k).expect("free node has dofs");
            x[base] = self.coords[k].x;
            x[base + 1] = self.coords[k].y;
        }
        x
    }

    pub fn set_free(&mut self, mesh: &Mesh<T>, x: &DVector<T>) {
        assert_eq!(x.len(), mesh.n_free_dofs());
        for &k in mesh.free_nodes() {
            let base = mesh.free_dof(k).expect("free node has dofs");
            self.coords[k] = Point2::new(x[base], x[base + 1]);
        }
    }

    /// Euclidean norm of the coordinate difference over free DOFs.
    pub fn distance(&self, other: &Self, mesh: &Mesh<T>) -> T {
        let mut acc = T::zero();
        for &k in mesh.free_nodes() {
            let d = self.coords[k] - other.coords[k];
            acc += d.norm_squared();
        }
        acc.sqrt()
    }
}

/// Full per-triangle kinematic and stress state, for diagnostics and tests.
#[derive(Debug, Clone)]
pub struct ElementState<T: nalgebra::Scalar> {
    pub m: Matrix2<T>,
    pub m_ref: Matrix2<T>,
    pub f: Matrix2<T>,
    pub fe: Matrix2<T>,
    pub b: Matrix2<T>,
    pub jg: T,
    pub je: T,
    pub sigma: Matrix2<T>,
    pub a0: T,
}

struct ElementRef<T: nalgebra::Scalar> {
    verts: [usize; 3],
    minv: Matrix2<T>,
    /// det M = 2 A0
    det_m_ref: T,
    a0: T,
    region: Region,
    mu: T,
    k: T,
    /// free-DOF base per vertex, usize::MAX when Dirichlet
    dof: [usize; 3],
}

/// Mesh + material bound together with precomputed reference data and the
/// Hessian sparsity pattern. Growth is passed per call, so one system serves
/// a whole continuation run.
pub struct ElasticSystem<T: nalgebra::Scalar> {
    mesh: Arc<Mesh<T>>,
    material: MaterialParams<T>,
    elems: Vec<ElementRef<T>>,
    pattern: Arc<SparsityPattern>,
    /// CSR slot of each (vertex pair, 2x2 entry) per element; usize::MAX for
    /// pairs touching a Dirichlet node.
    positions: Vec<[usize; 36]>,
}

const NO_DOF: usize = usize::MAX;

#[inline]
fn jrot<T: Real>(v: Vector2<T>) -> Vector2<T> {
    Vector2::new(-v.y, v.x)
}

/// eps(k1, k2) from the counterclockwise vertex cycle: 0 on the diagonal,
/// +1 when k1 directly follows k2, -1 when k1 directly precedes k2.
#[inline]
fn eps_sign<T: Real>(a: usize, b: usize) -> T {
    if a == b {
        T::zero()
    } else if a == (b + 1) % 3 {
        T::one()
    } else {
        -T::one()
    }
}

impl<T: Real> ElasticSystem<T> {
    pub fn new(mesh: Arc<Mesh<T>>, material: MaterialParams<T>) -> Self {
        let mut elems = Vec::with_capacity(mesh.n_triangles());
        for t in 0..mesh.n_triangles() {
            let verts = mesh.triangle(t);
            let m_ref = mesh.reference_edge_matrix(t);
            let det_m_ref = m_ref.determinant();
            let minv = m_ref.try_inverse().expect("validated mesh has invertible M");
            let region = mesh.region(t);
            let (mu, k) = material.for_region(region);
            let dof = [
                mesh.free_dof(verts[0]).unwrap_or(NO_DOF),
                mesh.free_dof(verts[1]).unwrap_or(NO_DOF),
                mesh.free_dof(verts[2]).unwrap_or(NO_DOF),
            ];
            elems.push(ElementRef {
                verts,
                minv,
                det_m_ref,
                a0: det_m_ref * T::lit(0.5),
                region,
                mu,
                k,
                dof,
            });
        }

        let mut pairs = Vec::new();
        for el in &elems {
            for a in 0..3 {
                for b in 0..3 {
                    if el.dof[a] != NO_DOF && el.dof[b] != NO_DOF {
                        for ia in 0..2 {
                            for ib in 0..2 {
                                pairs.push((el.dof[a] + ia, el.dof[b] + ib));
                            }
                        }
                    }
                }
            }
        }
        let pattern = Arc::new(SparsityPattern::from_pairs(mesh.n_free_dofs(), pairs));

        let mut positions = Vec::with_capacity(elems.len());
        for el in &elems {
            let mut pos = [NO_DOF; 36];
            for a in 0..3 {
                for b in 0..3 {
                    if el.dof[a] == NO_DOF || el.dof[b] == NO_DOF {
                        continue;
                    }
                    for ia in 0..2 {
                        for ib in 0..2 {
                            let slot = (a * 3 + b) * 4 + ia * 2 + ib;
                            pos[slot] = pattern
                                .position(el.dof[a] + ia, el.dof[b] + ib)
                                .expect("pair in pattern");
                        }
                    }
                }
            }
            positions.push(pos);
        }

        Self { mesh, material, elems, pattern, positions }
    }

    pub fn mesh(&self) -> &Arc<Mesh<T>> {
        &self.mesh
    }

    pub fn material(&self) -> &MaterialParams<T> {
        &self.material
    }

    pub fn n_free_dofs(&self) -> usize {
        self.mesh.n_free_dofs()
    }

    pub fn hessian_pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    #[inline]
    fn kinematics(
        &self,
        phi: &NodalField<T>,
        growth: &GrowthField<T>,
        t: usize,
    ) -> Result<(Matrix2<T>, Matrix2<T>, T, [Point2<T>; 3]), AssemblyError> {
        let el = &self.elems[t];
        let p = [phi.node(el.verts[0]), phi.node(el.verts[1]), phi.node(el.verts[2])];
        let m = Matrix2::from_columns(&[p[1] - p[0], p[2] - p[0]]);
        let stretch = growth.stretch(el.region);
        let fe = m * el.minv / stretch;
        let je = fe.determinant();
        if je <= T::zero() {
            return Err(AssemblyError::InvertedElement { triangle: t, det: je.as_f64() });
        }
        Ok((m, fe, je, p))
    }

    /// Full element state, including the Cauchy stress.
    pub fn element_state(
        &self,
        phi: &NodalField<T>,
        growth: &GrowthField<T>,
        t: usize,
    ) -> Result<ElementState<T>, AssemblyError> {
        let el = &self.elems[t];
        let (m, fe, je, _) = self.kinematics(phi, growth, t)?;
        let sigma = material::cauchy_stress(&fe, el.mu, el.k)
            .map_err(|_| AssemblyError::InvertedElement { triangle: t, det: je.as_f64() })?;
        Ok(ElementState {
            m,
            m_ref: self.mesh.reference_edge_matrix(t),
            f: m * el.minv,
            fe,
            b: fe * fe.transpose(),
            jg: growth.jg(el.region),
            je,
            sigma,
            a0: el.a0,
        })
    }

    /// Total energy E = sum_t Jg W(Fe) A0.
    pub fn energy(&self, phi: &NodalField<T>, growth: &GrowthField<T>) -> Result<T, AssemblyError> {
        let mut total = T::zero();
        for t in 0..self.elems.len() {
            let el = &self.elems[t];
            let (_, fe, je, _) = self.kinematics(phi, growth, t)?;
            let w = material::strain_energy_density(&fe, el.mu, el.k)
                .map_err(|_| AssemblyError::InvertedElement { triangle: t, det: je.as_f64() })?;
            total += growth.jg(el.region) * w * el.a0;
        }
        Ok(total)
    }

    /// Gradient of the total energy over free DOFs.
    pub fn gradient(
        &self,
        phi: &NodalField<T>,
        growth: &GrowthField<T>,
    ) -> Result<DVector<T>, AssemblyError> {
        let mut grad = DVector::zeros(self.n_free_dofs());
        self.accumulate(phi, growth, Some(&mut grad))?;
        Ok(grad)
    }

    /// Energy and gradient in one sweep; the solver hot path.
    pub fn energy_and_gradient(
        &self,
        phi: &NodalField<T>,
        growth: &GrowthField<T>,
        grad: &mut DVector<T>,
    ) -> Result<T, AssemblyError> {
        grad.fill(T::zero());
        self.accumulate(phi, growth, Some(grad))
    }

    fn accumulate(
        &self,
        phi: &NodalField<T>,
        growth: &GrowthField<T>,
        mut grad: Option<&mut DVector<T>>,
    ) -> Result<T, AssemblyError> {
        let half = T::lit(0.5);
        let mut total = T::zero();
        for t in 0..self.elems.len() {
            let el = &self.elems[t];
            let (_, fe, je, p) = self.kinematics(phi, growth, t)?;
            let jg = growth.jg(el.region);
            let i1 = fe.norm_squared();
            let w = el.mu * half * (i1 / je - T::lit(2.0))
                + el.k * half * (je - T::one()) * (je - T::one());
            total += jg * w * el.a0;

            if let Some(gv) = grad.as_deref_mut() {
                // sigma = mu/Je^2 (B - tr(B)/2 I) + K (Je - 1) I
                let b = fe * fe.transpose();
                let mu_je2 = el.mu / (je * je);
                let diag = el.k * (je - T::one()) - mu_je2 * b.trace() * half;
                let s00 = mu_je2 * b[(0, 0)] + diag;
                let s11 = mu_je2 * b[(1, 1)] + diag;
                let s01 = mu_je2 * b[(0, 1)];
                for a in 0..3 {
                    let base = el.dof[a];
                    if base == NO_DOF {
                        continue;
                    }
                    let perp = jrot(p[(a + 2) % 3] - p[(a + 1) % 3]);
                    gv[base] += half * (s00 * perp.x + s01 * perp.y);
                    gv[base + 1] += half * (s01 * perp.x + s11 * perp.y);
                }
            }
        }
        Ok(total)
    }

    /// Analytic Hessian over free DOFs; exactly symmetric by construction.
    pub fn hessian(
        &self,
        phi: &NodalField<T>,
        growth: &GrowthField<T>,
    ) -> Result<SymCsr<T>, AssemblyError> {
        let mut h = SymCsr::zeroed(self.pattern.clone());
        self.hessian_into(phi, growth, &mut h)?;
        Ok(h)
    }

    pub fn hessian_into(
        &self,
        phi: &NodalField<T>,
        growth: &GrowthField<T>,
        h: &mut SymCsr<T>,
    ) -> Result<(), AssemblyError> {
        assert!(Arc::ptr_eq(h.pattern(), &self.pattern), "hessian buffer pattern mismatch");
        h.reset();
        let half = T::lit(0.5);
        for t in 0..self.elems.len() {
            let el = &self.elems[t];
            let (m, fe, je, p) = self.kinematics(phi, growth, t)?;
            let jg = growth.jg(el.region);
            let det_m = m.determinant();
            let b = fe * fe.transpose();
            let det_b = je * je;
            let tr_b = b.trace();
            // B^-1 of the symmetric 2x2 B
            let ib00 = b[(1, 1)] / det_b;
            let ib11 = b[(0, 0)] / det_b;
            let ib01 = -b[(0, 1)] / det_b;
            let perps = [
                jrot(p[2] - p[1]),
                jrot(p[0] - p[2]),
                jrot(p[1] - p[0]),
            ];
            let c_mu = el.mu * half;
            let c_k = el.k * half;
            let skew_mu = c_mu * tr_b / (T::lit(2.0) * det_b);
            let outer_k = c_k / (jg * el.det_m_ref);
            let skew_k = c_k * (je - T::one());

            for a in 0..3 {
                if el.dof[a] == NO_DOF {
                    continue;
                }
                for bv in 0..3 {
                    if el.dof[bv] == NO_DOF {
                        continue;
                    }
                    let pa = perps[a];
                    let pb = perps[bv];
                    let dot = c_mu * (pa.dot(&pb) / det_m);
                    let eps: T = eps_sign(a, bv);
                    let skew = skew_k * eps - skew_mu * eps;
                    // block = c_mu dot B^-1 + outer_k (pa (x) pb) + skew Jrot.
                    // Products of the two perp components are formed first so
                    // the (k1,k2) and (k2,k1) blocks come out bitwise
                    // transposed and the assembled matrix exactly symmetric.
                    let h00 = dot * ib00 + outer_k * (pa.x * pb.x);
                    let h01 = dot * ib01 + outer_k * (pa.x * pb.y) - skew;
                    let h10 = dot * ib01 + outer_k * (pa.y * pb.x) + skew;
                    let h11 = dot * ib11 + outer_k * (pa.y * pb.y);
                    let slot0 = (a * 3 + bv) * 4;
                    let pos = &self.positions[t];
                    h.add_at(pos[slot0], h00);
                    h.add_at(pos[slot0 + 1], h01);
                    h.add_at(pos[slot0 + 2], h10);
                    h.add_at(pos[slot0 + 3], h11);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundaryTag;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn small_system(ratio: f64) -> ElasticSystem<f64> {
        let mesh = Arc::new(Mesh::<f64>::build_annulus(0.5, 1.0, 3, 12, 1).unwrap());
        ElasticSystem::new(mesh, MaterialParams::from_stiffness_ratio(ratio).unwrap())
    }

    fn perturbed(system: &ElasticSystem<f64>, scale: f64, seed: u64) -> NodalField<f64> {
        let mesh = system.mesh();
        let mut rng = StdRng::seed_from_u64(seed);
        let mut x = NodalField::reference(mesh).free_vector(mesh);
        for v in x.iter_mut() {
            *v += rng.random_range(-scale..scale);
        }
        NodalField::from_free(mesh, &x)
    }

    #[test]
    fn reference_state_is_stress_free_at_g1() {
        let system = small_system(0.1);
        let phi = NodalField::reference(system.mesh());
        let growth = GrowthField::new(1.0).unwrap();
        assert!(system.energy(&phi, &growth).unwrap().abs() < 1e-28);
        assert!(system.gradient(&phi, &growth).unwrap().norm() < 1e-13);
        let st = system.element_state(&phi, &growth, 5).unwrap();
        assert_relative_eq!(st.fe, Matrix2::identity(), epsilon = 1e-14);
        assert!(st.sigma.norm() < 1e-14);
    }

    #[test]
    fn element_level_zero_stress_growth() {
        // one free triangle scaled by g with G = g I: Fe = I, E = 0, sigma = 0
        let g = 1.37;
        let nodes = vec![
            Point2::new(0.0f64, 0.0),
            Point2::new(1.0, 0.1),
            Point2::new(0.2, 0.9),
        ];
        let mesh = Arc::new(
            Mesh::from_parts(
                nodes.clone(),
                vec![[0, 1, 2]],
                vec![Region::Growing],
                vec![BoundaryTag::Bulk; 3],
            )
            .unwrap(),
        );
        let system =
            ElasticSystem::new(mesh.clone(), MaterialParams::from_stiffness_ratio(0.4).unwrap());
        let growth = GrowthField::new(g).unwrap();
        let scaled: Vec<_> = nodes.iter().map(|p| Point2::new(p.x * g, p.y * g)).collect();
        let mut x = DVector::zeros(6);
        for (k, p) in scaled.iter().enumerate() {
            x[2 * k] = p.x;
            x[2 * k + 1] = p.y;
        }
        let phi = NodalField::from_free(&mesh, &x);
        assert!(system.energy(&phi, &growth).unwrap().abs() < 1e-14);
        assert!(system.gradient(&phi, &growth).unwrap().norm() < 1e-13);
        let st = system.element_state(&phi, &growth, 0).unwrap();
        assert!(st.sigma.norm() < 1e-14);
        assert_relative_eq!(st.je, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn energy_matches_independent_per_element_summation() {
        let system = small_system(0.1);
        let growth = GrowthField::new(1.1).unwrap();
        let phi = NodalField::reference(system.mesh());
        let e = system.energy(&phi, &growth).unwrap();
        assert!(e > 0.0);
        // independent route: per-element material evaluations
        let mut total = 0.0;
        for t in 0..system.mesh().n_triangles() {
            let st = system.element_state(&phi, &growth, t).unwrap();
            let (mu, k) = system.material().for_region(system.mesh().region(t));
            let w = material::strain_energy_density(&st.fe, mu, k).unwrap();
            total += st.jg * w * st.a0;
        }
        assert_relative_eq!(e, total, max_relative = 1e-12);
    }

    #[test]
    fn gradient_matches_central_finite_differences() {
        for (g, ratio, seed) in [(1.05, 0.1, 1u64), (1.2, 0.4, 2), (1.1, 1.0, 3)] {
            let system = small_system(ratio);
            let growth = GrowthField::new(g).unwrap();
            let mesh = system.mesh().clone();
            for rep in 0..4 {
                let phi = perturbed(&system, 0.01, seed * 100 + rep);
                let x0 = phi.free_vector(&mesh);
                let grad = system.gradient(&phi, &growth).unwrap();
                let h = 1e-6 * mesh.outer_radius();
                let mut fd = DVector::zeros(x0.len());
                for i in 0..x0.len() {
                    let mut xp = x0.clone();
                    let mut xm = x0.clone();
                    xp[i] += h;
                    xm[i] -= h;
                    let ep = system.energy(&NodalField::from_free(&mesh, &xp), &growth).unwrap();
                    let em = system.energy(&NodalField::from_free(&mesh, &xm), &growth).unwrap();
                    fd[i] = (ep - em) / (2.0 * h);
                }
                let rel = (&grad - &fd).norm() / fd.norm().max(1e-30);
                assert!(rel < 1e-6, "g={g} ratio={ratio} rep={rep}: rel={rel:.3e}");
            }
        }
    }

    #[test]
    fn fused_energy_gradient_agrees_with_separate_calls() {
        let system = small_system(0.4);
        let growth = GrowthField::new(1.15).unwrap();
        let phi = perturbed(&system, 0.02, 9);
        let mut grad = DVector::zeros(system.n_free_dofs());
        let e = system.energy_and_gradient(&phi, &growth, &mut grad).unwrap();
        assert_eq!(e, system.energy(&phi, &growth).unwrap());
        assert_eq!(grad, system.gradient(&phi, &growth).unwrap());
    }

    #[test]
    fn hessian_is_exactly_symmetric_and_matches_fd_of_gradient() {
        let system = small_system(0.4);
        let growth = GrowthField::new(1.12).unwrap();
        let mesh = system.mesh().clone();
        for rep in 0..3 {
            let phi = perturbed(&system, 0.01, 40 + rep);
            let h_mat = system.hessian(&phi, &growth).unwrap();
            assert_eq!(h_mat.asymmetry(), 0.0, "assembled Hessian must be exactly symmetric");

            let x0 = phi.free_vector(&mesh);
            let n = x0.len();
            let step = 1e-5;
            let mut fd = nalgebra::DMatrix::zeros(n, n);
            for i in 0..n {
                let mut xp = x0.clone();
                let mut xm = x0.clone();
                xp[i] += step;
                xm[i] -= step;
                let gp = system.gradient(&NodalField::from_free(&mesh, &xp), &growth).unwrap();
                let gm = system.gradient(&NodalField::from_free(&mesh, &xm), &growth).unwrap();
                fd.set_column(i, &((gp - gm) / (2.0 * step)));
            }
            let dense = h_mat.to_dense();
            let rel = (&dense - &fd).norm() / fd.norm();
            assert!(rel < 1e-5, "rep={rep}: relative Frobenius error {rel:.3e}");
        }
    }

    #[test]
    fn hessian_positive_definite_at_reference() {
        let system = small_system(0.1);
        let growth = GrowthField::new(1.0).unwrap();
        let phi = NodalField::reference(system.mesh());
        let h = system.hessian(&phi, &growth).unwrap();
        let (vals, _) = crate::linalg::sym_eigen_dense(h.to_dense());
        assert!(vals[0] > 0.0, "lambda_min = {}", vals[0]);
    }

    #[test]
    fn element_energy_is_rotation_invariant() {
        let system = small_system(0.4);
        let growth = GrowthField::new(1.2).unwrap();
        let mesh = system.mesh().clone();
        let phi = perturbed(&system, 0.01, 77);
        let t = 7;
        let st = system.element_state(&phi, &growth, t).unwrap();
        let (mu, k) = system.material().for_region(mesh.region(t));
        let w0 = material::strain_energy_density(&st.fe, mu, k).unwrap();
        let theta = 0.83f64;
        let r = Matrix2::new(theta.cos(), -theta.sin(), theta.sin(), theta.cos());
        let w_rot = material::strain_energy_density(&(r * st.fe), mu, k).unwrap();
        assert_relative_eq!(w0, w_rot, max_relative = 1e-12);
    }

    #[test]
    fn current_area_identity() {
        let system = small_system(0.4);
        let growth = GrowthField::new(1.25).unwrap();
        let phi = perturbed(&system, 0.01, 5);
        for t in 0..system.mesh().n_triangles() {
            let st = system.element_state(&phi, &growth, t).unwrap();
            let shoelace = st.m.determinant() * 0.5;
            assert_relative_eq!(shoelace, st.jg * st.je * st.a0, max_relative = 1e-12);
        }
    }

    #[test]
    fn inversion_reports_the_offending_triangle() {
        let g = 1.0;
        let nodes = vec![
            Point2::new(0.0f64, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ];
        let mesh = Arc::new(
            Mesh::from_parts(
                nodes,
                vec![[0, 1, 2]],
                vec![Region::NonGrowing],
                vec![BoundaryTag::Bulk; 3],
            )
            .unwrap(),
        );
        let system =
            ElasticSystem::new(mesh.clone(), MaterialParams::from_stiffness_ratio(1.0).unwrap());
        // reflect node 2 through the opposite edge: inverted
        let mut x = NodalField::reference(&mesh).free_vector(&mesh);
        x[5] = -1.0;
        let phi = NodalField::from_free(&mesh, &x);
        match system.energy(&phi, &GrowthField::new(g).unwrap()) {
            Err(AssemblyError::InvertedElement { triangle, .. }) => assert_eq!(triangle, 0),
            other => panic!("expected inversion, got {other:?}"),
        }
    }

    #[test]
    fn dirichlet_nodes_never_move() {
        let system = small_system(1.0);
        let mesh = system.mesh();
        let phi = perturbed(&system, 0.3, 123);
        for k in 0..mesh.n_nodes() {
            if mesh.boundary(k) == BoundaryTag::DirichletExterior {
                assert_eq!(phi.node(k), mesh.node(k));
            }
        }
    }
}
