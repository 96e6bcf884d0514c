//! Branch discovery and tracking: continuation in the growth parameter,
//! eigenvector perturbation protocols, and the per-step branch diagnostics
//! (distance from the annular branch, energy ratio, crease census, pitchfork
//! fits, death detection).
//!
//! A branch is continued by warm-starting each growth step from the previous
//! converged configuration. Steps try Newton first — saddle branches can
//! only be tracked that way — and fall back to the full two-phase solve when
//! Newton wanders. The annular reference branch s0 is solved lazily and
//! cached per growth value; it is continued Newton-only so the symmetric
//! state is followed even after it turns unstable.

use std::collections::BTreeMap;
use std::sync::Mutex;

use thiserror::Error;

use crate::assembly::{AssemblyError, ElasticSystem, GrowthField, NodalField};
use crate::optimizer::{
    self, newton_phase, ElasticProblem, SolveConfig, SolveError, SolveResult,
};
use crate::scalar::Real;
use crate::spectral::{
    classify_value, smallest_k_eigenpairs, spectral_report, Classification, SpectralConfig,
    SpectralError,
};

#[derive(Debug, Error)]
pub enum ContinuationError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error("continuation produced no steps (empty growth schedule)")]
    EmptySchedule,
    #[error("pitchfork fit needs at least 4 points with distinct amplitudes, got {0}")]
    DegenerateFit(usize),
    #[error("requested eigenpair {index} but only {available} available")]
    EigenIndexOutOfRange { index: usize, available: usize },
}

/// Crease-census thresholds. The census is a mesh-resolution-dependent
/// heuristic: creases are regularized singularities, so the angle threshold
/// is calibrated at the production mesh density and exposed here.
#[derive(Debug, Clone)]
pub struct CensusConfig<T> {
    /// An indentation vertex is a crease when its interior turning angle is
    /// below this (degrees).
    pub crease_angle_deg: T,
    /// Minimum prominence of an indentation, as a fraction of the total
    /// radial relief of the inner boundary.
    pub prominence_frac: T,
    /// Relief below this fraction of the mean radius counts as a circle.
    /// The floor sits above the faint period-2 ripple the alternating mesh
    /// texture imprints on rotationally symmetric states.
    pub relief_floor: T,
}

impl<T: Real> Default for CensusConfig<T> {
    fn default() -> Self {
        Self {
            crease_angle_deg: T::lit(120.0),
            prominence_frac: T::lit(0.05),
            relief_floor: T::lit(1e-4),
        }
    }
}

/// Census of the inner boundary: indentations (local minima of the radial
/// distance) split into creases and smooth indentations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Census {
    /// Node ids of non-smooth indentations.
    pub creases: Vec<usize>,
    /// Node ids of smooth indentations.
    pub smooth: Vec<usize>,
}

impl Census {
    pub fn crease_count(&self) -> usize {
        self.creases.len()
    }

    pub fn indentation_count(&self) -> usize {
        self.creases.len() + self.smooth.len()
    }

    pub fn signature(&self) -> (usize, usize) {
        (self.crease_count(), self.indentation_count())
    }
}

/// Eigenvector perturbation request: which ascending eigenpair, how far to
/// move, and (within a near-degenerate eigenplane) at which in-plane angle.
#[derive(Debug, Clone, Copy)]
pub struct PerturbationSpec<T> {
    pub eigen_index: usize,
    pub gamma: T,
    pub in_plane_angle_deg: T,
}

impl<T: Real> PerturbationSpec<T> {
    pub fn new(eigen_index: usize, gamma: T) -> Self {
        Self { eigen_index, gamma, in_plane_angle_deg: T::zero() }
    }
}

/// One continuation step with its diagnostics.
#[derive(Debug, Clone)]
pub struct BranchStep<T: nalgebra::Scalar> {
    pub g: T,
    pub phi: NodalField<T>,
    pub energy: T,
    pub residual: T,
    pub converged: bool,
    pub lambda_min: T,
    pub lambda_max: T,
    pub classification: Classification,
    /// Wavenumber of the lowest eigenvector, when one dominates.
    pub wavenumber: Option<usize>,
    /// Distance from the annular branch at the same growth value.
    pub distance: T,
    /// E / E(s0), None while the reference energy is zero.
    pub energy_ratio: Option<T>,
    pub crease_count: usize,
    pub indentation_count: usize,
}

/// What a dying branch collapsed onto.
#[derive(Debug, Clone)]
pub struct FallenInto<T: nalgebra::Scalar> {
    pub g: T,
    pub phi: NodalField<T>,
    pub energy: T,
    /// True when the collapse target is the annular branch itself.
    pub into_reference: bool,
}

/// A solution branch over a growth schedule.
#[derive(Debug, Clone)]
pub struct BranchRecord<T: nalgebra::Scalar> {
    pub label: String,
    /// Steps in continuation order; g is strictly monotone in the direction
    /// of continuation.
    pub steps: Vec<BranchStep<T>>,
    pub birth_g: Option<T>,
    pub death_g: Option<T>,
    pub fallen_into: Option<FallenInto<T>>,
    /// Set when the solver hard-failed mid-branch; the record is truncated.
    pub failure: Option<String>,
}

impl<T: Real> BranchRecord<T> {
    pub fn step_at(&self, g: T) -> Option<&BranchStep<T>> {
        let key = g_key(g);
        self.steps.iter().find(|s| g_key(s.g) == key)
    }

    pub fn last(&self) -> Option<&BranchStep<T>> {
        self.steps.last()
    }
}

/// Stable integer key for matching growth values across branches.
pub fn g_key<T: Real>(g: T) -> i64 {
    (g.as_f64() * 1e9).round() as i64
}

struct RefPoint<T: nalgebra::Scalar> {
    phi: NodalField<T>,
    energy: T,
}

/// Shared context for branch work: the elastic system, solver settings, and
/// the lazily grown cache of the annular reference branch.
pub struct BranchContext<T: nalgebra::Scalar> {
    pub system: ElasticSystem<T>,
    pub solve_cfg: SolveConfig<T>,
    pub spectral_cfg: SpectralConfig<T>,
    pub census_cfg: CensusConfig<T>,
    /// Eigenpairs computed per step (>= 2 so degenerate planes are visible).
    pub eigen_k: usize,
    reference: Mutex<BTreeMap<i64, RefPoint<T>>>,
}

impl<T: Real> BranchContext<T> {
    pub fn new(system: ElasticSystem<T>, solve_cfg: SolveConfig<T>) -> Self {
        Self {
            system,
            solve_cfg,
            spectral_cfg: SpectralConfig::default(),
            census_cfg: CensusConfig::default(),
            eigen_k: 2,
            reference: Mutex::new(BTreeMap::new()),
        }
    }

    /// Distance below which two configurations at the same g are one branch.
    pub fn merge_threshold(&self) -> T {
        let mesh = self.system.mesh();
        T::lit(1e-3) * mesh.outer_radius() * T::from_count(mesh.n_free_dofs()).sqrt()
    }

    /// The annular (reference) state at growth g: warm-started from the
    /// nearest cached value below, continued Newton-only so the symmetric
    /// branch is tracked through its instability.
    pub fn reference_at(&self, g: T) -> Result<(NodalField<T>, T), ContinuationError> {
        let key = g_key(g);
        if let Some(p) = self.reference.lock().expect("reference cache").get(&key) {
            return Ok((p.phi.clone(), p.energy));
        }
        let mesh = self.system.mesh().clone();
        let (mut phi, mut g_cur) = {
            let cache = self.reference.lock().expect("reference cache");
            match cache.range(..key).next_back() {
                Some((k, p)) => (p.phi.clone(), T::lit(*k as f64 / 1e9)),
                None => (NodalField::reference(&mesh), T::one()),
            }
        };
        // tracking steps no larger than 0.02 keep Newton in its basin
        let max_dg = T::lit(0.02);
        loop {
            let remaining = g - g_cur;
            let dg = remaining.abs().min(max_dg) * remaining.signum();
            g_cur += dg;
            if (g - g_cur).abs() < T::lit(1e-12) {
                g_cur = g;
            }
            let growth = GrowthField::new(g_cur)?;
            let mut problem = ElasticProblem::new(&self.system, growth);
            let run = newton_phase(&mut problem, phi.free_vector(&mesh), &self.solve_cfg, 0)?;
            phi = NodalField::from_free(&mesh, &run.x);
            if g_key(g_cur) == key {
                self.reference
                    .lock()
                    .expect("reference cache")
                    .insert(key, RefPoint { phi: phi.clone(), energy: run.energy });
                return Ok((phi, run.energy));
            }
        }
    }

    /// Per-step diagnostics at a converged configuration.
    pub fn diagnose(
        &self,
        g: T,
        phi: &NodalField<T>,
        energy: T,
        residual: T,
        converged: bool,
    ) -> Result<BranchStep<T>, ContinuationError> {
        let growth = GrowthField::new(g)?;
        let h = self.system.hessian(phi, &growth)?;
        let report =
            spectral_report(&h, self.eigen_k.max(1), self.system.mesh(), None, &self.spectral_cfg)?;
        let (ref_phi, ref_energy) = self.reference_at(g)?;
        let mesh = self.system.mesh();
        let distance = phi.distance(&ref_phi, mesh);
        let energy_ratio = (ref_energy != T::zero()).then(|| energy / ref_energy);
        let census = crease_census(phi, mesh, &self.census_cfg);
        // the branch's own pattern: circumferential mode of the displacement
        // from the annular state (falls back to the softest eigenmode)
        let displacement = phi.free_vector(mesh) - ref_phi.free_vector(mesh);
        let wavenumber = crate::spectral::mode_wavenumber(&displacement, mesh)
            .or(report.mode_wavenumbers[0]);
        Ok(BranchStep {
            g,
            phi: phi.clone(),
            energy,
            residual,
            converged,
            lambda_min: report.lambda_min(),
            lambda_max: report.lambda_max,
            classification: report.classification,
            wavenumber,
            distance,
            energy_ratio,
            crease_count: census.crease_count(),
            indentation_count: census.indentation_count(),
        })
    }

    /// Warm-started solve at g from a given configuration: Newton first (so
    /// saddle branches stay trackable), full two-phase solve as fallback.
    /// A stall with the residual stuck just above tolerance is almost always
    /// the near-zero rotational phase mode of a wrinkle family; a direct
    /// line search along the softest eigenvector settles that mode at a cost
    /// no descent iteration can match.
    pub fn resolve_from(&self, phi0: &NodalField<T>, g: T) -> Result<SolveResult<T>, SolveError> {
        let growth = GrowthField::new(g).expect("positive growth");
        let mesh = self.system.mesh().clone();
        let mut problem = ElasticProblem::new(&self.system, growth);
        let run = newton_phase(&mut problem, phi0.free_vector(&mesh), &self.solve_cfg, 0)?;
        let mut best = if run.converged {
            return Ok(SolveResult {
                phi: NodalField::from_free(&mesh, &run.x),
                residual_norm: run.residual_norm,
                energy: run.energy,
                gd_iters: 0,
                newton_iters: run.newton_iters,
                converged: true,
                trace: run.trace,
            });
        } else {
            optimizer::solve_elastic(&self.system, &growth, phi0, &self.solve_cfg)?
        };

        if !best.converged && best.residual_norm <= self.solve_cfg.tol * T::lit(1e4) {
            if let Ok(Some(better)) = self.deflated_newton(&best.phi, g) {
                if better.residual_norm < best.residual_norm {
                    best = better;
                }
            }
        }

        for round in 0..3 {
            if best.converged || best.residual_norm > self.solve_cfg.tol * T::lit(1e4) {
                break;
            }
            let mut candidates: Vec<NodalField<T>> = Vec::new();
            if let Ok(Some(settled)) = self.settle_soft_mode(&best.phi, g) {
                candidates.push(settled);
            }
            // multi-start along the softest mode: phase-pinned equilibria
            // often sit a finite nudge away while the stalled point refuses
            if let Ok(nudges) = self.soft_mode_nudges(&best.phi, g, round) {
                candidates.extend(nudges);
            }
            let mut improved = false;
            for cand in candidates {
                let run =
                    newton_phase(&mut problem, cand.free_vector(&mesh), &self.solve_cfg, 0)?;
                if run.residual_norm < best.residual_norm {
                    best = SolveResult {
                        phi: NodalField::from_free(&mesh, &run.x),
                        residual_norm: run.residual_norm,
                        energy: run.energy,
                        gd_iters: best.gd_iters,
                        newton_iters: best.newton_iters + run.newton_iters,
                        converged: run.converged,
                        trace: run.trace,
                    };
                    improved = true;
                }
                if best.converged {
                    break;
                }
            }
            if !improved {
                break;
            }
        }
        Ok(best)
    }

    /// Newton iteration with the softest eigenvector projected out of the
    /// step. A wrinkle family's phase mode is orders of magnitude softer
    /// than the physical modes, so the raw Hessian solve is free to wander
    /// along that near-null direction and out of the quadratic region; the
    /// deflated step converges the stiff components quadratically while the
    /// (already tiny) phase residual is left alone.
    fn deflated_newton(
        &self,
        phi0: &NodalField<T>,
        g: T,
    ) -> Result<Option<SolveResult<T>>, SolveError> {
        use crate::linalg::BandedLu;
        let growth = GrowthField::new(g).expect("positive growth");
        let mesh = self.system.mesh().clone();
        let mut phi = phi0.clone();
        let tol = self.solve_cfg.tol;
        let mut newton_iters = 0usize;
        let mut last_res = T::max_value().unwrap_or_else(T::one);
        for _ in 0..40 {
            let grad = match self.system.gradient(&phi, &growth) {
                Ok(gv) => gv,
                Err(_) => return Ok(None),
            };
            let res = grad.norm();
            if res <= tol {
                let energy = self.system.energy(&phi, &growth).map_err(|_| {
                    SolveError::InadmissibleStart("energy at converged state".into())
                })?;
                return Ok(Some(SolveResult {
                    phi,
                    residual_norm: res,
                    energy,
                    gd_iters: 0,
                    newton_iters,
                    converged: true,
                    trace: Vec::new(),
                }));
            }
            if res >= last_res * (T::one() - T::lit(1e-6)) && newton_iters > 2 {
                break;
            }
            last_res = res;
            let h = match self.system.hessian(&phi, &growth) {
                Ok(h) => h,
                Err(_) => return Ok(None),
            };
            let Ok((vals, vecs)) = smallest_k_eigenpairs(&h, 2, &self.spectral_cfg) else {
                return Ok(None);
            };
            let lu = BandedLu::factor(&h, T::zero())?;
            let mut delta = grad.clone();
            lu.solve_in_place(&mut delta);
            // one refinement pass
            let mut hd = nalgebra::DVector::zeros(delta.len());
            h.matvec(&delta, &mut hd);
            let mut corr = &grad - &hd;
            lu.solve_in_place(&mut corr);
            delta += corr;
            // deflate the isolated soft mode when its residual share is tiny
            let soft_isolated = vals[0].abs() < T::lit(0.02) * vals[1].abs();
            let phase_res = grad.dot(&vecs[0]).abs();
            if soft_isolated && phase_res < T::lit(0.2) * res {
                let c = vecs[0].dot(&delta);
                delta.axpy(-c, &vecs[0], T::one());
            }
            // backtrack on the residual
            let x = phi.free_vector(&mesh);
            let mut alpha = T::one();
            let mut accepted = false;
            for _ in 0..12 {
                let cand = NodalField::from_free(&mesh, &(&x - &delta * alpha));
                if let Ok(gv) = self.system.gradient(&cand, &growth) {
                    if gv.norm() < res {
                        phi = cand;
                        accepted = true;
                        break;
                    }
                }
                alpha *= T::lit(0.5);
            }
            if !accepted {
                break;
            }
            newton_iters += 1;
        }
        let grad = match self.system.gradient(&phi, &growth) {
            Ok(gv) => gv,
            Err(_) => return Ok(None),
        };
        let energy = match self.system.energy(&phi, &growth) {
            Ok(e) => e,
            Err(_) => return Ok(None),
        };
        let res = grad.norm();
        Ok(Some(SolveResult {
            phi,
            residual_norm: res,
            energy,
            gd_iters: 0,
            newton_iters,
            converged: res <= tol,
            trace: Vec::new(),
        }))
    }

    /// Candidate restart points at finite nudges along the softest
    /// eigenvector, for multi-start Newton polishing.
    fn soft_mode_nudges(
        &self,
        phi: &NodalField<T>,
        g: T,
        round: usize,
    ) -> Result<Vec<NodalField<T>>, SolveError> {
        let growth = GrowthField::new(g).expect("positive growth");
        let mesh = self.system.mesh().clone();
        let Ok(h) = self.system.hessian(phi, &growth) else { return Ok(Vec::new()) };
        let Ok((_, vecs)) = smallest_k_eigenpairs(&h, 1, &self.spectral_cfg) else {
            return Ok(Vec::new());
        };
        let x0 = phi.free_vector(&mesh);
        let amplitude = self
            .reference_at(g)
            .map(|(ref_phi, _)| phi.distance(&ref_phi, &mesh))
            .unwrap_or(T::zero());
        let scale = (self.merge_threshold() * T::lit(2.0))
            .max(amplitude * T::lit(0.08))
            * T::from_count(round + 1);
        Ok(vec![
            NodalField::from_free(&mesh, &(&x0 + &vecs[0] * scale)),
            NodalField::from_free(&mesh, &(&x0 - &vecs[0] * scale)),
        ])
    }

    /// One-dimensional energy minimization along the softest Hessian
    /// eigenvector; returns None when no interior improvement exists.
    fn settle_soft_mode(&self, phi: &NodalField<T>, g: T) -> Result<Option<NodalField<T>>, SolveError> {
        let growth = GrowthField::new(g).expect("positive growth");
        let mesh = self.system.mesh().clone();
        let h = match self.system.hessian(phi, &growth) {
            Ok(h) => h,
            Err(_) => return Ok(None),
        };
        let Ok((_, vecs)) = smallest_k_eigenpairs(&h, 1, &self.spectral_cfg) else {
            return Ok(None);
        };
        let v = &vecs[0];
        let x0 = phi.free_vector(&mesh);
        let e0 = match self.system.energy(phi, &growth) {
            Ok(e) => e,
            Err(_) => return Ok(None),
        };
        // the pinned minimum along a wrinkle family's phase circle can sit a
        // sector-rotation away, which scales with the branch amplitude
        let amplitude = self
            .reference_at(g)
            .map(|(ref_phi, _)| phi.distance(&ref_phi, &mesh))
            .unwrap_or(T::zero());
        let span = (self.merge_threshold() * T::lit(4.0)).max(amplitude * T::lit(0.35));
        let mut best_t = T::zero();
        let mut best_e = e0;
        let samples = 48;
        for i in 0..=samples {
            let t = span * (T::from_count(2 * i) / T::from_count(samples) - T::one());
            let phi_t = NodalField::from_free(&mesh, &(&x0 + v * t));
            if let Ok(e) = self.system.energy(&phi_t, &growth) {
                if e < best_e {
                    best_e = e;
                    best_t = t;
                }
            }
        }
        // golden-section refinement around the best sample
        let mut lo = best_t - span / T::from_count(samples / 2);
        let mut hi = best_t + span / T::from_count(samples / 2);
        for _ in 0..24 {
            let m1 = lo + (hi - lo) * T::lit(0.381_966);
            let m2 = hi - (hi - lo) * T::lit(0.381_966);
            let e1 = self
                .system
                .energy(&NodalField::from_free(&mesh, &(&x0 + v * m1)), &growth)
                .unwrap_or(best_e + T::one());
            let e2 = self
                .system
                .energy(&NodalField::from_free(&mesh, &(&x0 + v * m2)), &growth)
                .unwrap_or(best_e + T::one());
            if e1 < e2 {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let t = (lo + hi) * T::lit(0.5);
        if t == T::zero() {
            return Ok(None);
        }
        Ok(Some(NodalField::from_free(&mesh, &(&x0 + v * t))))
    }
}

/// Tracks one branch from `g_from` (the seed's growth value) toward `g_to`
/// in steps of `dg`. Stops early when the branch dies: the warm-started
/// solve lands on the annular branch, or the census signature jumps together
/// with a configuration jump. The collapse target is recorded so cascading
/// discovery can chain onto it.
pub fn continue_branch<T: Real>(
    ctx: &BranchContext<T>,
    seed: &SolveResult<T>,
    g_from: T,
    g_to: T,
    dg: T,
    label: &str,
) -> Result<BranchRecord<T>, ContinuationError> {
    assert!(dg != T::zero() && (g_to - g_from).signum() == dg.signum(), "dg sign mismatch");
    let mut record = BranchRecord {
        label: label.to_string(),
        steps: Vec::new(),
        birth_g: None,
        death_g: None,
        fallen_into: None,
        failure: None,
    };
    let first = ctx.diagnose(g_from, &seed.phi, seed.energy, seed.residual_norm, seed.converged)?;
    let merge_tol = ctx.merge_threshold();
    // the annular branch itself never "dies into" the reference
    let tracks_reference = first.distance < merge_tol;
    record.steps.push(first);

    let n_steps = ((g_to - g_from) / dg).as_f64().round() as usize;
    let mut recent_jumps: Vec<T> = Vec::new();
    for i in 1..=n_steps {
        let g = g_from + dg * T::from_count(i);
        let prev = record.steps.last().expect("seeded");
        let prev_phi = prev.phi.clone();
        let prev_sig = (prev.crease_count, prev.indentation_count);
        let result = match ctx.resolve_from(&prev_phi, g) {
            Ok(r) => r,
            Err(e) => {
                record.failure = Some(format!("solver failure at g = {:.6}: {e}", g.as_f64()));
                break;
            }
        };
        if !result.converged {
            record.failure = Some(format!(
                "no convergence at g = {:.6}: residual {:.3e}",
                g.as_f64(),
                result.residual_norm.as_f64()
            ));
            break;
        }
        let step = ctx.diagnose(g, &result.phi, result.energy, result.residual_norm, true)?;

        // death: collapsed onto the annular branch
        if !tracks_reference && step.distance < merge_tol {
            record.death_g = Some(prev.g);
            let (ref_phi, ref_energy) = ctx.reference_at(g)?;
            record.fallen_into =
                Some(FallenInto { g, phi: ref_phi, energy: ref_energy, into_reference: true });
            break;
        }
        // death: census signature jumped along with a configuration jump
        // far beyond the recent step-to-step movement of the branch
        let jump = step.phi.distance(&prev_phi, ctx.system.mesh());
        let recent = median(&recent_jumps).unwrap_or(T::zero());
        let jump_tol = merge_tol.max(recent * T::lit(5.0));
        if (step.crease_count, step.indentation_count) != prev_sig && jump > jump_tol {
            record.death_g = Some(prev.g);
            record.fallen_into = Some(FallenInto {
                g,
                phi: step.phi.clone(),
                energy: step.energy,
                into_reference: false,
            });
            break;
        }
        recent_jumps.push(jump);
        if recent_jumps.len() > 5 {
            recent_jumps.remove(0);
        }
        record.steps.push(step);
    }

    if record.steps.is_empty() {
        return Err(ContinuationError::EmptySchedule);
    }
    if dg < T::zero() {
        // backward continuation: a death on the low-g side is a birth bound
        record.birth_g = record.death_g.take().or(record.birth_g);
    }
    Ok(record)
}

/// Perturbs a converged state along a Hessian eigenvector and re-solves.
/// Within a near-degenerate eigenplane the requested in-plane angle selects
/// the direction; gamma is the 2-norm of the nodal perturbation.
pub fn perturb_and_search<T: Real>(
    ctx: &BranchContext<T>,
    base: &SolveResult<T>,
    spec: &PerturbationSpec<T>,
    g: T,
) -> Result<SolveResult<T>, ContinuationError> {
    if spec.gamma == T::zero() {
        return Ok(base.clone());
    }
    let growth = GrowthField::new(g)?;
    let mesh = ctx.system.mesh().clone();
    let h = ctx.system.hessian(&base.phi, &growth)?;
    let k = spec.eigen_index + 2;
    let (vals, vecs) = smallest_k_eigenpairs(&h, k, &ctx.spectral_cfg)?;
    if spec.eigen_index >= vecs.len() {
        return Err(ContinuationError::EigenIndexOutOfRange {
            index: spec.eigen_index,
            available: vecs.len(),
        });
    }
    let i = spec.eigen_index;
    let mut v = vecs[i].clone();
    // pair up with the partner of a rotationally-degenerate eigenplane
    let degenerate = i + 1 < vals.len()
        && (vals[i + 1] - vals[i]).abs() <= T::lit(1e-3) * vals[i].abs().max(T::lit(1e-12));
    if degenerate && spec.in_plane_angle_deg != T::zero() {
        let a = spec.in_plane_angle_deg * T::pi() / T::lit(180.0);
        v = &vecs[i] * a.cos() + &vecs[i + 1] * a.sin();
    }
    v.normalize_mut();
    let x0 = base.phi.free_vector(&mesh) + &v * spec.gamma;
    let phi0 = NodalField::from_free(&mesh, &x0);
    Ok(optimizer::solve_elastic(&ctx.system, &growth, &phi0, &ctx.solve_cfg)?)
}

/// Euclidean distance between two configurations over free DOFs.
pub fn distance_from<T: Real>(
    a: &NodalField<T>,
    b: &NodalField<T>,
    mesh: &crate::mesh::Mesh<T>,
) -> T {
    a.distance(b, mesh)
}

#[derive(Debug, Clone, Copy)]
pub struct PitchforkFit<T> {
    pub g_c: T,
    pub linear_coeff: T,
    pub quadratic_coeff: T,
}

/// Least-squares fit g = g_c + c1 d + c2 d^2 over branch-onset samples.
pub fn fit_pitchfork<T: Real>(points: &[(T, T)]) -> Result<PitchforkFit<T>, ContinuationError> {
    if points.len() < 4 {
        return Err(ContinuationError::DegenerateFit(points.len()));
    }
    let mut ata = nalgebra::Matrix3::<T>::zeros();
    let mut atb = nalgebra::Vector3::<T>::zeros();
    for &(g, d) in points {
        let row = nalgebra::Vector3::new(T::one(), d, d * d);
        ata += row * row.transpose();
        atb += row * g;
    }
    let sol = ata
        .try_inverse()
        .map(|inv| inv * atb)
        .ok_or(ContinuationError::DegenerateFit(points.len()))?;
    if !sol.iter().all(|v| v.is_finite()) {
        return Err(ContinuationError::DegenerateFit(points.len()));
    }
    Ok(PitchforkFit { g_c: sol[0], linear_coeff: sol[1], quadratic_coeff: sol[2] })
}

/// Walks the deformed inner boundary and classifies its indentations.
/// An indentation is a prominent local minimum of the radial distance; it is
/// a crease when the interior turning angle at the vertex is sharper than
/// the configured threshold.
pub fn crease_census<T: Real>(
    phi: &NodalField<T>,
    mesh: &crate::mesh::Mesh<T>,
    cfg: &CensusConfig<T>,
) -> Census {
    let ring = mesh.inner_ring_nodes();
    let n = ring.len();
    let mut census = Census { creases: Vec::new(), smooth: Vec::new() };
    if n < 4 {
        return census;
    }
    let rho: Vec<T> = ring.iter().map(|&k| phi.node(k).coords.norm()).collect();
    let mean = rho.iter().fold(T::zero(), |a, &b| a + b) / T::from_count(n);
    let hi = rho.iter().fold(T::min_value().unwrap_or_else(|| -T::one()), |a, &b| a.max(b));
    let lo = rho.iter().fold(T::max_value().unwrap_or_else(T::one), |a, &b| a.min(b));
    let relief = hi - lo;
    if relief <= cfg.relief_floor * mean {
        return census;
    }

    let prominence_min = cfg.prominence_frac * relief;
    for j in 0..n {
        let prev = rho[(j + n - 1) % n];
        let next = rho[(j + 1) % n];
        if !(rho[j] < prev && rho[j] < next) {
            continue;
        }
        // prominence: lowest barrier separating this minimum from a deeper one
        let mut left_barrier = T::zero();
        let mut cur = T::zero();
        for s in 1..n {
            let r = rho[(j + n - s) % n];
            cur = cur.max(r - rho[j]);
            if r < rho[j] {
                break;
            }
            left_barrier = cur;
        }
        let mut right_barrier = T::zero();
        cur = T::zero();
        for s in 1..n {
            let r = rho[(j + s) % n];
            cur = cur.max(r - rho[j]);
            if r < rho[j] {
                break;
            }
            right_barrier = cur;
        }
        if left_barrier.min(right_barrier) < prominence_min {
            continue;
        }
        let node = ring[j];
        let p = phi.node(node);
        let a = phi.node(ring[(j + n - 1) % n]) - p;
        let b = phi.node(ring[(j + 1) % n]) - p;
        let cosang = a.dot(&b) / (a.norm() * b.norm()).max(T::lit(1e-300));
        let angle_deg = cosang.clamp(-T::one(), T::one()).acos() * T::lit(180.0) / T::pi();
        if angle_deg < cfg.crease_angle_deg {
            census.creases.push(node);
        } else {
            census.smooth.push(node);
        }
    }
    census
}

/// The last growth value at which a backward-continued branch is distinct
/// from every other known branch; None when it stays distinct throughout.
pub fn detect_death<T: Real>(
    branch: &BranchRecord<T>,
    others: &[&BranchRecord<T>],
    mesh: &crate::mesh::Mesh<T>,
    merge_tol: T,
) -> Option<T> {
    if branch.death_g.is_some() || branch.birth_g.is_some() {
        return branch.death_g.or(branch.birth_g);
    }
    for step in branch.steps.iter().rev() {
        let merged = others.iter().any(|other| {
            other
                .step_at(step.g)
                .map(|o| o.phi.distance(&step.phi, mesh) < merge_tol)
                .unwrap_or(false)
        });
        if !merged {
            return branch.steps.last().map(|_| step.g);
        }
    }
    None
}

fn median<T: Real>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite jumps"));
    Some(v[v.len() / 2])
}

/// Per growth value, the converged non-saddle branch of least energy.
/// Marginal states count: wrinkle families carry a near-zero rotational
/// phase mode right after onset.
pub fn minimal_energy_path<T: Real>(
    branches: &[&BranchRecord<T>],
    g_grid: &[T],
) -> Vec<(T, String)> {
    let mut path = Vec::new();
    for &g in g_grid {
        let key = g_key(g);
        let mut best: Option<(T, &str)> = None;
        for branch in branches {
            for step in &branch.steps {
                if g_key(step.g) == key
                    && step.converged
                    && step.classification != Classification::Saddle
                    && best.map_or(true, |(e, _)| step.energy < e)
                {
                    best = Some((step.energy, &branch.label));
                }
            }
        }
        if let Some((_, label)) = best {
            path.push((g, label.to_string()));
        }
    }
    path
}

/// Stability label for a converged state from lambda_min and lambda_max.
pub fn classify_step<T: Real>(lambda_min: T, lambda_max: T, tol_rel: T) -> Classification {
    classify_value(lambda_min, tol_rel * lambda_max.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::MaterialParams;
    use crate::mesh::Mesh;
    use approx::assert_relative_eq;
    use nalgebra::Point2;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::sync::Arc;

    fn small_ctx(ratio: f64) -> BranchContext<f64> {
        let mesh = Arc::new(Mesh::<f64>::build_annulus(0.5, 1.0, 3, 12, 1).unwrap());
        let system = ElasticSystem::new(mesh, MaterialParams::from_stiffness_ratio(ratio).unwrap());
        BranchContext::new(system, SolveConfig::default())
    }

    fn circle_field(mesh: &Mesh<f64>, radii: impl Fn(f64) -> f64) -> NodalField<f64> {
        let mut x = NodalField::reference(mesh).free_vector(mesh);
        for &k in mesh.free_nodes() {
            let p = mesh.node(k);
            let theta = p.y.atan2(p.x);
            let r = p.coords.norm();
            let scale = radii(theta) / 0.5;
            let rr = if (r - 0.5).abs() < 1e-9 { 0.5 * scale } else { r };
            let base = mesh.free_dof(k).unwrap();
            x[base] = rr * theta.cos();
            x[base + 1] = rr * theta.sin();
        }
        NodalField::from_free(mesh, &x)
    }

    #[test]
    fn distance_basics() {
        let ctx = small_ctx(1.0);
        let mesh = ctx.system.mesh();
        let a = NodalField::reference(mesh);
        assert_eq!(a.distance(&a, mesh), 0.0);
        let mut x = a.free_vector(mesh);
        x[0] += 3.0;
        x[1] += 4.0;
        let b = NodalField::from_free(mesh, &x);
        assert_relative_eq!(a.distance(&b, mesh), 5.0, epsilon = 1e-15);
    }

    #[test]
    fn pitchfork_fit_recovers_synthetic_inverse() {
        // d = sqrt(g - 1.261)  =>  g = 1.261 + d^2
        let points: Vec<(f64, f64)> =
            (1..12).map(|i| 1.261 + (i as f64 * 0.003)).map(|g| (g, (g - 1.261).sqrt())).collect();
        let fit = fit_pitchfork(&points).unwrap();
        assert_relative_eq!(fit.g_c, 1.261, epsilon = 1e-10);
        assert!(fit.linear_coeff.abs() < 1e-9);
        assert_relative_eq!(fit.quadratic_coeff, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn pitchfork_fit_is_exact_on_quadratic_data_and_robust_to_noise() {
        let (gc, c1, c2) = (1.47, 0.013, 2.4);
        let clean: Vec<(f64, f64)> = (0..10)
            .map(|i| {
                let d = 0.01 + i as f64 * 0.015;
                (gc + c1 * d + c2 * d * d, d)
            })
            .collect();
        let fit = fit_pitchfork(&clean).unwrap();
        assert_relative_eq!(fit.g_c, gc, epsilon = 1e-12);
        assert_relative_eq!(fit.linear_coeff, c1, epsilon = 1e-10);
        assert_relative_eq!(fit.quadratic_coeff, c2, epsilon = 1e-9);

        // Monte-Carlo noise check: g_c recovered within 1e-3 at sigma = 1e-4
        let mut rng = StdRng::seed_from_u64(99);
        for _ in 0..20 {
            let noisy: Vec<(f64, f64)> = clean
                .iter()
                .map(|&(g, d)| (g + rng.random_range(-1e-4..1e-4), d))
                .collect();
            let fit = fit_pitchfork(&noisy).unwrap();
            assert!((fit.g_c - gc).abs() < 1e-3, "gc off: {}", fit.g_c);
        }
    }

    #[test]
    fn pitchfork_fit_rejects_degenerate_input() {
        assert!(matches!(
            fit_pitchfork(&[(1.0f64, 0.1), (1.1, 0.2), (1.2, 0.3)]),
            Err(ContinuationError::DegenerateFit(3))
        ));
        // collinear in d (all same amplitude): singular normal equations
        let bad: Vec<(f64, f64)> = (0..6).map(|i| (1.0 + i as f64 * 0.01, 0.25)).collect();
        assert!(fit_pitchfork(&bad).is_err());
    }

    #[test]
    fn census_on_circle_and_synthetic_wrinkles() {
        let mesh = Arc::new(Mesh::<f64>::build_annulus(0.5, 1.0, 3, 48, 1).unwrap());
        let cfg = CensusConfig::default();

        let circle = NodalField::reference(&mesh);
        let c = crease_census(&circle, &mesh, &cfg);
        assert_eq!(c.signature(), (0, 0));

        // five smooth indentations
        let sys_mesh = mesh.clone();
        let wavy = circle_field(&sys_mesh, |t| 0.5 + 0.03 * (5.0 * t).cos());
        let c = crease_census(&wavy, &mesh, &cfg);
        assert_eq!(c.signature(), (0, 5), "creases {:?} smooth {:?}", c.creases, c.smooth);
    }

    #[test]
    fn census_flags_sharp_notches_as_creases() {
        let mesh = Arc::new(Mesh::<f64>::build_annulus(0.5, 1.0, 3, 48, 1).unwrap());
        // two opposing sharp notches: pull two nodes strongly inward
        let mut x = NodalField::reference(&mesh).free_vector(&mesh);
        for &j in &[0usize, 24] {
            let node = mesh.inner_ring_nodes()[j];
            let base = mesh.free_dof(node).unwrap();
            let p = mesh.node(node);
            x[base] = 0.30 * p.x / 0.5;
            x[base + 1] = 0.30 * p.y / 0.5;
        }
        let notched = NodalField::from_free(&mesh, &x);
        let c = crease_census(&notched, &mesh, &CensusConfig::default());
        assert_eq!(c.signature(), (2, 2), "creases {:?} smooth {:?}", c.creases, c.smooth);
    }

    #[test]
    fn reference_branch_distance_is_zero_and_minimizer_along_schedule() {
        let ctx = small_ctx(0.1);
        let (phi, energy) = ctx.reference_at(1.05).unwrap();
        let growth = GrowthField::new(1.05).unwrap();
        let grad = ctx.system.gradient(&phi, &growth).unwrap();
        assert!(grad.norm() <= 1e-7);
        let seed = SolveResult {
            phi,
            residual_norm: grad.norm(),
            energy,
            gd_iters: 0,
            newton_iters: 0,
            converged: true,
            trace: vec![],
        };
        let rec = continue_branch(&ctx, &seed, 1.05, 1.12, 0.01, "s0").unwrap();
        assert_eq!(rec.steps.len(), 8);
        for step in &rec.steps {
            assert!(step.converged);
            assert!(step.distance < 1e-9, "d = {}", step.distance);
            assert_eq!(step.classification, Classification::LocalMinimizer);
            assert_eq!(step.energy_ratio.map(|r| (r - 1.0).abs() < 1e-9), Some(true));
        }
        assert!(rec.death_g.is_none());
    }

    #[test]
    fn gamma_zero_perturbation_returns_base() {
        let ctx = small_ctx(0.4);
        let (phi, energy) = ctx.reference_at(1.1).unwrap();
        let base = SolveResult {
            phi,
            residual_norm: 0.0,
            energy,
            gd_iters: 0,
            newton_iters: 0,
            converged: true,
            trace: vec![],
        };
        let spec = PerturbationSpec::new(0, 0.0);
        let out = perturb_and_search(&ctx, &base, &spec, 1.1).unwrap();
        assert_eq!(out.phi, base.phi);
    }

    #[test]
    fn minimal_energy_path_prefers_lowest_minimizer() {
        let mesh = Arc::new(Mesh::<f64>::build_annulus(0.5, 1.0, 2, 6, 1).unwrap());
        let phi = NodalField::reference(&mesh);
        let mk = |label: &str, g: f64, e: f64, class: Classification| BranchRecord {
            label: label.into(),
            steps: vec![BranchStep {
                g,
                phi: phi.clone(),
                energy: e,
                residual: 0.0,
                converged: true,
                lambda_min: if class == Classification::LocalMinimizer { 1.0 } else { -1.0 },
                lambda_max: 1.0,
                classification: class,
                wavenumber: None,
                distance: 0.0,
                energy_ratio: None,
                crease_count: 0,
                indentation_count: 0,
            }],
            birth_g: None,
            death_g: None,
            fallen_into: None,
            failure: None,
        };
        let a = mk("a", 1.5, 2.0, Classification::LocalMinimizer);
        let b = mk("b", 1.5, 1.0, Classification::LocalMinimizer);
        let s = mk("s", 1.5, 0.5, Classification::Saddle);
        let path = minimal_energy_path(&[&a, &b, &s], &[1.5]);
        assert_eq!(path, vec![(1.5, "b".to_string())]);
        // single branch: that branch everywhere it exists
        let path = minimal_energy_path(&[&a], &[1.5]);
        assert_eq!(path, vec![(1.5, "a".to_string())]);
    }

    #[test]
    fn census_ignores_node_order_permutations() {
        // from_parts with shuffled interior tags must not crash the census
        let mesh = Arc::new(Mesh::<f64>::build_annulus(0.5, 1.0, 2, 16, 1).unwrap());
        let phi = NodalField::reference(&mesh);
        let c = crease_census(&phi, &mesh, &CensusConfig::default());
        assert_eq!(c.signature(), (0, 0));
        let _unused: Vec<Point2<f64>> = phi.coords().to_vec();
    }
}
