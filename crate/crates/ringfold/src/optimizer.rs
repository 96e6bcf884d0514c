//! Two-phase energy minimization: incremental energy-stable steepest descent
//! followed by Newton iterations.
//!
//! Gradient descent uses the spectral step-size rules
//!
//! ```text
//! ds_stable = 2 / lambda_max          (energy stability)
//! ds_opt    = 2 / (lambda_max + lambda_min)   (fastest linear rate)
//! ds        = safety * min(ds_opt, ds_stable)
//! ```
//!
//! with eigenvalue estimates refreshed every `eig_refresh_interval`
//! iterations by a short warm-started Lanczos sweep; the safety factor plus
//! an explicit energy-monotonicity check absorb estimate staleness. Steps
//! that would invert an element (or raise the energy beyond round-off slack)
//! are halved and retried. Newton solves the symmetric-indefinite system
//! with a banded pivoted LU, so it converges to saddle points as readily as
//! to minimizers; that is intentional and is what the branch tooling relies
//! on.
//!
//! The solver is deterministic: fixed reduction orders, deterministic
//! Lanczos seeds, no entropy anywhere.

use nalgebra::DVector;
use thiserror::Error;

use crate::assembly::{ElasticSystem, GrowthField, NodalField};
use crate::linalg::{lanczos, seed_vector, BandedLu, LinalgError, SymCsr};
use crate::scalar::Real;

/// Evaluation failure inside the optimizer: the trial point is outside the
/// admissible set (an element inverted). The step is rejected and halved.
#[derive(Debug, Clone)]
pub struct Inadmissible(pub String);

/// An energy landscape over a free-DOF vector. Implemented by the elastic
/// system and by synthetic test problems.
pub trait EnergyProblem<T> {
    fn dim(&self) -> usize;
    fn energy(&mut self, x: &DVector<T>) -> Result<T, Inadmissible>;
    /// Returns the energy and fills `grad`.
    fn energy_and_gradient(
        &mut self,
        x: &DVector<T>,
        grad: &mut DVector<T>,
    ) -> Result<T, Inadmissible>;
    fn hessian(&mut self, x: &DVector<T>) -> Result<SymCsr<T>, Inadmissible>;
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("initial guess is inadmissible: {0}")]
    InadmissibleStart(String),
    #[error("step rejected after {halvings} halvings at iteration {iter}: {detail}")]
    PersistentRejection { iter: usize, halvings: usize, detail: String },
    #[error("Newton linear solve failed: {0}")]
    NewtonSolve(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    GradientDescent,
    Newton,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Phase::GradientDescent => write!(f, "gd"),
            Phase::Newton => write!(f, "newton"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TraceSample<T> {
    pub iter: usize,
    pub phase: Phase,
    pub residual: T,
    pub energy: T,
    pub step: T,
}

#[derive(Debug, Clone)]
pub struct SolveConfig<T> {
    /// Residual (force) tolerance on the gradient 2-norm.
    pub tol: T,
    pub max_iter_gd: usize,
    pub max_iter_newton: usize,
    /// Extreme-eigenvalue refresh period during gradient descent.
    pub eig_refresh_interval: usize,
    /// Multiplier in (0, 1] on the chosen step, absorbing estimate staleness.
    pub step_safety: T,
    /// Displacement bound used when the Hessian is not positive
    /// semi-definite anywhere: the fallback step keeps |dx| at this length.
    pub fallback_step_len: T,
    /// Maximum step halvings before a hard failure.
    pub max_halvings: usize,
    /// Relative slack allowed on per-step energy increase (round-off).
    pub monotonicity_slack: T,
    /// Lanczos subspace dimension for the step-size estimates.
    pub lanczos_dim: usize,
    /// Keep every n-th iteration in the trace (the last is always kept).
    pub trace_every: usize,
}

impl<T: Real> Default for SolveConfig<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-7),
            max_iter_gd: 10_000,
            max_iter_newton: 30,
            eig_refresh_interval: 50,
            step_safety: T::lit(0.9),
            fallback_step_len: T::lit(1e-3),
            max_halvings: 60,
            monotonicity_slack: T::lit(1e-12),
            lanczos_dim: 40,
            trace_every: 1,
        }
    }
}

/// Energy-stable step: 2/lambda_max when the Hessian has positive curvature,
/// otherwise the caller-supplied incremental fallback.
pub fn stable_step<T: Real>(lambda_max: T, fallback: T) -> T {
    if lambda_max > T::zero() {
        T::lit(2.0) / lambda_max
    } else {
        fallback
    }
}

/// Fastest first-order step 2/(lambda_max + lambda_min), meaningful in the
/// positive semi-definite regime; `None` signals the caller to use the
/// stable rule only.
pub fn optimal_step<T: Real>(lambda_max: T, lambda_min: T) -> Option<T> {
    let s = lambda_max + lambda_min;
    if s > T::zero() {
        Some(T::lit(2.0) / s)
    } else {
        None
    }
}

/// Outcome of a solve on a generic free-DOF vector.
#[derive(Debug, Clone)]
pub struct OptimRun<T: nalgebra::Scalar> {
    pub x: DVector<T>,
    pub residual_norm: T,
    pub energy: T,
    pub gd_iters: usize,
    pub newton_iters: usize,
    pub converged: bool,
    pub trace: Vec<TraceSample<T>>,
}

struct GdState<T: nalgebra::Scalar> {
    lambda_min: T,
    lambda_max: T,
    warm: Option<DVector<T>>,
    since_refresh: usize,
    refresh_now: bool,
}

fn refresh_spectrum<T: Real, P: EnergyProblem<T>>(
    problem: &mut P,
    x: &DVector<T>,
    cfg: &SolveConfig<T>,
    st: &mut GdState<T>,
) -> Result<(), SolveError> {
    let h = problem
        .hessian(x)
        .map_err(|e| SolveError::InadmissibleStart(format!("hessian at admissible point: {}", e.0)))?;
    let v0 = st.warm.clone().unwrap_or_else(|| seed_vector(h.n(), 17));
    let run = lanczos(&mut (&h), &v0, cfg.lanczos_dim);
    let (theta, s) = run.ritz();
    st.lambda_min = theta[0];
    st.lambda_max = *theta.last().expect("nonempty ritz set");
    st.warm = Some(run.assemble(s.column(theta.len() - 1)));
    st.since_refresh = 0;
    st.refresh_now = false;
    Ok(())
}

/// Gradient-descent phase of Algorithm 1. Stops at the residual tolerance or
/// the iteration cap; the returned `converged` reflects the residual only.
pub fn gradient_descent_phase<T: Real, P: EnergyProblem<T>>(
    problem: &mut P,
    x0: DVector<T>,
    cfg: &SolveConfig<T>,
) -> Result<OptimRun<T>, SolveError> {
    let n = x0.len();
    let mut x = x0;
    let mut grad = DVector::zeros(n);
    let mut energy = problem
        .energy_and_gradient(&x, &mut grad)
        .map_err(|e| SolveError::InadmissibleStart(e.0))?;
    let mut residual = grad.norm();
    let mut trace = Vec::new();
    trace.push(TraceSample {
        iter: 0,
        phase: Phase::GradientDescent,
        residual,
        energy,
        step: T::zero(),
    });

    let mut st = GdState {
        lambda_min: T::zero(),
        lambda_max: T::zero(),
        warm: None,
        since_refresh: 0,
        refresh_now: true,
    };

    let mut iter = 0usize;
    let mut x_new = DVector::zeros(n);
    let mut grad_new = DVector::zeros(n);
    while residual > cfg.tol && iter < cfg.max_iter_gd {
        if st.refresh_now || st.since_refresh >= cfg.eig_refresh_interval {
            refresh_spectrum(problem, &x, cfg, &mut st)?;
        }

        let fallback = cfg.fallback_step_len / residual;
        let ds_stable = stable_step(st.lambda_max, fallback);
        let mut ds = match optimal_step(st.lambda_max, st.lambda_min) {
            Some(opt) => opt.min(ds_stable),
            None => ds_stable,
        } * cfg.step_safety;

        let mut halvings = 0usize;
        let energy_new = loop {
            x_new.copy_from(&x);
            x_new.axpy(-ds, &grad, T::one());
            match problem.energy_and_gradient(&x_new, &mut grad_new) {
                Ok(e_new) if e_new <= energy + cfg.monotonicity_slack * energy.abs() => {
                    break e_new;
                }
                outcome => {
                    halvings += 1;
                    if halvings > cfg.max_halvings {
                        let detail = match outcome {
                            Err(e) => e.0,
                            Ok(e_new) => format!(
                                "energy would increase from {:.6e} to {:.6e}",
                                energy.as_f64(),
                                e_new.as_f64()
                            ),
                        };
                        return Err(SolveError::PersistentRejection { iter, halvings, detail });
                    }
                    ds *= T::lit(0.5);
                    // a rejected stable step means the spectrum estimate is stale
                    st.refresh_now = true;
                }
            }
        };

        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut grad, &mut grad_new);
        energy = energy_new;
        residual = grad.norm();
        iter += 1;
        st.since_refresh += 1;
        if iter % cfg.trace_every.max(1) == 0 || residual <= cfg.tol || iter == cfg.max_iter_gd {
            trace.push(TraceSample {
                iter,
                phase: Phase::GradientDescent,
                residual,
                energy,
                step: ds,
            });
        }
    }

    Ok(OptimRun {
        x,
        residual_norm: residual,
        energy,
        gd_iters: iter,
        newton_iters: 0,
        converged: residual <= cfg.tol,
        trace,
    })
}

/// Newton phase of Algorithm 1: full steps through a banded pivoted LU of
/// the (possibly indefinite) Hessian, halved only if a step would invert an
/// element. Converges to saddles as readily as to minimizers.
pub fn newton_phase<T: Real, P: EnergyProblem<T>>(
    problem: &mut P,
    x0: DVector<T>,
    cfg: &SolveConfig<T>,
    iter_offset: usize,
) -> Result<OptimRun<T>, SolveError> {
    let n = x0.len();
    let mut x = x0;
    let mut grad = DVector::zeros(n);
    let mut energy = problem
        .energy_and_gradient(&x, &mut grad)
        .map_err(|e| SolveError::InadmissibleStart(e.0))?;
    let mut residual = grad.norm();
    let mut trace = Vec::new();

    let mut iters = 0usize;
    let mut x_new = DVector::zeros(n);
    let mut grad_new = DVector::zeros(n);
    while residual > cfg.tol && iters < cfg.max_iter_newton {
        let h = problem
            .hessian(&x)
            .map_err(|e| SolveError::InadmissibleStart(format!("hessian: {}", e.0)))?;

        // Backtrack on the residual norm; escalate to a small ridge when
        // plain Newton refuses. Near-degenerate states (the rotational phase
        // mode of a wrinkle family is almost a zero mode) make the raw step
        // jump along the flat direction and out of the basin; shrinking
        // until the residual drops keeps the iteration local, and the ridge
        // tames the flat-mode amplification without disturbing convergence
        // to saddles.
        let hnorm = h.inf_norm();
        let mut ridge = T::zero();
        let mut rounds = 0usize;
        #[allow(unused_assignments)]
        let mut step_taken = T::one();
        let accepted: Option<T> = 'rounds: loop {
            let lu = BandedLu::factor(&h, -ridge)?;
            let mut delta = grad.clone();
            lu.solve_in_place(&mut delta);
            // two rounds of iterative refinement: the Hessian condition
            // number near marginal states puts the raw solve error at the
            // solver tolerance itself
            let mut hd = DVector::zeros(delta.len());
            for _ in 0..2 {
                h.matvec(&delta, &mut hd);
                if ridge != T::zero() {
                    hd.axpy(ridge, &delta, T::one());
                }
                let mut corr = &grad - &hd;
                lu.solve_in_place(&mut corr);
                delta += corr;
            }
            let mut alpha = T::one();
            let mut last_err: Option<Inadmissible> = None;
            for _ in 0..10 {
                x_new.copy_from(&x);
                x_new.axpy(-alpha, &delta, T::one());
                match problem.energy_and_gradient(&x_new, &mut grad_new) {
                    Ok(e_new)
                        if grad_new.norm() <= residual * (T::one() - T::lit(1e-4) * alpha) =>
                    {
                        step_taken = alpha;
                        break 'rounds Some(e_new);
                    }
                    Ok(_) => {}
                    Err(e) => last_err = Some(e),
                }
                alpha *= T::lit(0.5);
            }
            rounds += 1;
            if rounds > 4 {
                // residual refuses to drop: take the plain full step if it
                // is admissible and let the outer loop decide
                let lu = BandedLu::factor(&h, T::zero())?;
                let mut delta = grad.clone();
                lu.solve_in_place(&mut delta);
                x_new.copy_from(&x);
                x_new.axpy(-T::one(), &delta, T::one());
                match problem.energy_and_gradient(&x_new, &mut grad_new) {
                    Ok(e_new) => {
                        step_taken = T::one();
                        break 'rounds Some(e_new);
                    }
                    Err(e) => {
                        return Err(SolveError::PersistentRejection {
                            iter: iter_offset + iters,
                            halvings: rounds * 10,
                            detail: last_err.map(|p| p.0).unwrap_or(e.0),
                        })
                    }
                }
            }
            ridge = if ridge == T::zero() { hnorm * T::lit(1e-8) } else { ridge * T::lit(16.0) };
        };
        let energy_new = accepted.expect("loop breaks with a value");

        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut grad, &mut grad_new);
        energy = energy_new;
        residual = grad.norm();
        iters += 1;
        trace.push(TraceSample {
            iter: iter_offset + iters,
            phase: Phase::Newton,
            residual,
            energy,
            step: step_taken,
        });
    }

    Ok(OptimRun {
        x,
        residual_norm: residual,
        energy,
        gd_iters: 0,
        newton_iters: iters,
        converged: residual <= cfg.tol,
        trace,
    })
}

/// Algorithm 1: gradient descent, then Newton. The convergence flag is
/// re-verified with an independent gradient evaluation at the final point.
pub fn solve<T: Real, P: EnergyProblem<T>>(
    problem: &mut P,
    x0: DVector<T>,
    cfg: &SolveConfig<T>,
) -> Result<OptimRun<T>, SolveError> {
    let gd = gradient_descent_phase(problem, x0, cfg)?;
    let mut nt = newton_phase(problem, gd.x, cfg, gd.gd_iters)?;

    // independent convergence certificate
    let mut grad = DVector::zeros(nt.x.len());
    let energy = problem
        .energy_and_gradient(&nt.x, &mut grad)
        .map_err(|e| SolveError::InadmissibleStart(e.0))?;
    let residual = grad.norm();

    let mut trace = gd.trace;
    trace.extend(nt.trace.drain(..));
    Ok(OptimRun {
        x: nt.x,
        residual_norm: residual,
        energy,
        gd_iters: gd.gd_iters,
        newton_iters: nt.newton_iters,
        converged: residual <= cfg.tol,
        trace,
    })
}

/// Converged configuration of an elastic solve, with its trace.
#[derive(Debug, Clone)]
pub struct SolveResult<T: nalgebra::Scalar> {
    pub phi: NodalField<T>,
    pub residual_norm: T,
    pub energy: T,
    pub gd_iters: usize,
    pub newton_iters: usize,
    pub converged: bool,
    pub trace: Vec<TraceSample<T>>,
}

/// The elastic system viewed as an [`EnergyProblem`] over free DOFs.
pub struct ElasticProblem<'a, T: nalgebra::Scalar> {
    system: &'a ElasticSystem<T>,
    growth: GrowthField<T>,
    field: NodalField<T>,
}

impl<'a, T: Real> ElasticProblem<'a, T> {
    pub fn new(system: &'a ElasticSystem<T>, growth: GrowthField<T>) -> Self {
        let field = NodalField::reference(system.mesh());
        Self { system, growth, field }
    }
}

impl<'a, T: Real> EnergyProblem<T> for ElasticProblem<'a, T> {
    fn dim(&self) -> usize {
        self.system.n_free_dofs()
    }

    fn energy(&mut self, x: &DVector<T>) -> Result<T, Inadmissible> {
        self.field.set_free(self.system.mesh(), x);
        self.system.energy(&self.field, &self.growth).map_err(|e| Inadmissible(e.to_string()))
    }

    fn energy_and_gradient(
        &mut self,
        x: &DVector<T>,
        grad: &mut DVector<T>,
    ) -> Result<T, Inadmissible> {
        self.field.set_free(self.system.mesh(), x);
        self.system
            .energy_and_gradient(&self.field, &self.growth, grad)
            .map_err(|e| Inadmissible(e.to_string()))
    }

    fn hessian(&mut self, x: &DVector<T>) -> Result<SymCsr<T>, Inadmissible> {
        self.field.set_free(self.system.mesh(), x);
        self.system.hessian(&self.field, &self.growth).map_err(|e| Inadmissible(e.to_string()))
    }
}

/// Runs Algorithm 1 on the elastic system from the nodal guess `phi0`.
pub fn solve_elastic<T: Real>(
    system: &ElasticSystem<T>,
    growth: &GrowthField<T>,
    phi0: &NodalField<T>,
    cfg: &SolveConfig<T>,
) -> Result<SolveResult<T>, SolveError> {
    let mut problem = ElasticProblem::new(system, *growth);
    let x0 = phi0.free_vector(system.mesh());
    let run = solve(&mut problem, x0, cfg)?;
    Ok(SolveResult {
        phi: NodalField::from_free(system.mesh(), &run.x),
        residual_norm: run.residual_norm,
        energy: run.energy,
        gd_iters: run.gd_iters,
        newton_iters: run.newton_iters,
        converged: run.converged,
        trace: run.trace,
    })
}
