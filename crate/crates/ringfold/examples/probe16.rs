// dev scratch: dissect the 1.5018 stall
use ringfold::assembly::{GrowthField, NodalField};
use ringfold::experiments::context_for;
use ringfold::io::config::RunConfig;
use ringfold::optimizer::*;
use ringfold::spectral::{smallest_k_eigenpairs, SpectralConfig};
use ringfold::continuation::continue_branch;
use std::path::Path;

fn main() {
    let mut cfg = RunConfig::default();
    cfg.material.stiffness_ratio = 0.1;
    let mut ctx = context_for(&cfg, 0.1).unwrap();
    ctx.solve_cfg = SolveConfig { max_iter_gd: 50_000, ..ctx.solve_cfg };
    let mesh = ctx.system.mesh().clone();
    let (_, _, phi) =
        ringfold::io::read_checkpoint(Path::new("/root/notes/case1/s5_g1.4618.ckpt"), &mesh).unwrap();
    // walk to 1.4918 via the (now working) continuation
    let seed = ctx.resolve_from(&phi, 1.4617958984375001).unwrap();
    let rec = continue_branch(&ctx, &seed, 1.4617958984375001, 1.4918, 0.01, "s5").unwrap();
    let last = rec.steps.last().unwrap().phi.clone();
    println!("at 1.4918, walking to 1.5018");

    let g = 1.501796;
    let growth = GrowthField::new(g).unwrap();
    let mut problem = ElasticProblem::new(&ctx.system, growth);
    let gd_cfg = SolveConfig { max_iter_gd: 30_000, trace_every: 2000, ..Default::default() };
    let run = gradient_descent_phase(&mut problem, last.free_vector(&mesh), &gd_cfg).unwrap();
    println!("gd: iters={} res={:.3e}", run.gd_iters, run.residual_norm);
    for s in run.trace.iter().rev().take(6) {
        println!("  iter={} res={:.3e} E={:.10} step={:.3e}", s.iter, s.residual, s.energy, s.step);
    }
    let nr = newton_phase(&mut problem, run.x.clone(), &gd_cfg, 0).unwrap();
    println!("newton: iters={} res={:.3e}", nr.newton_iters, nr.residual_norm);
    for s in nr.trace.iter().take(8) {
        println!("  res={:.3e} step={:.2e}", s.residual, s.step);
    }
    let phi_n = NodalField::from_free(&mesh, &nr.x);
    let h = ctx.system.hessian(&phi_n, &growth).unwrap();
    let (vals, vecs) = smallest_k_eigenpairs(&h, 3, &SpectralConfig::default()).unwrap();
    let grad = ctx.system.gradient(&phi_n, &growth).unwrap();
    println!("lmin: {:?}", vals.iter().map(|v| format!("{v:+.2e}")).collect::<Vec<_>>());
    for (i, v) in vecs.iter().enumerate() {
        println!("  g.v{i} = {:+.2e}", grad.dot(v));
    }
}
