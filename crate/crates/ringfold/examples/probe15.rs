// dev scratch: landscape along the softest mode at a stalled state
use ringfold::assembly::{GrowthField, NodalField};
use ringfold::experiments::context_for;
use ringfold::io;
use ringfold::io::config::RunConfig;
use ringfold::optimizer::{newton_phase, ElasticProblem, SolveConfig};
use ringfold::spectral::{smallest_k_eigenpairs, SpectralConfig};
use std::path::Path;

fn main() {
    let mut cfg = RunConfig::default();
    cfg.material.stiffness_ratio = 0.1;
    let ctx = context_for(&cfg, 0.1).unwrap();
    let mesh = ctx.system.mesh().clone();
    let (_, _, phi) = io::read_checkpoint(Path::new("/root/notes/case1/s5_g1.4618.ckpt"), &mesh).unwrap();
    let g = 1.471796;
    let growth = GrowthField::new(g).unwrap();

    // run the plain two-phase solve to the stall
    let run = ringfold::optimizer::solve_elastic(&ctx.system, &growth,
        &phi, &SolveConfig { max_iter_gd: 20_000, ..Default::default() }).unwrap();
    println!("stalled: conv={} res={:.4e} E={:.8}", run.converged, run.residual_norm, run.energy);

    let h = ctx.system.hessian(&run.phi, &growth).unwrap();
    let (vals, vecs) = smallest_k_eigenpairs(&h, 4, &SpectralConfig::default()).unwrap();
    println!("smallest: {:?}", vals.iter().map(|v| format!("{v:+.3e}")).collect::<Vec<_>>());
    let grad = ctx.system.gradient(&run.phi, &growth).unwrap();
    for (i, v) in vecs.iter().enumerate() {
        println!("  component of residual along v{i}: {:+.3e}", grad.dot(v));
    }
    let x0 = run.phi.free_vector(&mesh);
    let e0 = run.energy;
    for &span in &[0.2f64, 0.8] {
        let prof: Vec<String> = (-6..=6)
            .map(|i| {
                let t = span * i as f64 / 6.0;
                let e = ctx.system.energy(&NodalField::from_free(&mesh, &(&x0 + &vecs[0] * t)), &growth)
                    .map(|e| (e - e0) / e0.abs())
                    .unwrap_or(f64::NAN);
                format!("{:+.2e}", e)
            })
            .collect();
        println!("dE/E along v0, span {span}: {}", prof.join(" "));
    }
    // what does Newton do from a nudged point?
    for t in [0.05f64, -0.05, 0.2, -0.2] {
        let mut problem = ElasticProblem::new(&ctx.system, growth);
        let nr = newton_phase(&mut problem, &x0 + &vecs[0] * t, &SolveConfig::default(), 0).unwrap();
        println!("newton from t={t}: conv={} res={:.3e} moved={:.4}", nr.converged, nr.residual_norm,
            (&nr.x - &x0).norm());
    }
}
