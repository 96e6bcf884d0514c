// dev scratch: why does case-1 s5 stop at 1.4618?
use ringfold::continuation::continue_branch;
use ringfold::experiments::context_for;
use ringfold::io;
use ringfold::io::config::RunConfig;
use ringfold::optimizer::SolveConfig;
use std::path::Path;

fn main() {
    let mut cfg = RunConfig::default();
    cfg.material.stiffness_ratio = 0.1;
    let mut ctx = context_for(&cfg, 0.1).unwrap();
    ctx.solve_cfg = SolveConfig { max_iter_gd: 50_000, ..ctx.solve_cfg };
    let mesh = ctx.system.mesh().clone();
    let (_, g0, phi) = io::read_checkpoint(Path::new("/root/notes/case1/s5_g1.4618.ckpt"), &mesh).unwrap();
    let seed = ctx.resolve_from(&phi, g0).unwrap();
    println!("seed re-solved at {g0}: conv={} res={:.2e}", seed.converged, seed.residual_norm);
    let rec = continue_branch(&ctx, &seed, g0, 1.55, 0.01, "s5").unwrap();
    for s in &rec.steps {
        println!("g={:.4} m={:?} lmin={:+.3e} {:?} d={:.4} census=({},{}) conv={}",
            s.g, s.wavenumber, s.lambda_min, s.classification, s.distance,
            s.crease_count, s.indentation_count, s.converged);
    }
    println!("death={:?} birth={:?} failure={:?}", rec.death_g, rec.birth_g, rec.failure);
}
