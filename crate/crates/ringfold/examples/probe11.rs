// dev scratch: why does the first-born case-2 family truncate?
use ringfold::continuation::continue_branch;
use ringfold::experiments::*;
use ringfold::io::config::RunConfig;
use ringfold::optimizer::SolveConfig;

fn main() {
    let mut cfg = RunConfig::default();
    cfg.material.stiffness_ratio = 0.4;
    let mut ctx = context_for(&cfg, 0.4).unwrap();
    ctx.solve_cfg = SolveConfig { max_iter_gd: 30_000, ..ctx.solve_cfg };
    let gc = 1.46871;
    let g1 = gc + 0.003;
    let (seed_a, gam) = spawn_distinct(&ctx, g1, 0, SPAWN_GAMMAS).unwrap();
    println!("seed gamma={gam} E={:.6}", seed_a.energy);
    let rec = continue_branch(&ctx, &seed_a, g1, 1.52, 0.002, "famA").unwrap();
    for s in &rec.steps {
        println!("A g={:.4} m={:?} lmin={:+.3e} {:?} d={:.4} census=({},{}) res={:.2e}",
            s.g, s.wavenumber, s.lambda_min, s.classification, s.distance,
            s.crease_count, s.indentation_count, s.residual);
    }
    println!("death={:?} failure={:?}", rec.death_g, rec.failure);
    if let Some(f) = &rec.fallen_into {
        let c = ringfold::continuation::crease_census(&f.phi, ctx.system.mesh(), &ctx.census_cfg);
        println!("fallen at g={} into census ({},{}) E={:.6} ref={}",
            f.g, c.crease_count(), c.indentation_count(), f.energy, f.into_reference);
    }
}
