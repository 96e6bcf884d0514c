// dev scratch: what happens to the case-2 first family past 1.478?
use ringfold::assembly::NodalField;
use ringfold::continuation::{continue_branch, crease_census};
use ringfold::experiments::*;
use ringfold::io;
use ringfold::io::config::RunConfig;
use ringfold::optimizer::SolveConfig;
use std::path::Path;

fn main() {
    let mut cfg = RunConfig::default();
    cfg.material.stiffness_ratio = 0.4;
    let mut ctx = context_for(&cfg, 0.4).unwrap();
    ctx.solve_cfg = SolveConfig { max_iter_gd: 30_000, ..ctx.solve_cfg };
    let mesh = ctx.system.mesh().clone();

    // reuse the famA seed if checkpointed, else rebuild it
    let ck = Path::new("/root/notes/famA_1.4777.ckpt");
    let phi_a: NodalField<f64>;
    if ck.exists() {
        let (_, _, phi) = io::read_checkpoint(ck, &mesh).unwrap();
        phi_a = phi;
    } else {
        let gc = 1.46871;
        let (seed_a, _) = spawn_distinct(&ctx, gc + 0.003, 0, SPAWN_GAMMAS).unwrap();
        let rec = continue_branch(&ctx, &seed_a, gc + 0.003, 1.4777, 0.002, "famA").unwrap();
        let last = rec.steps.last().unwrap();
        io::write_checkpoint(ck, "famA", last.g, &last.phi).unwrap();
        phi_a = last.phi.clone();
    }
    println!("famA@1.4777 loaded");

    // deep-budget step to 1.4797
    let mut deep = context_for(&cfg, 0.4).unwrap();
    deep.solve_cfg = SolveConfig { max_iter_gd: 200_000, ..deep.solve_cfg };
    let out = deep.resolve_from(&phi_a, 1.4797).unwrap();
    let census = crease_census(&out.phi, &mesh, &ctx.census_cfg);
    let (ref_phi, ref_e) = ctx.reference_at(1.4797).unwrap();
    println!(
        "deep step to 1.4797: conv={} res={:.2e} E={:.6} E/E0={:.5} d={:.4} census=({},{}) jump={:.4}",
        out.converged, out.residual_norm, out.energy, out.energy / ref_e,
        out.phi.distance(&ref_phi, &mesh),
        census.crease_count(), census.indentation_count(),
        out.phi.distance(&phi_a, &mesh)
    );
    if out.converged {
        io::write_checkpoint(Path::new("/root/notes/famA_1.4797.ckpt"), "famA", 1.4797, &out.phi)
            .unwrap();
        // keep walking with the deep context
        let rec = continue_branch(&deep, &out, 1.4797, 1.497, 0.002, "famA").unwrap();
        for s in &rec.steps {
            println!(
                "A+ g={:.4} m={:?} lmin={:+.3e} {:?} d={:.4} census=({},{})",
                s.g, s.wavenumber, s.lambda_min, s.classification, s.distance,
                s.crease_count, s.indentation_count
            );
        }
        println!("death={:?} failure={:?}", rec.death_g, rec.failure);
        if let Some(last) = rec.steps.last() {
            io::write_checkpoint(
                Path::new(&format!("/root/notes/famA_{:.4}.ckpt", last.g)),
                "famA",
                last.g,
                &last.phi,
            )
            .unwrap();
        }
    }
}
