// dev scratch: case-2 smooth families and the transitional window
use ringfold::continuation::{continue_branch, BranchContext, PerturbationSpec};
use ringfold::experiments::*;
use ringfold::io::config::RunConfig;
use ringfold::optimizer::SolveConfig;
use ringfold::spectral::Classification;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let mut cfg = RunConfig::default();
    cfg.material.stiffness_ratio = 0.4;
    let mut ctx = context_for(&cfg, 0.4).unwrap();
    ctx.solve_cfg = SolveConfig { max_iter_gd: 30_000, ..ctx.solve_cfg };

    let scan = scan_reference(&ctx, 1.44, 1.50, 0.005).unwrap();
    let (lo, hi) = scan.crossing.expect("onset");
    let gc = bisect_reference_onset(&ctx, lo, hi, 10).unwrap();
    println!("onset {gc:.5}");

    // first family (m6 here)
    let g1 = gc + 0.003;
    let (seed_a, gam) = spawn_distinct(&ctx, g1, 0, SPAWN_GAMMAS).unwrap();
    println!("first family spawned with gamma {gam}, E={:.6}, d={:.4}", seed_a.energy,
        seed_a.phi.distance(&reference_result(&ctx, g1).unwrap().phi, ctx.system.mesh()));
    let rec_a = continue_branch(&ctx, &seed_a, g1, 1.52, 0.002, "famA").unwrap();
    for s in rec_a.steps.iter().step_by(2) {
        println!("A g={:.3} m={:?} lmin={:+.3e} {:?} d={:.4} census=({},{})",
            s.g, s.wavenumber, s.lambda_min, s.classification, s.distance, s.crease_count, s.indentation_count);
    }

    // second family
    let seq = unstable_mode_sequence(&ctx, gc - 0.002, 1.52, 0.004, 2).unwrap();
    println!("sequence {seq:?}");
    let (g2, w2) = seq[1];
    let idx = eigen_index_for_wavenumber(&ctx, g2 + 0.004, w2.unwrap(), 10).unwrap().unwrap();
    let seed_b = spawn_saddle(&ctx, g2 + 0.004, idx).unwrap();
    let rec_b = continue_branch(&ctx, &seed_b, g2 + 0.004, 1.52, 0.002, "famB").unwrap();
    for s in rec_b.steps.iter().step_by(2) {
        println!("B g={:.3} m={:?} lmin={:+.3e} {:?} d={:.4}",
            s.g, s.wavenumber, s.lambda_min, s.classification, s.distance);
    }

    // transitional: perturb first-born at its first saddle step
    if let Some(turn) = rec_a.steps.iter().find(|s| s.classification == Classification::Saddle) {
        println!("famA saddle from g={:.4}", turn.g);
        let base = ringfold::optimizer::SolveResult {
            phi: turn.phi.clone(), residual_norm: turn.residual, energy: turn.energy,
            gd_iters: 0, newton_iters: 0, converged: true, trace: vec![],
        };
        for gamma in [1e-3, 1e-2, 5e-2] {
            let star = ringfold::continuation::perturb_and_search(
                &ctx, &base, &PerturbationSpec { eigen_index: 0, gamma, in_plane_angle_deg: 0.0 }, turn.g,
            ).unwrap();
            let d_a = star.phi.distance(&turn.phi, ctx.system.mesh());
            let d_b = rec_b.step_at(turn.g).map(|s| star.phi.distance(&s.phi, ctx.system.mesh()));
            println!("star gamma={gamma:.0e}: E={:.6} d(A)={:.4} d(B)={:?}", star.energy, d_a, d_b);
            if d_a > ctx.merge_threshold() {
                let ds = continue_branch(&ctx, &star, turn.g, turn.g + 0.012, 0.001, "star").unwrap();
                let back = continue_branch(&ctx, &star, turn.g, turn.g - 0.012, -0.001, "star").unwrap();
                for s in back.steps.iter().rev().chain(ds.steps.iter().skip(1)) {
                    println!("  star g={:.4} lmin={:+.3e} {:?} d={:.4} m={:?}",
                        s.g, s.lambda_min, s.classification, s.distance, s.wavenumber);
                }
                break;
            }
        }
    } else {
        println!("famA never destabilizes in range");
    }
    let _ = BranchContext::<f64>::new;
    println!("total {:?}", t0.elapsed());
}
