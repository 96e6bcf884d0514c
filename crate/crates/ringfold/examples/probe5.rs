// dev scratch: criterion-level checks at the calibrated bulk base
use ringfold::continuation::{crease_census, BranchContext};
use ringfold::experiments::{
    bisect_reference_onset, mode_groups, reference_result, scan_reference, spawn_from_reference,
    unstable_mode_sequence,
};
use ringfold::io::config::RunConfig;
use ringfold::optimizer::SolveConfig;
use std::time::Instant;

fn ctx_for(ratio: f64, max_gd: usize) -> BranchContext<f64> {
    let mut cfg = RunConfig::default();
    cfg.material.stiffness_ratio = ratio;
    let ctx = ringfold::experiments::context_for(&cfg, ratio).unwrap();
    let mut ctx = ctx;
    ctx.solve_cfg = SolveConfig { max_iter_gd: max_gd, ..ctx.solve_cfg };
    ctx
}

fn main() {
    let which: u32 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let t0 = Instant::now();
    if which == 1 {
        // case 1: onset + unstable mode sequence
        let ctx = ctx_for(0.1, 20_000);
        let scan = scan_reference(&ctx, 1.24, 1.30, 0.005).unwrap();
        for p in &scan.points {
            println!("g={:.3} lmin={:+.4e} l2={:+.4e} m={:?}", p.g, p.lambda_min, p.lambda_second, p.wavenumber);
        }
        let (lo, hi) = scan.crossing.expect("crossing");
        let gc = bisect_reference_onset(&ctx, lo, hi, 12).unwrap();
        println!("onset g_c = {gc:.5}   ({:?})", t0.elapsed());
        let seq = unstable_mode_sequence(&ctx, gc - 0.004, 1.42, 0.01, 3).unwrap();
        println!("unstable mode sequence: {seq:?}");
        // degenerate pair check just past onset
        let groups = mode_groups(&ctx, gc + 0.004, 4).unwrap();
        for g in &groups {
            println!("group: lambda={:+.4e} mult={} m={:?}", g.lambda, g.multiplicity, g.wavenumber);
        }
    } else if which == 3 {
        let ctx = ctx_for(1.0, 100_000);
        for g in [1.69, 1.70, 1.71] {
            let groups = mode_groups(&ctx, g, 8).unwrap();
            let gs: Vec<String> = groups
                .iter()
                .map(|m| format!("{:+.3e}(x{},m={:?})", m.lambda, m.multiplicity, m.wavenumber))
                .collect();
            println!("g={g}: {}", gs.join(" "));
        }
        // criterion-12 perturbation at 1.70
        for gamma in [1e-3, 1e-4] {
            let t = Instant::now();
            let out = spawn_from_reference(&ctx, 1.70, 0, gamma, 0.0).unwrap();
            let census = crease_census(&out.phi, ctx.system.mesh(), &ctx.census_cfg);
            let base = reference_result(&ctx, 1.70).unwrap();
            let d = out.phi.distance(&base.phi, ctx.system.mesh());
            println!(
                "gamma={gamma:.0e}: converged={} gd={} nt={} census=({},{}) d={:.4e} merge_tol={:.4e} ({:?})",
                out.converged,
                out.gd_iters,
                out.newton_iters,
                census.crease_count(),
                census.indentation_count(),
                d,
                ctx.merge_threshold(),
                t.elapsed()
            );
        }
    } else if which == 2 {
        let ctx = ctx_for(0.4, 20_000);
        let scan = scan_reference(&ctx, 1.38, 1.50, 0.01).unwrap();
        for p in &scan.points {
            println!("g={:.3} lmin={:+.4e} m={:?}", p.g, p.lambda_min, p.wavenumber);
        }
        println!("crossing: {:?} ({:?})", scan.crossing, t0.elapsed());
    }
}
