// dev scratch: case-2 protocol up to the crease discovery at g = 1.494
use ringfold::continuation::{continue_branch, crease_census, BranchContext, PerturbationSpec};
use ringfold::experiments::{
    bisect_reference_onset, context_for, reference_result, scan_reference, spawn_from_reference,
    spawn_saddle,
};
use ringfold::io::config::RunConfig;
use ringfold::io::svg::{render_svg, RenderOptions};
use ringfold::optimizer::SolveConfig;
use ringfold::spectral::Classification;
use std::time::Instant;

fn shape_report(ctx: &BranchContext<f64>, phi: &ringfold::assembly::NodalField<f64>, tag: &str) {
    let mesh = ctx.system.mesh();
    let ring = mesh.inner_ring_nodes();
    let n = ring.len();
    let rho: Vec<f64> = ring.iter().map(|&k| phi.node(k).coords.norm()).collect();
    let (hi, lo) = rho.iter().fold((f64::MIN, f64::MAX), |(a, b), &r| (a.max(r), b.min(r)));
    println!("[{tag}] rho in [{lo:.4},{hi:.4}]");
    for j in 0..n {
        let prev = rho[(j + n - 1) % n];
        let next = rho[(j + 1) % n];
        if rho[j] < prev && rho[j] < next && (hi - rho[j]) > 0.25 * (hi - lo) {
            let p = phi.node(ring[j]);
            let a = phi.node(ring[(j + n - 1) % n]) - p;
            let b = phi.node(ring[(j + 1) % n]) - p;
            let ang = (a.dot(&b) / (a.norm() * b.norm())).clamp(-1.0, 1.0).acos().to_degrees();
            let prof: Vec<String> =
                (0..7).map(|s| format!("{:.3}", rho[(j + n - 3 + s) % n])).collect();
            println!("  min {j}: rho={:.4} angle={ang:.1} profile {}", rho[j], prof.join(" "));
        }
    }
    let census = crease_census(phi, mesh, &ctx.census_cfg);
    println!("  census=({},{})", census.crease_count(), census.indentation_count());
    let svg = render_svg(mesh, phi, &RenderOptions { crease_nodes: census.creases.clone(), ..Default::default() });
    std::fs::write(format!("/root/notes/case2_{tag}.svg"), svg).unwrap();
}

fn main() {
    let t0 = Instant::now();
    let mut cfg = RunConfig::default();
    cfg.material.stiffness_ratio = 0.4;
    let mut ctx = context_for(&cfg, 0.4).unwrap();
    ctx.solve_cfg = SolveConfig { max_iter_gd: 30_000, ..ctx.solve_cfg };

    let scan = scan_reference(&ctx, 1.38, 1.50, 0.01).unwrap();
    for p in &scan.points {
        println!("g={:.3} lmin={:+.3e} m={:?}", p.g, p.lambda_min, p.wavenumber);
    }
    let (lo, hi) = scan.crossing.expect("case-2 onset in range");
    let gc = bisect_reference_onset(&ctx, lo, hi, 10).unwrap();
    println!("case-2 onset: {gc:.5} ({:?})", t0.elapsed());

    // s5 branch to its destabilization
    let seed5 = spawn_from_reference(&ctx, gc + 0.004, 0, 1e-3, 0.0).unwrap();
    let rec5 = continue_branch(&ctx, &seed5, gc + 0.004, 1.50, 0.002, "s5").unwrap();
    for s in rec5.steps.iter().filter(|s| s.g > 1.46) {
        println!(
            "s5 g={:.3} lmin={:+.3e} class={:?} d={:.4} E/E0={:?}",
            s.g, s.lambda_min, s.classification, s.distance,
            s.energy_ratio.map(|r| (r * 1e4).round() / 1e4)
        );
    }
    let turn5 = rec5.steps.iter().find(|s| s.classification == Classification::Saddle);
    println!("s5 turns saddle at {:?}", turn5.map(|s| s.g));

    // s6 saddle branch
    let seq =
        ringfold::experiments::unstable_mode_sequence(&ctx, gc - 0.002, 1.50, 0.005, 2).unwrap();
    println!("unstable sequence: {seq:?}");
    if let Some((g2, _)) = seq.get(1) {
        let seed6 = spawn_saddle(&ctx, g2 + 0.004, 2).unwrap();
        let rec6 = continue_branch(&ctx, &seed6, g2 + 0.004, 1.50, 0.002, "s6").unwrap();
        for s in rec6.steps.iter().filter(|s| s.g > 1.47) {
            println!(
                "s6 g={:.3} lmin={:+.3e} class={:?} d={:.4} m={:?}",
                s.g, s.lambda_min, s.classification, s.distance, s.wavenumber
            );
        }
        // the criterion-11 discovery: perturb the saddle s6 at 1.494
        if let Some(st) = rec6.steps.iter().find(|s| (s.g - 1.494).abs() < 1e-9) {
            shape_report(&ctx, &st.phi, "s6_at_1.494");
            let base = ringfold::optimizer::SolveResult {
                phi: st.phi.clone(),
                residual_norm: st.residual,
                energy: st.energy,
                gd_iters: 0,
                newton_iters: 0,
                converged: true,
                trace: vec![],
            };
            for (max_gd, gamma) in [(200_000usize, 0.5f64), (400_000, 0.5)] {
                let mut deep = BranchContext::new(
                    ringfold::assembly::ElasticSystem::new(
                        ctx.system.mesh().clone(),
                        *ctx.system.material(),
                    ),
                    SolveConfig { max_iter_gd: max_gd, ..ctx.solve_cfg.clone() },
                );
                deep.census_cfg = ctx.census_cfg.clone();
                let t = Instant::now();
                let out = ringfold::continuation::perturb_and_search(
                    &deep,
                    &base,
                    &PerturbationSpec { eigen_index: 0, gamma, in_plane_angle_deg: 0.0 },
                    1.494,
                )
                .unwrap();
                let d_s6 = out.phi.distance(&st.phi, ctx.system.mesh());
                let s0 = reference_result(&ctx, 1.494).unwrap();
                println!(
                    "maxgd={max_gd} gamma={gamma}: conv={} gd={} nt={} E={:.6} d(s6)={:.3} d(s0)={:.3} ({:?})",
                    out.converged, out.gd_iters, out.newton_iters, out.energy, d_s6,
                    out.phi.distance(&s0.phi, ctx.system.mesh()),
                    t.elapsed()
                );
                shape_report(&ctx, &out.phi, &format!("from_s6_gd{}", max_gd / 1000));
            }
        } else {
            println!("s6 record does not reach 1.494: last {:?}", rec6.steps.last().map(|s| s.g));
        }
    }
    println!("total {:?}", t0.elapsed());
}
