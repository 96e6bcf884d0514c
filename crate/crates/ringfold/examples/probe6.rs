// dev scratch: inspect case-3 perturbation outcomes in detail
use ringfold::continuation::{crease_census, CensusConfig};
use ringfold::experiments::{context_for, reference_result, spawn_from_reference};
use ringfold::io::config::RunConfig;
use ringfold::io::svg::{render_svg, RenderOptions};
use ringfold::optimizer::SolveConfig;

fn main() {
    let mut cfg = RunConfig::default();
    cfg.material.stiffness_ratio = 1.0;
    let mut ctx = context_for(&cfg, 1.0).unwrap();
    ctx.solve_cfg = SolveConfig { max_iter_gd: 200_000, ..ctx.solve_cfg };

    let g = 1.70;
    let base = reference_result(&ctx, g).unwrap();
    for (idx, gamma, tag) in [(0usize, 1e-3, "m7dir"), (2, 1e-3, "m6dir"), (2, 1.0, "m6big")] {
        let out = spawn_from_reference(&ctx, g, idx, gamma, 0.0).unwrap();
        let mesh = ctx.system.mesh();
        let census = crease_census(&out.phi, mesh, &ctx.census_cfg);
        let d = out.phi.distance(&base.phi, mesh);
        println!(
            "[{tag}] idx={idx} gamma={gamma:.0e} conv={} E={:.6} dE={:+.3e} d={:.3} census=({},{})",
            out.converged,
            out.energy,
            out.energy - base.energy,
            d,
            census.crease_count(),
            census.indentation_count()
        );
        // angle and depth of every prominent minimum
        let ring = mesh.inner_ring_nodes();
        let n = ring.len();
        let rho: Vec<f64> = ring.iter().map(|&k| out.phi.node(k).coords.norm()).collect();
        let (hi, lo) = rho.iter().fold((f64::MIN, f64::MAX), |(a, b), &r| (a.max(r), b.min(r)));
        println!("  rho in [{lo:.4}, {hi:.4}]");
        for j in 0..n {
            let prev = rho[(j + n - 1) % n];
            let next = rho[(j + 1) % n];
            if rho[j] < prev && rho[j] < next && (hi - rho[j]) > 0.3 * (hi - lo) {
                let p = out.phi.node(ring[j]);
                let a = out.phi.node(ring[(j + n - 1) % n]) - p;
                let b = out.phi.node(ring[(j + 1) % n]) - p;
                let ang = (a.dot(&b) / (a.norm() * b.norm())).clamp(-1.0, 1.0).acos().to_degrees();
                // wider stencil: two nodes away
                let a2 = out.phi.node(ring[(j + n - 2) % n]) - p;
                let b2 = out.phi.node(ring[(j + 2) % n]) - p;
                let ang2 =
                    (a2.dot(&b2) / (a2.norm() * b2.norm())).clamp(-1.0, 1.0).acos().to_degrees();
                println!("  min at node {j}: rho={:.4} angle1={ang:.1} angle2={ang2:.1}", rho[j]);
            }
        }
        let svg = render_svg(
            mesh,
            &out.phi,
            &RenderOptions { crease_nodes: census.creases.clone(), ..Default::default() },
        );
        std::fs::write(format!("/root/notes/case3_{tag}.svg"), svg).unwrap();
    }

    // census threshold sensitivity on the first outcome
    let out = spawn_from_reference(&ctx, g, 0, 1e-3, 0.0).unwrap();
    for angle in [100.0, 120.0, 140.0, 150.0, 160.0] {
        let c = crease_census(
            &out.phi,
            ctx.system.mesh(),
            &CensusConfig { crease_angle_deg: angle, ..Default::default() },
        );
        println!("theta_c={angle}: census=({},{})", c.crease_count(), c.indentation_count());
    }
}
