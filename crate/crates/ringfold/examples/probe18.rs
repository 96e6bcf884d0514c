// dev scratch: deep perturbation of the m5 saddle family at 1.494 (case 2)
use ringfold::continuation::{continue_branch, crease_census, PerturbationSpec};
use ringfold::experiments::*;
use ringfold::io;
use ringfold::io::config::RunConfig;
use ringfold::optimizer::SolveConfig;
use std::path::Path;
use std::time::Instant;

fn main() {
    let mut cfg = RunConfig::default();
    cfg.material.stiffness_ratio = 0.4;
    let mut ctx = context_for(&cfg, 0.4).unwrap();
    ctx.solve_cfg = SolveConfig { max_iter_gd: 30_000, ..ctx.solve_cfg };
    let mesh = ctx.system.mesh().clone();

    let ck = Path::new("/root/notes/famB_1.4937.ckpt");
    let base = if ck.exists() {
        let (_, g, phi) = io::read_checkpoint(ck, &mesh).unwrap();
        ctx.resolve_from(&phi, g).unwrap()
    } else {
        let idx = eigen_index_for_wavenumber(&ctx, 1.4907, 5, 10).unwrap().unwrap();
        let seed = spawn_saddle(&ctx, 1.4907, idx).unwrap();
        let rec = continue_branch(&ctx, &seed, 1.4907, 1.4937, 0.001, "famB").unwrap();
        let last = rec.steps.last().unwrap();
        println!("famB at {:.4}: lmin={:+.2e} {:?} m={:?}", last.g, last.lambda_min, last.classification, last.wavenumber);
        io::write_checkpoint(ck, "famB", last.g, &last.phi).unwrap();
        ctx.resolve_from(&last.phi, last.g).unwrap()
    };
    let g = 1.4937;
    println!("base: E={:.6} res={:.2e}", base.energy, base.residual_norm);

    for (gamma, max_gd) in [(0.5f64, 200_000usize), (0.5, 400_000)] {
        let mut deep = context_for(&cfg, 0.4).unwrap();
        deep.solve_cfg = SolveConfig { max_iter_gd: max_gd, ..deep.solve_cfg };
        let t = Instant::now();
        let out = ringfold::continuation::perturb_and_search(
            &deep, &base,
            &PerturbationSpec { eigen_index: 0, gamma, in_plane_angle_deg: 0.0 }, g,
        ).unwrap();
        let census = crease_census(&out.phi, &mesh, &ctx.census_cfg);
        let (ref_phi, ref_e) = ctx.reference_at(g).unwrap();
        println!(
            "gamma={gamma} maxgd={max_gd}: conv={} gd={} E/E0={:.5} d(base)={:.3} d(s0)={:.3} census=({},{}) [{:?}]",
            out.converged, out.gd_iters, out.energy / ref_e,
            out.phi.distance(&base.phi, &mesh), out.phi.distance(&ref_phi, &mesh),
            census.crease_count(), census.indentation_count(), t.elapsed()
        );
        // indentation profile: depth + angle of each
        let ring = mesh.inner_ring_nodes();
        let n = ring.len();
        let rho: Vec<f64> = ring.iter().map(|&k| out.phi.node(k).coords.norm()).collect();
        let (hi, lo) = rho.iter().fold((f64::MIN, f64::MAX), |(a, b), &r| (a.max(r), b.min(r)));
        for j in 0..n {
            let prev = rho[(j + n - 1) % n];
            let next = rho[(j + 1) % n];
            if rho[j] < prev && rho[j] < next && (hi - rho[j]) > 0.2 * (hi - lo) {
                let p = out.phi.node(ring[j]);
                let a = out.phi.node(ring[(j + n - 1) % n]) - p;
                let b = out.phi.node(ring[(j + 1) % n]) - p;
                let ang = (a.dot(&b) / (a.norm() * b.norm())).clamp(-1.0, 1.0).acos().to_degrees();
                println!("  min {j}: rho={:.4} angle={ang:.1}", rho[j]);
            }
        }
        io::write_checkpoint(
            Path::new(&format!("/root/notes/case2_fromB_{max_gd}.ckpt")), "x", g, &out.phi).unwrap();
    }
}
