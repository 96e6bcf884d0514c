// dev scratch: do creased minimizers exist at ratio 1? seed sharp notches.
use ringfold::assembly::{GrowthField, NodalField};
use ringfold::continuation::crease_census;
use ringfold::experiments::{context_for, reference_result};
use ringfold::io::config::RunConfig;
use ringfold::io::svg::{render_svg, RenderOptions};
use ringfold::optimizer::{solve_elastic, SolveConfig};
use ringfold::spectral::{smallest_k_eigenpairs, SpectralConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let kbase: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(6.0);
    let g: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(1.70);
    let notches: usize = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(6);
    let depth: f64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(0.12);

    let mut cfg = RunConfig::default();
    cfg.material.stiffness_ratio = 1.0;
    cfg.material.k_g = kbase;
    if std::env::args().nth(5).as_deref() == Some("uni") {
        cfg.mesh.diagonal = ringfold::io::config::DiagonalKind::Uniform;
    }
    let mut ctx = context_for(&cfg, 1.0).unwrap();
    ctx.solve_cfg = SolveConfig { max_iter_gd: 150_000, ..ctx.solve_cfg };
    let mesh = ctx.system.mesh().clone();

    // start from the relaxed annular state, then notch it
    let base = reference_result(&ctx, g).unwrap();
    let mut x = base.phi.free_vector(&mesh);
    let ring = mesh.inner_ring_nodes();
    let n = ring.len();
    for i in 0..notches {
        let j = (i * n) / notches;
        let node = ring[j];
        let b = mesh.free_dof(node).unwrap();
        let p = base.phi.node(node);
        let r = p.coords.norm();
        let scale = (r - depth) / r;
        x[b] *= scale;
        x[b + 1] *= scale;
        // pull the flanking nodes inward a little to shape a wedge
        for (off, frac) in [(n - 1, 0.45), (1, 0.45)] {
            let node2 = ring[(j + off) % n];
            let b2 = mesh.free_dof(node2).unwrap();
            let p2 = base.phi.node(node2);
            let r2 = p2.coords.norm();
            let s2 = (r2 - depth * frac) / r2;
            x[b2] *= s2;
            x[b2 + 1] *= s2;
        }
    }
    let guess = NodalField::from_free(&mesh, &x);
    let growth = GrowthField::new(g).unwrap();
    let res = solve_elastic(&ctx.system, &growth, &guess, &ctx.solve_cfg).unwrap();
    let census = crease_census(&res.phi, &mesh, &ctx.census_cfg);
    let d = res.phi.distance(&base.phi, &mesh);
    let h = ctx.system.hessian(&res.phi, &growth).unwrap();
    let (vals, _) = smallest_k_eigenpairs(&h, 1, &SpectralConfig::default()).unwrap();
    println!(
        "K={kbase} g={g} notches={notches} depth={depth}: conv={} gd={} E={:.6} (s0 {:.6}) d={:.3} census=({},{}) lmin={:+.3e}",
        res.converged, res.gd_iters, res.energy, base.energy, d,
        census.crease_count(), census.indentation_count(), vals[0]
    );
    let rho: Vec<f64> = ring.iter().map(|&k| res.phi.node(k).coords.norm()).collect();
    let (hi, lo) = rho.iter().fold((f64::MIN, f64::MAX), |(a, b), &r| (a.max(r), b.min(r)));
    println!("rho in [{lo:.4},{hi:.4}]");
    for j in 0..n {
        let prev = rho[(j + n - 1) % n];
        let next = rho[(j + 1) % n];
        if rho[j] < prev && rho[j] < next && (hi - rho[j]) > 0.3 * (hi - lo) {
            let p = res.phi.node(ring[j]);
            let a = res.phi.node(ring[(j + n - 1) % n]) - p;
            let b = res.phi.node(ring[(j + 1) % n]) - p;
            let ang = (a.dot(&b) / (a.norm() * b.norm())).clamp(-1.0, 1.0).acos().to_degrees();
            println!("  min {j}: rho={:.4} angle={ang:.1}", rho[j]);
        }
    }
    let svg = render_svg(&mesh, &res.phi, &RenderOptions { crease_nodes: census.creases.clone(), ..Default::default() });
    std::fs::write(format!("/root/notes/notch_K{kbase}_g{g}_{notches}.svg"), svg).unwrap();
}
