// dev scratch: full case-1 s5 trek 1.46 -> 1.92 with the deflated rescue
use ringfold::continuation::continue_branch;
use ringfold::experiments::context_for;
use ringfold::io;
use ringfold::io::config::RunConfig;
use ringfold::optimizer::SolveConfig;
use std::path::Path;
use std::time::Instant;

fn main() {
    let mut cfg = RunConfig::default();
    cfg.material.stiffness_ratio = 0.1;
    let mut ctx = context_for(&cfg, 0.1).unwrap();
    ctx.solve_cfg = SolveConfig { max_iter_gd: 30_000, ..ctx.solve_cfg };
    let mesh = ctx.system.mesh().clone();
    let (_, g0, phi) =
        io::read_checkpoint(Path::new("/root/notes/case1/s5_g1.4618.ckpt"), &mesh).unwrap();
    let t0 = Instant::now();
    let seed = ctx.resolve_from(&phi, g0).unwrap();
    let rec = continue_branch(&ctx, &seed, g0, 1.92, 0.01, "s5").unwrap();
    for s in rec.steps.iter().step_by(5) {
        println!("g={:.4} lmin={:+.2e} {:?} d={:.3} E={:.5} census=({},{})",
            s.g, s.lambda_min, s.classification, s.distance, s.energy, s.crease_count, s.indentation_count);
    }
    let last = rec.steps.last().unwrap();
    println!("last g={:.4}; death={:?} failure={:?} [{:?}]", last.g, rec.death_g, rec.failure, t0.elapsed());
    io::write_checkpoint(Path::new("/root/notes/s5_far.ckpt"), "s5", last.g, &last.phi).unwrap();
    // tip angle stats for census calibration
    let ring = mesh.inner_ring_nodes();
    let n = ring.len();
    for s in rec.steps.iter().filter(|s| (s.g * 100.0).round() % 10.0 == 0.0) {
        let rho: Vec<f64> = ring.iter().map(|&k| s.phi.node(k).coords.norm()).collect();
        let (hi, lo) = rho.iter().fold((f64::MIN, f64::MAX), |(a, b), &r| (a.max(r), b.min(r)));
        let mut worst = 180.0f64;
        for j in 0..n {
            let prev = rho[(j + n - 1) % n];
            let next = rho[(j + 1) % n];
            if rho[j] < prev && rho[j] < next && (hi - rho[j]) > 0.25 * (hi - lo) {
                let p = s.phi.node(ring[j]);
                let a = s.phi.node(ring[(j + n - 1) % n]) - p;
                let b = s.phi.node(ring[(j + 1) % n]) - p;
                let ang = (a.dot(&b) / (a.norm() * b.norm())).clamp(-1.0, 1.0).acos().to_degrees();
                worst = worst.min(ang);
            }
        }
        println!("  g={:.2}: sharpest indentation angle {worst:.1} deg", s.g);
    }
}
