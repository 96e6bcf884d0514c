// dev scratch: turning-angle concentration profiles across morphologies
use ringfold::assembly::NodalField;
use ringfold::experiments::{context_for, spawn_from_reference, eigen_index_for_wavenumber};
use ringfold::io;
use ringfold::io::config::RunConfig;
use ringfold::optimizer::SolveConfig;
use std::path::Path;

fn turn_profile(mesh: &ringfold::mesh::Mesh<f64>, phi: &NodalField<f64>, tag: &str) {
    let ring = mesh.inner_ring_nodes();
    let n = ring.len();
    let rho: Vec<f64> = ring.iter().map(|&k| phi.node(k).coords.norm()).collect();
    let turn = |j: usize| -> f64 {
        let p = phi.node(ring[j]);
        let a = phi.node(ring[(j + n - 1) % n]) - p;
        let b = phi.node(ring[(j + 1) % n]) - p;
        180.0 - (a.dot(&b) / (a.norm() * b.norm())).clamp(-1.0, 1.0).acos().to_degrees()
    };
    let (hi, lo) = rho.iter().fold((f64::MIN, f64::MAX), |(a, b), &r| (a.max(r), b.min(r)));
    println!("[{tag}]");
    for j in 0..n {
        let prev = rho[(j + n - 1) % n];
        let next = rho[(j + 1) % n];
        if rho[j] < prev && rho[j] < next && (hi - rho[j]) > 0.25 * (hi - lo) {
            let prof: Vec<String> =
                (0..7).map(|s| format!("{:+5.1}", turn((j + n - 3 + s) % n))).collect();
            let apex = turn(j);
            let window: f64 = (0..5).map(|s| turn((j + n - 2 + s) % n).max(0.0)).sum();
            println!(
                "  min {j}: apex {apex:5.1} deg of window {window:5.1} deg (share {:.2}) | {}",
                apex / window.max(1e-9),
                prof.join(" ")
            );
        }
    }
}

fn main() {
    // case-1 deep smooth folds at g = 1.92
    let mut cfg1 = RunConfig::default();
    cfg1.material.stiffness_ratio = 0.1;
    let ctx1 = context_for(&cfg1, 0.1).unwrap();
    let mesh = ctx1.system.mesh().clone();
    let (_, _, phi) = io::read_checkpoint(Path::new("/root/notes/s5_far.ckpt"), &mesh).unwrap();
    turn_profile(&mesh, &phi, "case1 s5 @1.92");

    // case-3 jump state at g = 1.70
    let mut cfg3 = RunConfig::default();
    cfg3.material.stiffness_ratio = 1.0;
    let mut ctx3 = context_for(&cfg3, 1.0).unwrap();
    ctx3.solve_cfg = SolveConfig { max_iter_gd: 150_000, ..ctx3.solve_cfg };
    let idx = eigen_index_for_wavenumber(&ctx3, 1.70, 6, 10).unwrap().unwrap();
    let out = spawn_from_reference(&ctx3, 1.70, idx, 1e-3, 0.0).unwrap();
    io::write_checkpoint(Path::new("/root/notes/case3_s6.ckpt"), "s_6", 1.70, &out.phi).unwrap();
    turn_profile(&mesh, &out.phi, "case3 jump @1.70");
}
