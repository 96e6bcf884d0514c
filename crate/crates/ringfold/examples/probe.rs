// dev scratch: case-1 onset reproduction + timing probe
use ringfold::assembly::{ElasticSystem, GrowthField, NodalField};
use ringfold::material::MaterialParams;
use ringfold::mesh::Mesh;
use ringfold::optimizer::{solve_elastic, SolveConfig};
use ringfold::spectral::{smallest_k_eigenpairs, spectral_report, SpectralConfig};
use std::sync::Arc;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let mesh = Arc::new(Mesh::<f64>::build_annulus(0.5, 1.0, 12, 92, 2).unwrap());
    let system = ElasticSystem::new(mesh.clone(), MaterialParams::from_stiffness_ratio(0.1).unwrap());
    println!("mesh: {} nodes, {} tris, {} free dofs, built in {:?}",
        mesh.n_nodes(), mesh.n_triangles(), mesh.n_free_dofs(), t0.elapsed());

    let cfg = SolveConfig::<f64> { max_iter_gd: 200, ..Default::default() };
    let scfg = SpectralConfig::<f64>::default();

    let mut phi = NodalField::reference(&mesh);
    let mut g = 1.0f64;
    while g <= 1.301 {
        let growth = GrowthField::new(g).unwrap();
        let ts = Instant::now();
        let res = solve_elastic(&system, &growth, &phi, &cfg).unwrap();
        let t_solve = ts.elapsed();
        let ts = Instant::now();
        let h = system.hessian(&res.phi, &growth).unwrap();
        let (vals, _) = smallest_k_eigenpairs(&h, 2, &scfg).unwrap();
        let t_eig = ts.elapsed();
        println!(
            "g={:.3} gd={} nt={} res={:.2e} E={:.6} lmin={:+.5e} l2={:+.5e}  (solve {:?}, eig {:?})",
            g, res.gd_iters, res.newton_iters, res.residual_norm, res.energy, vals[0], vals[1],
            t_solve, t_eig
        );
        phi = res.phi;
        g += 0.02;
    }

    // mode structure at g = 1.27
    let growth = GrowthField::new(1.27).unwrap();
    let res = solve_elastic(&system, &growth, &phi, &cfg).unwrap();
    let h = system.hessian(&res.phi, &growth).unwrap();
    let ts = Instant::now();
    let report = spectral_report(&h, 6, &mesh, None, &scfg).unwrap();
    println!("report with k=6 in {:?}; lambda_max = {:.4e}", ts.elapsed(), report.lambda_max);
    for (lam, m) in report.eigenvalues.iter().zip(&report.mode_wavenumbers) {
        println!("  lambda = {lam:+.6e}  wavenumber = {m:?}");
    }
    println!("classification: {:?}", report.classification);
    println!("total {:?}", t0.elapsed());
}
