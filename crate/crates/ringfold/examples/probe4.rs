// dev scratch: dense-oracle cross-check of the iterative eigenpath at paper scale
use ringfold::assembly::{ElasticSystem, GrowthField, NodalField};
use ringfold::linalg::sym_eigen_dense;
use ringfold::material::MaterialParams;
use ringfold::mesh::Mesh;
use ringfold::optimizer::{solve_elastic, SolveConfig};
use ringfold::spectral::{mode_wavenumber, smallest_k_eigenpairs, SpectralConfig};
use std::sync::Arc;
use std::time::Instant;

fn main() {
    let kbase = 10.0;
    let g = 1.33;
    let mesh = Arc::new(Mesh::<f64>::build_annulus(0.5, 1.0, 12, 92, 2).unwrap());
    let mat = MaterialParams::new(1.0, kbase, 0.1, 0.1 * kbase).unwrap();
    let system = ElasticSystem::new(mesh.clone(), mat);
    let cfg = SolveConfig::<f64> { max_iter_gd: 300, ..Default::default() };

    // walk s0 up to g
    let mut phi = NodalField::reference(&mesh);
    let mut gs = 1.1;
    while gs < g + 1e-9 {
        let growth = GrowthField::new(gs).unwrap();
        let res = solve_elastic(&system, &growth, &phi, &cfg).unwrap();
        phi = res.phi;
        gs += 0.02;
    }
    let growth = GrowthField::new(g).unwrap();
    let res = solve_elastic(&system, &growth, &phi, &cfg).unwrap();
    phi = res.phi;

    // film elastic hoop strain at an inner element
    let st = system.element_state(&phi, &growth, 0).unwrap();
    let (i1, je) = (st.fe.norm_squared(), st.je);
    let disc = (i1 * i1 - 4.0 * je * je).max(0.0).sqrt();
    let l_big = ((i1 + disc) / 2.0).sqrt();
    let l_sml = ((i1 - disc) / 2.0).sqrt();
    println!("film element: Je={je:.4} principal stretches ({l_big:.4}, {l_sml:.4})");

    let h = system.hessian(&phi, &growth).unwrap();
    let t0 = Instant::now();
    let (vals, vecs) = smallest_k_eigenpairs(&h, 6, &SpectralConfig::default()).unwrap();
    println!("shift-invert ({:?}):", t0.elapsed());
    for (v, vec) in vals.iter().zip(&vecs) {
        println!("  {v:+.6e}  m={:?}", mode_wavenumber(vec, &mesh));
    }

    let t0 = Instant::now();
    let (dvals, dvecs) = sym_eigen_dense(h.to_dense());
    println!("dense oracle ({:?}):", t0.elapsed());
    for j in 0..6 {
        println!("  {:+.6e}  m={:?}", dvals[j], mode_wavenumber(&dvecs[j], &mesh));
    }
}
