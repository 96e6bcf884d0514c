// dev scratch: scan the bulk/shear base ratio for onset location and mode
use ringfold::assembly::{ElasticSystem, GrowthField, NodalField};
use ringfold::material::MaterialParams;
use ringfold::mesh::Mesh;
use ringfold::optimizer::{solve_elastic, SolveConfig};
use ringfold::spectral::{smallest_k_eigenpairs, mode_wavenumber, SpectralConfig};
use std::sync::Arc;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let kbase: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(10.0);
    let ratio: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(0.1);
    let g_hi: f64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(1.40);

    let alt: bool = args.get(4).map(|s| s == "alt").unwrap_or(false);
    let rule = if alt { ringfold::mesh::DiagonalRule::Alternating } else { ringfold::mesh::DiagonalRule::Uniform };
    let mesh = Arc::new(Mesh::<f64>::build_annulus_with(0.5, 1.0, 12, 92, 2, rule).unwrap());
    let mat = MaterialParams::new(1.0, kbase, ratio, ratio * kbase).unwrap();
    let system = ElasticSystem::new(mesh.clone(), mat);
    let cfg = SolveConfig::<f64> { max_iter_gd: 300, ..Default::default() };
    let scfg = SpectralConfig::<f64>::default();

    println!("K_base = {kbase}, ratio = {ratio}");
    let mut phi = NodalField::reference(&mesh);
    let mut g = 1.10f64;
    let mut prev_lmin = f64::NAN;
    while g <= g_hi + 1e-9 {
        let growth = GrowthField::new(g).unwrap();
        let res = solve_elastic(&system, &growth, &phi, &cfg).unwrap();
        if !res.converged {
            println!("g={g:.3}: NOT CONVERGED res={:.2e}", res.residual_norm);
            break;
        }
        phi = res.phi.clone();
        let h = system.hessian(&phi, &growth).unwrap();
        let (vals, vecs) = smallest_k_eigenpairs(&h, 4, &scfg).unwrap();
        let modes: Vec<_> = vecs.iter().map(|v| mode_wavenumber(v, &mesh)).collect();
        let r_in = phi.node(0).coords.norm();
        println!(
            "g={:.3} lmin={:+.4e} modes={:?} vals={:?} r_in={:.4}",
            g,
            vals[0],
            modes,
            vals.iter().map(|v| format!("{v:+.3e}")).collect::<Vec<_>>(),
            r_in
        );
        if prev_lmin > 0.0 && vals[0] < 0.0 {
            println!(">>> crossing in ({:.3}, {:.3}], first mode {:?}", g - 0.01, g, modes[0]);
        }
        prev_lmin = vals[0];
        g += 0.01;
    }
}
