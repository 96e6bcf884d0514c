// dev scratch: inspect the deformed reference branch state
use ringfold::assembly::{ElasticSystem, GrowthField, NodalField};
use ringfold::material::MaterialParams;
use ringfold::mesh::Mesh;
use ringfold::optimizer::{solve_elastic, SolveConfig};
use std::sync::Arc;

fn main() {
    let mesh = Arc::new(Mesh::<f64>::build_annulus(0.5, 1.0, 12, 92, 2).unwrap());
    let system =
        ElasticSystem::new(mesh.clone(), MaterialParams::from_stiffness_ratio(0.1).unwrap());
    let cfg = SolveConfig::<f64> { max_iter_gd: 400, ..Default::default() };

    let mut phi = NodalField::reference(&mesh);
    for gs in [1.1f64, 1.2, 1.3] {
        let growth = GrowthField::new(gs).unwrap();
        let res = solve_elastic(&system, &growth, &phi, &cfg).unwrap();
        phi = res.phi.clone();
        let r_in: f64 = phi.node(0).coords.norm();
        // ring radii
        let r_ring2 = phi.node(2 * 92).coords.norm();
        let r_ring3 = phi.node(3 * 92).coords.norm();
        println!("g={gs}: inner radius {r_in:.4}, ring2 {r_ring2:.4} (ref {:.4}), ring3 {r_ring3:.4} (ref {:.4}), E={:.6}",
            mesh.node(2*92).coords.norm(), mesh.node(3*92).coords.norm(), res.energy);
        // stress state in an element of layer 0 (growing) and layer 5 (not)
        for t in [0usize, 1, 5 * 184, 11 * 184] {
            let st = system.element_state(&phi, &growth, t).unwrap();
            // polar components: radial/hoop directions at element centroid
            let tri = mesh.triangle(t);
            let c = (phi.node(tri[0]).coords + phi.node(tri[1]).coords + phi.node(tri[2]).coords)
                / 3.0;
            let er = c / c.norm();
            let et = nalgebra::Vector2::new(-er.y, er.x);
            let s_rr = (st.sigma * er).dot(&er);
            let s_tt = (st.sigma * et).dot(&et);
            println!(
                "  t={t:5} region={:?} Je={:.4} s_rr={:+.4e} s_tt={:+.4e} W-scale |Fe|^2={:.4}",
                mesh.region(t),
                st.je,
                s_rr,
                s_tt,
                st.fe.norm_squared()
            );
        }
    }
}
