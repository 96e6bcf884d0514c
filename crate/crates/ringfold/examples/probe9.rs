// dev scratch: case-2 m5/m6 crossing order vs bulk base
use ringfold::experiments::{context_for, unstable_mode_sequence, bisect_reference_onset, scan_reference};
use ringfold::io::config::RunConfig;
use ringfold::optimizer::SolveConfig;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let kbase: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(6.0);
    let ratio: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(0.4);

    let mut cfg = RunConfig::default();
    cfg.material.stiffness_ratio = ratio;
    cfg.material.k_g = kbase;
    let mut ctx = context_for(&cfg, ratio).unwrap();
    ctx.solve_cfg = SolveConfig { max_iter_gd: 10_000, ..ctx.solve_cfg };

    let seq = unstable_mode_sequence(&ctx, 1.40, 1.52, 0.004, 2).unwrap();
    println!("K={kbase} ratio={ratio}: unstable sequence {seq:?}");
    if ratio == 0.1 {
        let scan = scan_reference(&ctx, 1.24, 1.30, 0.01).unwrap();
        if let Some((lo, hi)) = scan.crossing {
            let gc = bisect_reference_onset(&ctx, lo, hi, 12).unwrap();
            println!("  case1 onset {gc:.5}");
        }
    }
}
