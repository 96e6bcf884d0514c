//! SVG rendering of (deformed) meshes: region-colored triangulation, one
//! marker per node, crease markers, and the saddle glyph at the center.

use std::fmt::Write as _;

use crate::assembly::NodalField;
use crate::mesh::{Mesh, Region};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct RenderOptions {
    /// Canvas width in pixels; height follows the data aspect ratio.
    pub width: f64,
    /// Node ids to flag as creases.
    pub crease_nodes: Vec<usize>,
    /// Draw the saddle marker "s" at the annulus center.
    pub saddle: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self { width: 800.0, crease_nodes: Vec::new(), saddle: false }
    }
}

/// Renders the configuration as standalone SVG text. One `<circle>` element
/// is emitted per mesh node, so consumers can recover the node count from
/// the drawing.
pub fn render_svg<T: Real>(mesh: &Mesh<T>, coords: &NodalField<T>, opts: &RenderOptions) -> String {
    let pts: Vec<(f64, f64)> =
        coords.coords().iter().map(|p| (p.x.as_f64(), p.y.as_f64())).collect();
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1e-12);
    let (x0, y0, x1, y1) = (x0 - pad, y0 - pad, x1 + pad, y1 + pad);
    let scale = opts.width / (x1 - x0);
    let height = (y1 - y0) * scale;
    // SVG y grows downward; flip so the drawing keeps the math orientation
    let map = |x: f64, y: f64| ((x - x0) * scale, (y1 - y) * scale);

    let mut out = String::new();
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.1}\" height=\"{:.1}\" viewBox=\"0 0 {:.1} {:.1}\">",
        opts.width, height, opts.width, height
    )
    .unwrap();
    writeln!(out, "<g stroke=\"#4a4a4a\" stroke-width=\"0.4\">").unwrap();
    for t in 0..mesh.n_triangles() {
        let [i, j, k] = mesh.triangle(t);
        let fill = match mesh.region(t) {
            Region::Growing => "#f4c95d",
            Region::NonGrowing => "#d3dce6",
        };
        let (ax, ay) = map(pts[i].0, pts[i].1);
        let (bx, by) = map(pts[j].0, pts[j].1);
        let (cx, cy) = map(pts[k].0, pts[k].1);
        writeln!(
            out,
            "<polygon points=\"{ax:.2},{ay:.2} {bx:.2},{by:.2} {cx:.2},{cy:.2}\" fill=\"{fill}\"/>"
        )
        .unwrap();
    }
    writeln!(out, "</g>").unwrap();
    writeln!(out, "<g fill=\"#222222\">").unwrap();
    for &(x, y) in &pts {
        let (px, py) = map(x, y);
        writeln!(out, "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"0.9\"/>").unwrap();
    }
    writeln!(out, "</g>").unwrap();
    if !opts.crease_nodes.is_empty() {
        writeln!(out, "<g fill=\"none\" stroke=\"#d62828\" stroke-width=\"1.6\">").unwrap();
        for &k in &opts.crease_nodes {
            let (px, py) = map(pts[k].0, pts[k].1);
            writeln!(out, "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"6\"/>").unwrap();
        }
        writeln!(out, "</g>").unwrap();
    }
    if opts.saddle {
        let (cx, cy) = map(0.0, 0.0);
        writeln!(
            out,
            "<text x=\"{cx:.2}\" y=\"{cy:.2}\" font-size=\"{:.0}\" text-anchor=\"middle\" dominant-baseline=\"central\" fill=\"#333333\">s</text>",
            opts.width / 20.0
        )
        .unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    out
}
