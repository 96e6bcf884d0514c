//! On-disk formats.
//!
//! * Mesh snapshots: plain text, `nodes N triangles T` header, then node and
//!   triangle lines. Deformed snapshots carry current coordinates with the
//!   reference connectivity. Coordinates use 17 significant digits so a
//!   write/read round trip is bitwise exact for f64.
//! * Checkpoints: label + growth value + full nodal coordinates, enough to
//!   restart a branch.
//! * Branch and trace CSVs.
//! * Run manifest with a content hash of the configuration.
//! * SVG rendering of deformed meshes with region coloring, crease markers,
//!   and the saddle glyph.

pub mod config;
pub mod svg;

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use nalgebra::Point2;
use thiserror::Error;

use crate::assembly::NodalField;
use crate::continuation::BranchRecord;
use crate::mesh::{BoundaryTag, Mesh, MeshError, Region};
use crate::optimizer::TraceSample;
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("snapshot does not match the mesh: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("config error: {0}")]
    Config(String),
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn boundary_tag_str(tag: BoundaryTag) -> &'static str {
    match tag {
        BoundaryTag::DirichletExterior => "dirichlet_exterior",
        BoundaryTag::FreeInterior => "free_interior",
        BoundaryTag::Bulk => "bulk",
    }
}

fn parse_boundary_tag(s: &str, line: usize) -> Result<BoundaryTag, IoError> {
    match s {
        "dirichlet_exterior" => Ok(BoundaryTag::DirichletExterior),
        "free_interior" => Ok(BoundaryTag::FreeInterior),
        "bulk" => Ok(BoundaryTag::Bulk),
        other => Err(IoError::Parse { line, msg: format!("unknown boundary tag `{other}`") }),
    }
}

fn region_str(r: Region) -> &'static str {
    match r {
        Region::Growing => "growing",
        Region::NonGrowing => "non_growing",
    }
}

fn parse_region(s: &str, line: usize) -> Result<Region, IoError> {
    match s {
        "growing" => Ok(Region::Growing),
        "non_growing" => Ok(Region::NonGrowing),
        other => Err(IoError::Parse { line, msg: format!("unknown region tag `{other}`") }),
    }
}

/// Raw snapshot contents: coordinates may be reference or deformed.
#[derive(Debug, Clone)]
pub struct MeshSnapshot<T: nalgebra::Scalar> {
    pub coords: Vec<Point2<T>>,
    pub boundary: Vec<BoundaryTag>,
    pub triangles: Vec<[usize; 3]>,
    pub region: Vec<Region>,
}

impl<T: Real> MeshSnapshot<T> {
    /// Interprets the stored coordinates as reference coordinates.
    pub fn into_mesh(self) -> Result<Mesh<T>, MeshError> {
        Mesh::from_parts(self.coords, self.triangles, self.region, self.boundary)
    }

    /// Interprets the stored coordinates as a deformed configuration of
    /// `mesh`, validating that the connectivity and tags agree.
    pub fn into_field(self, mesh: &Mesh<T>) -> Result<NodalField<T>, IoError> {
        if self.coords.len() != mesh.n_nodes() {
            return Err(IoError::Mismatch(format!(
                "{} nodes in snapshot, {} in mesh",
                self.coords.len(),
                mesh.n_nodes()
            )));
        }
        if self.triangles.len() != mesh.n_triangles() {
            return Err(IoError::Mismatch(format!(
                "{} triangles in snapshot, {} in mesh",
                self.triangles.len(),
                mesh.n_triangles()
            )));
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            if *tri != mesh.triangle(t) {
                return Err(IoError::Mismatch(format!("triangle {t} connectivity differs")));
            }
        }
        let mut x = NodalField::reference(mesh).free_vector(mesh);
        for (k, p) in self.coords.iter().enumerate() {
            if let Some(base) = mesh.free_dof(k) {
                x[base] = p.x;
                x[base + 1] = p.y;
            }
        }
        Ok(NodalField::from_free(mesh, &x))
    }
}

/// Serializes a snapshot: the reference mesh when `coords` is None, a
/// deformed configuration otherwise.
pub fn snapshot_string<T: Real>(mesh: &Mesh<T>, coords: Option<&NodalField<T>>) -> String {
    let mut out = String::new();
    writeln!(out, "nodes {} triangles {}", mesh.n_nodes(), mesh.n_triangles()).unwrap();
    for k in 0..mesh.n_nodes() {
        let p = coords.map_or(mesh.node(k), |c| c.node(k));
        writeln!(
            out,
            "{} {} {}",
            fmt17(p.x.as_f64()),
            fmt17(p.y.as_f64()),
            boundary_tag_str(mesh.boundary(k))
        )
        .unwrap();
    }
    for t in 0..mesh.n_triangles() {
        let [i, j, k] = mesh.triangle(t);
        writeln!(out, "{i} {j} {k} {}", region_str(mesh.region(t))).unwrap();
    }
    out
}

pub fn write_snapshot<T: Real>(
    path: &Path,
    mesh: &Mesh<T>,
    coords: Option<&NodalField<T>>,
) -> Result<(), IoError> {
    fs::write(path, snapshot_string(mesh, coords))?;
    Ok(())
}

pub fn read_snapshot<T: Real>(path: &Path) -> Result<MeshSnapshot<T>, IoError> {
    parse_snapshot(BufReader::new(fs::File::open(path)?))
}

pub fn parse_snapshot<T: Real>(reader: impl BufRead) -> Result<MeshSnapshot<T>, IoError> {
    let mut lines = reader.lines().enumerate();
    let (lno, header) = lines
        .next()
        .ok_or(IoError::Parse { line: 1, msg: "empty snapshot".into() })
        .and_then(|(i, r)| r.map(|s| (i + 1, s)).map_err(IoError::from))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "nodes" || parts[2] != "triangles" {
        return Err(IoError::Parse { line: lno, msg: "expected `nodes N triangles T`".into() });
    }
    let n: usize = parts[1]
        .parse()
        .map_err(|_| IoError::Parse { line: lno, msg: "bad node count".into() })?;
    let t: usize = parts[3]
        .parse()
        .map_err(|_| IoError::Parse { line: lno, msg: "bad triangle count".into() })?;

    let mut coords = Vec::with_capacity(n);
    let mut boundary = Vec::with_capacity(n);
    for _ in 0..n {
        let (lno, line) = lines
            .next()
            .ok_or(IoError::Parse { line: 0, msg: "truncated node section".into() })
            .and_then(|(i, r)| r.map(|s| (i + 1, s)).map_err(IoError::from))?;
        let p: Vec<&str> = line.split_whitespace().collect();
        if p.len() != 3 {
            return Err(IoError::Parse { line: lno, msg: "expected `x y boundary_tag`".into() });
        }
        let x: f64 =
            p[0].parse().map_err(|_| IoError::Parse { line: lno, msg: "bad x".into() })?;
        let y: f64 =
            p[1].parse().map_err(|_| IoError::Parse { line: lno, msg: "bad y".into() })?;
        coords.push(Point2::new(T::lit(x), T::lit(y)));
        boundary.push(parse_boundary_tag(p[2], lno)?);
    }
    let mut triangles = Vec::with_capacity(t);
    let mut region = Vec::with_capacity(t);
    for _ in 0..t {
        let (lno, line) = lines
            .next()
            .ok_or(IoError::Parse { line: 0, msg: "truncated triangle section".into() })
            .and_then(|(i, r)| r.map(|s| (i + 1, s)).map_err(IoError::from))?;
        let p: Vec<&str> = line.split_whitespace().collect();
        if p.len() != 4 {
            return Err(IoError::Parse { line: lno, msg: "expected `i j k region_tag`".into() });
        }
        let mut tri = [0usize; 3];
        for (slot, tok) in tri.iter_mut().zip(&p[..3]) {
            *slot = tok
                .parse()
                .map_err(|_| IoError::Parse { line: lno, msg: "bad node index".into() })?;
        }
        triangles.push(tri);
        region.push(parse_region(p[3], lno)?);
    }
    Ok(MeshSnapshot { coords, boundary, triangles, region })
}

/// Restartable solve state: label, growth value, full nodal coordinates.
pub fn write_checkpoint<T: Real>(
    path: &Path,
    label: &str,
    g: T,
    phi: &NodalField<T>,
) -> Result<(), IoError> {
    let mut out = String::new();
    writeln!(out, "ringfold-checkpoint v1").unwrap();
    writeln!(out, "label {label}").unwrap();
    writeln!(out, "g {}", fmt17(g.as_f64())).unwrap();
    writeln!(out, "nodes {}", phi.coords().len()).unwrap();
    for p in phi.coords() {
        writeln!(out, "{} {}", fmt17(p.x.as_f64()), fmt17(p.y.as_f64())).unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_checkpoint<T: Real>(
    path: &Path,
    mesh: &Mesh<T>,
) -> Result<(String, T, NodalField<T>), IoError> {
    let mut text = String::new();
    BufReader::new(fs::File::open(path)?).read_to_string(&mut text)?;
    let mut lines = text.lines().enumerate();
    let expect = |lines: &mut dyn Iterator<Item = (usize, &str)>,
                  prefix: &str|
     -> Result<(usize, String), IoError> {
        let (i, line) =
            lines.next().ok_or(IoError::Parse { line: 0, msg: "truncated checkpoint".into() })?;
        line.strip_prefix(prefix)
            .map(|rest| (i + 1, rest.trim().to_string()))
            .ok_or(IoError::Parse { line: i + 1, msg: format!("expected `{prefix}...`") })
    };
    let (_, magic) = expect(&mut lines, "ringfold-checkpoint")?;
    if magic != "v1" {
        return Err(IoError::Parse { line: 1, msg: format!("unsupported version `{magic}`") });
    }
    let (_, label) = expect(&mut lines, "label ")?;
    let (lg, g_str) = expect(&mut lines, "g ")?;
    let g: f64 =
        g_str.parse().map_err(|_| IoError::Parse { line: lg, msg: "bad growth value".into() })?;
    let (ln, n_str) = expect(&mut lines, "nodes ")?;
    let n: usize =
        n_str.parse().map_err(|_| IoError::Parse { line: ln, msg: "bad node count".into() })?;
    if n != mesh.n_nodes() {
        return Err(IoError::Mismatch(format!("{n} checkpoint nodes, {} in mesh", mesh.n_nodes())));
    }
    let mut x = NodalField::reference(mesh).free_vector(mesh);
    for k in 0..n {
        let (i, line) =
            lines.next().ok_or(IoError::Parse { line: 0, msg: "truncated coordinates".into() })?;
        let p: Vec<&str> = line.split_whitespace().collect();
        if p.len() != 2 {
            return Err(IoError::Parse { line: i + 1, msg: "expected `x y`".into() });
        }
        let px: f64 =
            p[0].parse().map_err(|_| IoError::Parse { line: i + 1, msg: "bad x".into() })?;
        let py: f64 =
            p[1].parse().map_err(|_| IoError::Parse { line: i + 1, msg: "bad y".into() })?;
        if let Some(base) = mesh.free_dof(k) {
            x[base] = T::lit(px);
            x[base + 1] = T::lit(py);
        }
    }
    Ok((label, T::lit(g), NodalField::from_free(mesh, &x)))
}

/// Branch CSV, one row per continuation step.
pub fn branch_csv<T: Real>(record: &BranchRecord<T>) -> String {
    let mut out = String::from(
        "g,energy,energy_ratio,lambda_min,distance,classification,crease_count,indentation_count,wavenumber\n",
    );
    for s in &record.steps {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            fmt17(s.g.as_f64()),
            fmt17(s.energy.as_f64()),
            s.energy_ratio.map_or(String::new(), |r| fmt17(r.as_f64())),
            fmt17(s.lambda_min.as_f64()),
            fmt17(s.distance.as_f64()),
            s.classification,
            s.crease_count,
            s.indentation_count,
            s.wavenumber.map_or(String::new(), |w| w.to_string()),
        )
        .unwrap();
    }
    out
}

pub fn write_branch_csv<T: Real>(path: &Path, record: &BranchRecord<T>) -> Result<(), IoError> {
    fs::write(path, branch_csv(record))?;
    Ok(())
}

/// Iteration-trace CSV: `iter,phase,residual,energy,step`.
pub fn trace_csv<T: Real>(trace: &[TraceSample<T>]) -> String {
    let mut out = String::from("iter,phase,residual,energy,step\n");
    for s in trace {
        writeln!(
            out,
            "{},{},{},{},{}",
            s.iter,
            s.phase,
            fmt17(s.residual.as_f64()),
            fmt17(s.energy.as_f64()),
            fmt17(s.step.as_f64()),
        )
        .unwrap();
    }
    out
}

pub fn write_trace_csv<T: Real>(path: &Path, trace: &[TraceSample<T>]) -> Result<(), IoError> {
    fs::write(path, trace_csv(trace))?;
    Ok(())
}

/// Run manifest: full configuration text plus its SHA-256, for reproducible
/// reruns.
pub fn write_manifest(path: &Path, config_toml: &str, extra: &[(&str, String)]) -> Result<(), IoError> {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(config_toml.as_bytes());
    let digest = hasher.finalize();
    let mut out = String::new();
    writeln!(out, "# ringfold run manifest").unwrap();
    writeln!(out, "config_sha256 = \"{digest:x}\"").unwrap();
    writeln!(out, "crate_version = \"{}\"", env!("CARGO_PKG_VERSION")).unwrap();
    for (k, v) in extra {
        writeln!(out, "{k} = \"{v}\"").unwrap();
    }
    writeln!(out, "\n# full configuration\n{config_toml}").unwrap();
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuation::{BranchStep, Census};
    use crate::spectral::Classification;
    use std::io::Cursor;

    #[test]
    fn snapshot_round_trip_is_bitwise() {
        let mesh = Mesh::<f64>::build_annulus(0.5, 1.0, 3, 12, 1).unwrap();
        let text = snapshot_string(&mesh, None);
        let snap: MeshSnapshot<f64> = parse_snapshot(Cursor::new(text.clone())).unwrap();
        for (k, p) in snap.coords.iter().enumerate() {
            assert_eq!(p.x, mesh.node(k).x, "node {k} x");
            assert_eq!(p.y, mesh.node(k).y, "node {k} y");
            assert_eq!(snap.boundary[k], mesh.boundary(k));
        }
        let rebuilt = snap.into_mesh().unwrap();
        assert_eq!(rebuilt.n_triangles(), mesh.n_triangles());
        // and a second serialization is identical text
        assert_eq!(snapshot_string(&rebuilt, None), text);
    }

    #[test]
    fn deformed_snapshot_reads_back_into_field() {
        let mesh = Mesh::<f64>::build_annulus(0.5, 1.0, 2, 8, 1).unwrap();
        let mut x = NodalField::reference(&mesh).free_vector(&mesh);
        for v in x.iter_mut() {
            *v *= 1.0 + 1e-3;
        }
        let phi = NodalField::from_free(&mesh, &x);
        let text = snapshot_string(&mesh, Some(&phi));
        let snap: MeshSnapshot<f64> = parse_snapshot(Cursor::new(text)).unwrap();
        let back = snap.into_field(&mesh).unwrap();
        assert_eq!(back, phi);
    }

    #[test]
    fn checkpoint_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.ckpt");
        let mesh = Mesh::<f64>::build_annulus(0.5, 1.0, 2, 8, 1).unwrap();
        let mut x = NodalField::reference(&mesh).free_vector(&mesh);
        x[3] = 0.123456789012345678;
        let phi = NodalField::from_free(&mesh, &x);
        write_checkpoint(&path, "s5", 1.2625, &phi).unwrap();
        let (label, g, back) = read_checkpoint(&path, &mesh).unwrap();
        assert_eq!(label, "s5");
        assert_eq!(g, 1.2625);
        assert_eq!(back, phi);
    }

    #[test]
    fn bad_snapshot_reports_line() {
        let text = "nodes 1 triangles 0\n0.0 0.0 nonsense_tag\n";
        let err = parse_snapshot::<f64>(Cursor::new(text)).unwrap_err();
        match err {
            IoError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn branch_csv_row_per_step() {
        let mesh = Mesh::<f64>::build_annulus(0.5, 1.0, 2, 8, 1).unwrap();
        let phi = NodalField::reference(&mesh);
        let census = Census { creases: vec![], smooth: vec![] };
        let steps: Vec<BranchStep<f64>> = (0..5)
            .map(|i| BranchStep {
                g: 1.0 + i as f64 * 0.01,
                phi: phi.clone(),
                energy: i as f64,
                residual: 1e-9,
                converged: true,
                lambda_min: 0.5,
                lambda_max: 10.0,
                classification: Classification::LocalMinimizer,
                wavenumber: Some(5),
                distance: 0.1,
                energy_ratio: Some(0.9),
                crease_count: census.crease_count(),
                indentation_count: census.indentation_count(),
            })
            .collect();
        let rec = BranchRecord {
            label: "s5".into(),
            steps,
            birth_g: None,
            death_g: None,
            fallen_into: None,
            failure: None,
        };
        let csv = branch_csv(&rec);
        assert_eq!(csv.lines().count(), 6); // header + 5 rows
        assert!(csv.lines().nth(1).unwrap().contains("minimizer"));
    }
}
