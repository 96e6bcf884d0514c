//! Geometrically graded annular triangulation with region and boundary
//! metadata.
//!
//! Conventions:
//! * node indexing is ring-major, sector-minor, innermost ring first, with
//!   the angular origin at angle 0 (this keeps the assembled Hessian banded
//!   and makes eigenvector phases reproducible);
//! * every triangle is stored counterclockwise, so its reference edge matrix
//!   has a strictly positive determinant;
//! * ring radii grow geometrically by `(r_out/r_in)^(1/n_radial)`, which
//!   makes the triangles of successive layers similar.

use nalgebra::{Matrix2, Point2};
use thiserror::Error;

use crate::scalar::Real;

/// Per-triangle growth tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Growing,
    NonGrowing,
}

/// Per-node boundary tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryTag {
    /// Exterior circle, held at its reference position.
    DirichletExterior,
    /// Interior circle, traction free.
    FreeInterior,
    Bulk,
}

/// Which diagonal splits each quad cell. Crease nucleation sites can depend
/// weakly on mesh anisotropy, so the alternating variant is kept available.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiagonalRule {
    /// Every quad is split from (ring i, sector j) to (ring i+1, sector j+1).
    #[default]
    Uniform,
    /// The diagonal flips with the parity of i + j.
    Alternating,
}

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("invalid radii: need 0 < r_in < r_out, got r_in={r_in}, r_out={r_out}")]
    InvalidRadii { r_in: f64, r_out: f64 },
    #[error("invalid mesh counts: {0}")]
    InvalidCounts(String),
    #[error("triangle {0} has non-positive reference area (not counterclockwise)")]
    NotCounterclockwise(usize),
    #[error("triangle {tri} refers to node {node} out of range")]
    NodeOutOfRange { tri: usize, node: usize },
}

/// Immutable after construction; share freely across concurrent solves.
#[derive(Debug, Clone)]
pub struct Mesh<T: nalgebra::Scalar> {
    nodes: Vec<Point2<T>>,
    triangles: Vec<[usize; 3]>,
    region: Vec<Region>,
    boundary: Vec<BoundaryTag>,
    /// node index -> base index of its two scalar DOFs in the free vector
    free_dof: Vec<Option<usize>>,
    free_nodes: Vec<usize>,
}

impl<T: Real> Mesh<T> {
    /// Builds the bilayer annulus: `n_radial + 1` rings of `n_circ` nodes in
    /// geometric radial progression, two triangles per quad cell, the
    /// innermost `growing_layers` triangle layers tagged `Growing`.
    pub fn build_annulus(
        r_in: T,
        r_out: T,
        n_radial: usize,
        n_circ: usize,
        growing_layers: usize,
    ) -> Result<Self, MeshError> {
        Self::build_annulus_with(r_in, r_out, n_radial, n_circ, growing_layers, DiagonalRule::Uniform)
    }

    pub fn build_annulus_with(
        r_in: T,
        r_out: T,
        n_radial: usize,
        n_circ: usize,
        growing_layers: usize,
        diagonal: DiagonalRule,
    ) -> Result<Self, MeshError> {
        if !(r_in > T::zero() && r_in < r_out) {
            return Err(MeshError::InvalidRadii { r_in: r_in.as_f64(), r_out: r_out.as_f64() });
        }
        if n_radial < 1 {
            return Err(MeshError::InvalidCounts("n_radial must be >= 1".into()));
        }
        if n_circ < 3 {
            return Err(MeshError::InvalidCounts("n_circ must be >= 3".into()));
        }
        if growing_layers > n_radial {
            return Err(MeshError::InvalidCounts(format!(
                "growing_layers = {growing_layers} exceeds n_radial = {n_radial}"
            )));
        }

        let ratio = (r_out / r_in).powf(T::one() / T::from_count(n_radial));
        let two_pi = T::two_pi();
        let mut nodes = Vec::with_capacity((n_radial + 1) * n_circ);
        let mut boundary = Vec::with_capacity((n_radial + 1) * n_circ);
        for i in 0..=n_radial {
            let r = r_in * ratio.powi(i as i32);
            let tag = if i == 0 {
                BoundaryTag::FreeInterior
            } else if i == n_radial {
                BoundaryTag::DirichletExterior
            } else {
                BoundaryTag::Bulk
            };
            for j in 0..n_circ {
                let theta = two_pi * T::from_count(j) / T::from_count(n_circ);
                nodes.push(Point2::new(r * theta.cos(), r * theta.sin()));
                boundary.push(tag);
            }
        }

        let mut triangles = Vec::with_capacity(2 * n_radial * n_circ);
        let mut region = Vec::with_capacity(2 * n_radial * n_circ);
        for i in 0..n_radial {
            let tag = if i < growing_layers { Region::Growing } else { Region::NonGrowing };
            for j in 0..n_circ {
                let jn = (j + 1) % n_circ;
                let a = i * n_circ + j;
                let b = i * n_circ + jn;
                let c = (i + 1) * n_circ + jn;
                let d = (i + 1) * n_circ + j;
                // counterclockwise quad is (a, d, c, b); the default split runs
                // along the a-c diagonal
                let flip = matches!(diagonal, DiagonalRule::Alternating) && (i + j) % 2 == 1;
                if flip {
                    triangles.push([a, d, b]);
                    triangles.push([d, c, b]);
                } else {
                    triangles.push([a, d, c]);
                    triangles.push([a, c, b]);
                }
                region.push(tag);
                region.push(tag);
            }
        }

        Self::from_parts(nodes, triangles, region, boundary)
    }

    /// Assembles a mesh from raw parts (snapshot loading, tests), validating
    /// orientation and building the free-DOF map.
    pub fn from_parts(
        nodes: Vec<Point2<T>>,
        triangles: Vec<[usize; 3]>,
        region: Vec<Region>,
        boundary: Vec<BoundaryTag>,
    ) -> Result<Self, MeshError> {
        if region.len() != triangles.len() {
            return Err(MeshError::InvalidCounts(format!(
                "{} region tags for {} triangles",
                region.len(),
                triangles.len()
            )));
        }
        if boundary.len() != nodes.len() {
            return Err(MeshError::InvalidCounts(format!(
                "{} boundary tags for {} nodes",
                boundary.len(),
                nodes.len()
            )));
        }

        let mut free_dof = vec![None; nodes.len()];
        let mut free_nodes = Vec::new();
        let mut next = 0usize;
        for (k, tag) in boundary.iter().enumerate() {
            if *tag != BoundaryTag::DirichletExterior {
                free_dof[k] = Some(next);
                free_nodes.push(k);
                next += 2;
            }
        }

        let mesh = Self { nodes, triangles, region, boundary, free_dof, free_nodes };
        mesh.validate()?;
        Ok(mesh)
    }

    fn validate(&self) -> Result<(), MeshError> {
        for (t, tri) in self.triangles.iter().enumerate() {
            for &k in tri {
                if k >= self.nodes.len() {
                    return Err(MeshError::NodeOutOfRange { tri: t, node: k });
                }
            }
            if self.reference_area(t) <= T::zero() {
                return Err(MeshError::NotCounterclockwise(t));
            }
        }
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn nodes(&self) -> &[Point2<T>] {
        &self.nodes
    }

    pub fn node(&self, k: usize) -> Point2<T> {
        self.nodes[k]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, t: usize) -> [usize; 3] {
        self.triangles[t]
    }

    pub fn region(&self, t: usize) -> Region {
        self.region[t]
    }

    pub fn boundary(&self, k: usize) -> BoundaryTag {
        self.boundary[k]
    }

    /// Base index of node `k`'s (x, y) pair in the free-DOF vector, or None
    /// for Dirichlet nodes.
    pub fn free_dof(&self, k: usize) -> Option<usize> {
        self.free_dof[k]
    }

    pub fn free_nodes(&self) -> &[usize] {
        &self.free_nodes
    }

    pub fn n_free_dofs(&self) -> usize {
        2 * self.free_nodes.len()
    }

    /// Reference edge matrix M = [X1 - X0, X2 - X0]; det M = 2 A0 > 0.
    pub fn reference_edge_matrix(&self, t: usize) -> Matrix2<T> {
        let [k0, k1, k2] = self.triangles[t];
        let x0 = self.nodes[k0];
        let e1 = self.nodes[k1] - x0;
        let e2 = self.nodes[k2] - x0;
        Matrix2::from_columns(&[e1, e2])
    }

    /// Signed reference area (shoelace); positive for counterclockwise.
    pub fn reference_area(&self, t: usize) -> T {
        self.reference_edge_matrix(t).determinant() * T::lit(0.5)
    }

    pub fn total_reference_area(&self) -> T {
        (0..self.n_triangles()).map(|t| self.reference_area(t)).fold(T::zero(), |a, b| a + b)
    }

    /// Free-interior nodes in index order; for the annulus this walks the
    /// inner boundary counterclockwise from angle 0.
    pub fn inner_ring_nodes(&self) -> Vec<usize> {
        (0..self.n_nodes()).filter(|&k| self.boundary[k] == BoundaryTag::FreeInterior).collect()
    }

    /// Largest reference radius over Dirichlet nodes (the exterior circle).
    pub fn outer_radius(&self) -> T {
        self.nodes
            .iter()
            .zip(&self.boundary)
            .filter(|(_, tag)| **tag == BoundaryTag::DirichletExterior)
            .map(|(p, _)| p.coords.norm())
            .fold(T::zero(), |a, b| a.max(b))
    }

    pub fn inner_radius(&self) -> T {
        self.nodes
            .iter()
            .zip(&self.boundary)
            .filter(|(_, tag)| **tag == BoundaryTag::FreeInterior)
            .map(|(p, _)| p.coords.norm())
            .fold(T::zero(), |a, b| a.max(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn paper_mesh_counts_and_grading() {
        let mesh = Mesh::<f64>::build_annulus(0.5, 1.0, 12, 92, 2).unwrap();
        assert_eq!(mesh.n_nodes(), 1196);
        assert_eq!(mesh.n_triangles(), 2208);
        // ring radii in geometric progression with ratio 2^(1/12)
        let ratio = (mesh.node(92).coords.norm()) / (mesh.node(0).coords.norm());
        assert_relative_eq!(ratio, 1.059463, epsilon = 1e-5);
        // innermost two triangle layers grow: 2 layers x 92 quads x 2
        let growing = (0..mesh.n_triangles())
            .filter(|&t| mesh.region(t) == Region::Growing)
            .collect::<Vec<_>>();
        assert_eq!(growing.len(), 2 * 92 * 2);
        assert_eq!(*growing.iter().max().unwrap(), 2 * 92 * 2 - 1);
        // free DOFs exclude exactly one ring of nodes
        assert_eq!(mesh.n_free_dofs(), 2 * (1196 - 92));
    }

    #[test]
    fn minimal_annulus() {
        let mesh = Mesh::<f64>::build_annulus(0.5, 1.0, 1, 3, 0).unwrap();
        assert_eq!(mesh.n_nodes(), 6);
        assert_eq!(mesh.n_triangles(), 6);
        for t in 0..6 {
            assert!(mesh.reference_area(t) > 0.0);
            assert_eq!(mesh.region(t), Region::NonGrowing);
        }
    }

    #[test]
    fn every_triangle_is_counterclockwise_with_both_diagonal_rules() {
        for rule in [DiagonalRule::Uniform, DiagonalRule::Alternating] {
            let mesh = Mesh::<f64>::build_annulus_with(0.5, 1.0, 4, 10, 1, rule).unwrap();
            for t in 0..mesh.n_triangles() {
                assert!(mesh.reference_area(t) > 0.0, "triangle {t} under {rule:?}");
                assert!(mesh.reference_edge_matrix(t).determinant() > 0.0);
            }
        }
    }

    #[test]
    fn boundary_nodes_sit_on_their_circles() {
        let mesh = Mesh::<f64>::build_annulus(0.5, 1.0, 12, 92, 2).unwrap();
        for k in 0..mesh.n_nodes() {
            let r = mesh.node(k).coords.norm();
            match mesh.boundary(k) {
                BoundaryTag::DirichletExterior => assert_relative_eq!(r, 1.0, epsilon = 1e-12),
                BoundaryTag::FreeInterior => assert_relative_eq!(r, 0.5, epsilon = 1e-12),
                BoundaryTag::Bulk => assert!(r > 0.5 && r < 1.0),
            }
        }
        assert_relative_eq!(mesh.outer_radius(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(mesh.inner_radius(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn edge_matrix_identity_and_shoelace() {
        // unit right triangle: M is the identity by construction
        let nodes = vec![
            Point2::new(0.0f64, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ];
        let mesh = Mesh::from_parts(
            nodes,
            vec![[0, 1, 2]],
            vec![Region::NonGrowing],
            vec![BoundaryTag::Bulk; 3],
        )
        .unwrap();
        let m = mesh.reference_edge_matrix(0);
        assert_eq!(m, Matrix2::identity());
        assert_relative_eq!(mesh.reference_area(0), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn layer_areas_follow_similar_triangle_grading() {
        let (n_radial, n_circ) = (12usize, 92usize);
        let mesh = Mesh::<f64>::build_annulus(0.5, 1.0, n_radial, n_circ, 2).unwrap();
        let ratio: f64 = 2.0f64.powf(1.0 / n_radial as f64);
        for layer in 0..n_radial {
            for pos in 0..2 {
                let t = 2 * (layer * n_circ) + pos;
                let t0 = pos;
                let expect = mesh.reference_area(t0) * ratio.powi(2 * layer as i32);
                assert_relative_eq!(mesh.reference_area(t), expect, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn total_area_matches_polygonal_annulus_closed_form() {
        let (r_in, r_out, n_circ) = (0.5f64, 1.0f64, 92usize);
        let mesh = Mesh::<f64>::build_annulus(r_in, r_out, 12, n_circ, 2).unwrap();
        let poly = 0.5 * n_circ as f64 * (2.0 * std::f64::consts::PI / n_circ as f64).sin()
            * (r_out * r_out - r_in * r_in);
        assert_relative_eq!(mesh.total_reference_area(), poly, max_relative = 1e-12);
        let exact = std::f64::consts::PI * (r_out * r_out - r_in * r_in);
        let deficit = (exact - mesh.total_reference_area()) / exact;
        assert!(deficit > 0.0 && deficit < 0.003, "deficit {deficit}");
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            Mesh::<f64>::build_annulus(1.0, 0.5, 3, 8, 0),
            Err(MeshError::InvalidRadii { .. })
        ));
        assert!(matches!(
            Mesh::<f64>::build_annulus(0.5, 1.0, 0, 8, 0),
            Err(MeshError::InvalidCounts(_))
        ));
        assert!(matches!(
            Mesh::<f64>::build_annulus(0.5, 1.0, 3, 2, 0),
            Err(MeshError::InvalidCounts(_))
        ));
        assert!(matches!(
            Mesh::<f64>::build_annulus(0.5, 1.0, 3, 8, 4),
            Err(MeshError::InvalidCounts(_))
        ));
    }
}
