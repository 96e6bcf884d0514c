//! Shape solutions of a growing bilayer annulus by direct minimization of the
//! discretized elastic energy.
//!
//! The crate is organized around the pipeline
//!
//! ```text
//! mesh -> material -> assembly -> optimizer -> spectral -> continuation -> experiments
//! ```
//!
//! * [`mesh`] builds the geometrically graded annular triangulation with
//!   region (growing / non-growing) and boundary (fixed exterior / free
//!   interior) metadata.
//! * [`material`] is the plane neo-Hookean law: energy density, its tensor
//!   derivative, and stress measures.
//! * [`assembly`] turns a nodal configuration into total energy, analytic
//!   gradient, and analytic sparse Hessian over the free degrees of freedom.
//! * [`optimizer`] is the two-phase solver: energy-stable steepest descent
//!   with spectral step-size rules, then Newton refinement.
//! * [`spectral`] extracts extreme eigenvalues and smallest eigenpairs of the
//!   Hessian, classifies critical points, and identifies mode wavenumbers.
//! * [`continuation`] tracks solution branches over the growth parameter and
//!   computes branch diagnostics (distance, energy ratio, crease census,
//!   pitchfork fits, branch death).
//! * [`experiments`] packages the three stiffness-ratio case studies.
//! * [`io`] holds the on-disk formats: mesh snapshots, checkpoints, branch
//!   CSVs, run configs, manifests, and SVG rendering.
//!
//! All solver math is generic over the scalar type through [`scalar::Real`];
//! concrete `f64` aliases for the main types live at the crate root.

pub mod assembly;
pub mod continuation;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod material;
pub mod mesh;
pub mod optimizer;
pub mod scalar;
pub mod spectral;

pub use scalar::Real;

/// `f64` aliases for the main solver types. Double precision is what the
/// experiment presets and the CLI run; the generic forms exist for callers
/// who want `f32` (or any other `Real`) instead.
pub type Mesh64 = mesh::Mesh<f64>;
pub type NodalField64 = assembly::NodalField<f64>;
pub type GrowthField64 = assembly::GrowthField<f64>;
pub type MaterialParams64 = material::MaterialParams<f64>;
pub type ElasticSystem64 = assembly::ElasticSystem<f64>;
pub type SolveConfig64 = optimizer::SolveConfig<f64>;
pub type SolveResult64 = optimizer::SolveResult<f64>;
pub type SpectralReport64 = spectral::SpectralReport<f64>;
pub type BranchRecord64 = continuation::BranchRecord<f64>;
