//! Run configuration: a single TOML file with every knob explicit.
//! Unknown keys are rejected so a typo cannot silently fall back to a
//! default.

use serde::{Deserialize, Serialize};

use super::IoError;
use crate::assembly::GrowthField;
use crate::continuation::CensusConfig;
use crate::material::MaterialParams;
use crate::mesh::{DiagonalRule, Mesh};
use crate::optimizer::SolveConfig;
use crate::spectral::SpectralConfig;

/// Default bulk-to-shear base ratio of the growing layer. The layer moduli
/// ratios fix the pattern selection; this base ratio sets how close to
/// area-preserving the material is and is calibrated so the annular branch
/// loses stability at the documented growth values.
pub const DEFAULT_BULK_BASE: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub mesh: MeshSection,
    pub material: MaterialSection,
    pub solve: SolveSection,
    pub schedule: ScheduleSection,
    pub perturbation: PerturbationSection,
    pub census: CensusSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mesh: MeshSection::default(),
            material: MaterialSection::default(),
            solve: SolveSection::default(),
            schedule: ScheduleSection::default(),
            perturbation: PerturbationSection::default(),
            census: CensusSection::default(),
            output: OutputSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshSection {
    pub r_in: f64,
    pub r_out: f64,
    pub n_radial: usize,
    pub n_circ: usize,
    pub growing_layers: usize,
    /// "alternating" (default) or "uniform" quad-splitting diagonals.
    pub diagonal: DiagonalKind,
}

impl Default for MeshSection {
    fn default() -> Self {
        Self {
            r_in: 0.5,
            r_out: 1.0,
            n_radial: 12,
            n_circ: 92,
            growing_layers: 2,
            diagonal: DiagonalKind::Alternating,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalKind {
    Uniform,
    Alternating,
}

impl From<DiagonalKind> for DiagonalRule {
    fn from(k: DiagonalKind) -> Self {
        match k {
            DiagonalKind::Uniform => DiagonalRule::Uniform,
            DiagonalKind::Alternating => DiagonalRule::Alternating,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialSection {
    /// mu_ng/mu_g = K_ng/K_g.
    pub stiffness_ratio: f64,
    pub mu_g: f64,
    pub k_g: f64,
}

impl Default for MaterialSection {
    fn default() -> Self {
        Self { stiffness_ratio: 0.1, mu_g: 1.0, k_g: DEFAULT_BULK_BASE }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveSection {
    pub tol: f64,
    pub max_iter_gd: usize,
    pub max_iter_newton: usize,
    pub eig_refresh_interval: usize,
    pub step_safety: f64,
    pub trace_every: usize,
}

impl Default for SolveSection {
    fn default() -> Self {
        let d = SolveConfig::<f64>::default();
        Self {
            tol: d.tol,
            max_iter_gd: d.max_iter_gd,
            max_iter_newton: d.max_iter_newton,
            eig_refresh_interval: d.eig_refresh_interval,
            step_safety: d.step_safety,
            trace_every: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleSection {
    pub g_start: f64,
    pub g_end: f64,
    pub dg: f64,
}

impl Default for ScheduleSection {
    fn default() -> Self {
        Self { g_start: 1.0, g_end: 1.3, dg: 0.01 }
    }
}

impl ScheduleSection {
    /// The growth grid g_start, g_start + dg, ..., g_end. Errors when it
    /// would be empty or the step runs away from the end point.
    pub fn grid(&self) -> Result<Vec<f64>, IoError> {
        if self.dg == 0.0 {
            return Err(IoError::Config("schedule.dg must be nonzero".into()));
        }
        let span = self.g_end - self.g_start;
        if span == 0.0 {
            return Err(IoError::Config("empty g schedule (g_start == g_end)".into()));
        }
        if span.signum() != self.dg.signum() {
            return Err(IoError::Config(format!(
                "schedule.dg = {} runs away from g_end = {}",
                self.dg, self.g_end
            )));
        }
        let n = (span / self.dg).round().max(1.0) as usize;
        Ok((0..=n).map(|i| self.g_start + self.dg * i as f64).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbationSection {
    pub gamma: f64,
    pub eigen_index: usize,
    pub in_plane_angle_deg: f64,
}

impl Default for PerturbationSection {
    fn default() -> Self {
        Self { gamma: 0.01, eigen_index: 0, in_plane_angle_deg: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CensusSection {
    pub crease_angle_deg: f64,
    pub prominence_frac: f64,
    pub relief_floor: f64,
}

impl Default for CensusSection {
    fn default() -> Self {
        let d = CensusConfig::<f64>::default();
        Self {
            crease_angle_deg: d.crease_angle_deg,
            prominence_frac: d.prominence_frac,
            relief_floor: d.relief_floor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
    /// Growth values at which deformed snapshots are written.
    pub snapshot_g: Vec<f64>,
    pub render: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: "out".into(), snapshot_g: Vec::new(), render: false }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, IoError> {
        toml::from_str(text).map_err(|e| IoError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &std::path::Path) -> Result<Self, IoError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn build_mesh(&self) -> Result<Mesh<f64>, IoError> {
        Ok(Mesh::build_annulus_with(
            self.mesh.r_in,
            self.mesh.r_out,
            self.mesh.n_radial,
            self.mesh.n_circ,
            self.mesh.growing_layers,
            self.mesh.diagonal.into(),
        )?)
    }

    pub fn material_params(&self) -> Result<MaterialParams<f64>, IoError> {
        let r = self.material.stiffness_ratio;
        if r <= 0.0 {
            return Err(IoError::Config("material.stiffness_ratio must be positive".into()));
        }
        MaterialParams::new(
            self.material.mu_g,
            self.material.k_g,
            self.material.mu_g * r,
            self.material.k_g * r,
        )
        .map_err(|e| IoError::Config(e.to_string()))
    }

    pub fn solve_config(&self) -> SolveConfig<f64> {
        SolveConfig {
            tol: self.solve.tol,
            max_iter_gd: self.solve.max_iter_gd,
            max_iter_newton: self.solve.max_iter_newton,
            eig_refresh_interval: self.solve.eig_refresh_interval,
            step_safety: self.solve.step_safety,
            // incremental fallback keeps |dx| at 1e-3 of the outer radius
            fallback_step_len: 1e-3 * self.mesh.r_out,
            trace_every: self.solve.trace_every,
            ..SolveConfig::default()
        }
    }

    pub fn census_config(&self) -> CensusConfig<f64> {
        CensusConfig {
            crease_angle_deg: self.census.crease_angle_deg,
            prominence_frac: self.census.prominence_frac,
            relief_floor: self.census.relief_floor,
        }
    }

    pub fn spectral_config(&self) -> SpectralConfig<f64> {
        SpectralConfig::default()
    }

    pub fn growth(&self, g: f64) -> Result<GrowthField<f64>, IoError> {
        GrowthField::new(g).map_err(|e| IoError::Config(e.to_string()))
    }
}
