//! The three stiffness-ratio case studies, end to end, plus the reusable
//! protocol primitives they are built from (reference-branch scanning, onset
//! bisection, eigenmode grouping, perturbation spawning, and backward
//! cascade discovery).
//!
//! Everything here is `f64`: presets are physical numbers, not generic math.

use std::collections::BTreeMap;
use std::path::Path;

use crate::assembly::{ElasticSystem, GrowthField, NodalField};
use crate::continuation::{
    continue_branch, crease_census, g_key, minimal_energy_path, perturb_and_search,
    BranchContext, BranchRecord, Census, ContinuationError, PerturbationSpec,
};
use crate::io::config::RunConfig;
use crate::io::{self, IoError};
use crate::optimizer::{SolveConfig, SolveResult};
use crate::spectral::{smallest_k_eigenpairs, Classification};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Continuation(#[from] ContinuationError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("invalid case id {0}; expected 1, 2, or 3")]
    UnknownCase(u8),
    #[error("protocol step failed: {0}")]
    Protocol(String),
}

type Result<T> = std::result::Result<T, ExperimentError>;

/// Per-case schedule and perturbation plan.
#[derive(Debug, Clone)]
pub struct CasePreset {
    pub id: u8,
    pub stiffness_ratio: f64,
    /// Range scanned for the loss of stability of the annular branch.
    pub onset_scan: (f64, f64, f64),
    /// Upper growth bound of the case run.
    pub g_end: f64,
    /// Warn beyond this growth value (self-contact regime).
    pub g_contact_warn: Option<f64>,
    /// Fine step used while resolving branch onsets.
    pub dg_fine: f64,
    /// Coarse forward continuation step.
    pub dg_coarse: f64,
    /// Backward continuation step.
    pub dg_back: f64,
}

/// The paper-calibrated presets.
pub fn preset(id: u8) -> Result<CasePreset> {
    match id {
        1 => Ok(CasePreset {
            id: 1,
            stiffness_ratio: 0.1,
            onset_scan: (1.20, 1.40, 0.01),
            g_end: 2.0,
            g_contact_warn: Some(1.9),
            dg_fine: 0.002,
            dg_coarse: 0.01,
            dg_back: -0.005,
        }),
        2 => Ok(CasePreset {
            id: 2,
            stiffness_ratio: 0.4,
            onset_scan: (1.35, 1.55, 0.005),
            g_end: 1.60,
            g_contact_warn: None,
            dg_fine: 0.0005,
            dg_coarse: 0.002,
            dg_back: -0.0005,
        }),
        3 => Ok(CasePreset {
            id: 3,
            stiffness_ratio: 1.0,
            onset_scan: (1.55, 1.72, 0.01),
            g_end: 1.72,
            g_contact_warn: None,
            dg_fine: 0.002,
            dg_coarse: 0.005,
            dg_back: -0.005,
        }),
        other => Err(ExperimentError::UnknownCase(other)),
    }
}

/// Builds a branch context for a preset on the configured mesh.
pub fn context_for(cfg: &RunConfig, ratio: f64) -> Result<BranchContext<f64>> {
    let mut cfg = cfg.clone();
    cfg.material.stiffness_ratio = ratio;
    let mesh = std::sync::Arc::new(cfg.build_mesh()?);
    let material = cfg.material_params()?;
    let system = ElasticSystem::new(mesh, material);
    let mut ctx = BranchContext::new(system, cfg.solve_config());
    ctx.census_cfg = cfg.census_config();
    ctx.spectral_cfg = cfg.spectral_config();
    Ok(ctx)
}

/// One row of a reference-branch stability scan.
#[derive(Debug, Clone)]
pub struct ReferenceScanPoint {
    pub g: f64,
    pub lambda_min: f64,
    pub lambda_second: f64,
    pub wavenumber: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ReferenceScan {
    pub points: Vec<ReferenceScanPoint>,
    /// Bracket around the first sign change of lambda_min.
    pub crossing: Option<(f64, f64)>,
}

fn reference_lambda(
    ctx: &BranchContext<f64>,
    g: f64,
    k: usize,
) -> Result<(Vec<f64>, Vec<nalgebra::DVector<f64>>)> {
    let (phi, _) = ctx.reference_at(g)?;
    let growth = GrowthField::new(g).map_err(ContinuationError::from)?;
    let h = ctx.system.hessian(&phi, &growth).map_err(ContinuationError::from)?;
    let pairs = smallest_k_eigenpairs(&h, k, &ctx.spectral_cfg).map_err(ContinuationError::from)?;
    Ok(pairs)
}

/// Walks the annular branch over a growth grid recording the two smallest
/// eigenvalues and the wavenumber of the softest mode.
pub fn scan_reference(
    ctx: &BranchContext<f64>,
    g_from: f64,
    g_to: f64,
    dg: f64,
) -> Result<ReferenceScan> {
    let n = ((g_to - g_from) / dg).round() as usize;
    let mut points = Vec::with_capacity(n + 1);
    let mut crossing = None;
    let mut prev: Option<f64> = None;
    for i in 0..=n {
        let g = g_from + dg * i as f64;
        let (vals, vecs) = reference_lambda(ctx, g, 2)?;
        let wavenumber = crate::spectral::mode_wavenumber(&vecs[0], ctx.system.mesh());
        points.push(ReferenceScanPoint {
            g,
            lambda_min: vals[0],
            lambda_second: vals[1],
            wavenumber,
        });
        if crossing.is_none() {
            if let Some(p) = prev {
                if p > 0.0 && vals[0] < 0.0 {
                    crossing = Some((g - dg, g));
                }
            }
        }
        prev = Some(vals[0]);
    }
    Ok(ReferenceScan { points, crossing })
}

/// Bisects the reference-branch stability loss inside a bracket.
pub fn bisect_reference_onset(
    ctx: &BranchContext<f64>,
    mut lo: f64,
    mut hi: f64,
    iters: usize,
) -> Result<f64> {
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        let (vals, _) = reference_lambda(ctx, mid, 1)?;
        if vals[0] > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A near-degenerate group of Hessian eigenvalues at a reference state.
#[derive(Debug, Clone)]
pub struct ModeGroup {
    pub lambda: f64,
    pub multiplicity: usize,
    pub wavenumber: Option<usize>,
    /// Index of the group's first member in the ascending eigenlist.
    pub first_index: usize,
}

/// Groups the k smallest eigenvalues of the reference Hessian into
/// near-degenerate clusters (rotational eigenplanes appear as pairs).
pub fn mode_groups(ctx: &BranchContext<f64>, g: f64, k: usize) -> Result<Vec<ModeGroup>> {
    let (vals, vecs) = reference_lambda(ctx, g, k)?;
    let scale = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-14);
    let mut groups: Vec<ModeGroup> = Vec::new();
    let mut i = 0;
    while i < vals.len() {
        let mut j = i + 1;
        while j < vals.len() && (vals[j] - vals[i]).abs() <= 1e-3 * vals[i].abs().max(1e-3 * scale)
        {
            j += 1;
        }
        let wavenumber = crate::spectral::mode_wavenumber(&vecs[i], ctx.system.mesh());
        groups.push(ModeGroup {
            lambda: vals[i],
            multiplicity: j - i,
            wavenumber,
            first_index: i,
        });
        i = j;
    }
    Ok(groups)
}

/// Walks the reference branch and reports, for the first `n_groups`
/// eigen-groups that turn unstable, the growth value of the sign change and
/// the group's wavenumber.
pub fn unstable_mode_sequence(
    ctx: &BranchContext<f64>,
    g_from: f64,
    g_to: f64,
    dg: f64,
    n_groups: usize,
) -> Result<Vec<(f64, Option<usize>)>> {
    let mut out: Vec<(f64, Option<usize>)> = Vec::new();
    let k = 2 * n_groups + 2;
    let mut prev_negative = 0usize;
    let n = ((g_to - g_from) / dg).round() as usize;
    for i in 0..=n {
        let g = g_from + dg * i as f64;
        let groups = mode_groups(ctx, g, k)?;
        let negative: Vec<&ModeGroup> = groups.iter().filter(|m| m.lambda < 0.0).collect();
        if negative.len() > prev_negative {
            for group in negative.iter().skip(prev_negative) {
                out.push((g, group.wavenumber));
            }
            prev_negative = negative.len();
        }
        if prev_negative >= n_groups {
            break;
        }
    }
    Ok(out)
}

/// Reference state wrapped as a converged result, usable as a perturbation
/// base or continuation seed.
pub fn reference_result(ctx: &BranchContext<f64>, g: f64) -> Result<SolveResult<f64>> {
    let (phi, energy) = ctx.reference_at(g)?;
    let growth = GrowthField::new(g).map_err(ContinuationError::from)?;
    let grad = ctx.system.gradient(&phi, &growth).map_err(ContinuationError::from)?;
    Ok(SolveResult {
        phi,
        residual_norm: grad.norm(),
        energy,
        gd_iters: 0,
        newton_iters: 0,
        converged: true,
        trace: Vec::new(),
    })
}

/// Perturbs the annular state at `g` along the requested eigenpair and
/// re-solves.
pub fn spawn_from_reference(
    ctx: &BranchContext<f64>,
    g: f64,
    eigen_index: usize,
    gamma: f64,
    angle_deg: f64,
) -> Result<SolveResult<f64>> {
    let base = reference_result(ctx, g)?;
    let spec = PerturbationSpec { eigen_index, gamma, in_plane_angle_deg: angle_deg };
    Ok(perturb_and_search(ctx, &base, &spec, g)?)
}

/// First eigen-index (ascending) whose near-degenerate group carries the
/// requested circumferential wavenumber at the annular state.
pub fn eigen_index_for_wavenumber(
    ctx: &BranchContext<f64>,
    g: f64,
    m: usize,
    k_search: usize,
) -> Result<Option<usize>> {
    let groups = mode_groups(ctx, g, k_search)?;
    Ok(groups.iter().find(|grp| grp.wavenumber == Some(m)).map(|grp| grp.first_index))
}

/// Gamma ladder used when a single small kick is not enough to leave the
/// annular basin near an onset.
pub const SPAWN_GAMMAS: &[f64] = &[1e-3, 1e-2, 5e-2, 0.15, 0.5];

/// Perturbs the annular state with growing magnitudes until the solve lands
/// on a configuration distinct from it; returns the magnitude that worked.
pub fn spawn_distinct(
    ctx: &BranchContext<f64>,
    g: f64,
    eigen_index: usize,
    gammas: &[f64],
) -> Result<(SolveResult<f64>, f64)> {
    let base = reference_result(ctx, g)?;
    let merge = ctx.merge_threshold();
    for &gamma in gammas {
        let spec = PerturbationSpec { eigen_index, gamma, in_plane_angle_deg: 0.0 };
        let found = perturb_and_search(ctx, &base, &spec, g)?;
        if found.converged && found.phi.distance(&base.phi, ctx.system.mesh()) > merge {
            return Ok((found, gamma));
        }
    }
    Err(ExperimentError::Protocol(format!(
        "perturbations along eigenpair {eigen_index} at g = {g:.4} all fell back to the annulus"
    )))
}

/// Angular regularity of an indentation pattern: true when the circular
/// gaps between indentations are within 20% of uniform spacing.
pub fn is_regular_spacing(census: &Census, phi: &NodalField<f64>, total: usize) -> bool {
    if total < 2 {
        return true;
    }
    let mut angles: Vec<f64> = census
        .creases
        .iter()
        .chain(census.smooth.iter())
        .map(|&k| {
            let p = phi.node(k);
            p.y.atan2(p.x)
        })
        .collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = angles.len();
    let uniform = std::f64::consts::TAU / n as f64;
    (0..n).all(|i| {
        let next = angles[(i + 1) % n] + if i + 1 == n { std::f64::consts::TAU } else { 0.0 };
        ((next - angles[i]) - uniform).abs() <= 0.2 * uniform
    })
}

/// Census-based branch labels following the paper-style naming: smooth
/// wavenumber branches "s5", the transitional state "s_star", creased
/// branches "s_1", "s_2", ... with letter suffixes for irregular spacings.
pub struct LabelRegistry {
    taken: BTreeMap<String, usize>,
}

impl LabelRegistry {
    pub fn new() -> Self {
        Self { taken: BTreeMap::new() }
    }

    pub fn label_for(
        &mut self,
        phi: &NodalField<f64>,
        census: &Census,
        wavenumber: Option<usize>,
    ) -> String {
        let base = if census.crease_count() == 0 {
            match wavenumber.or(Some(census.indentation_count())) {
                Some(0) | None => "s0".to_string(),
                Some(m) => format!("s{m}"),
            }
        } else {
            let m = census.crease_count();
            let regular = is_regular_spacing(census, phi, census.indentation_count());
            if regular && census.smooth.is_empty() {
                format!("s_{m}")
            } else {
                format!("s_{m}x")
            }
        };
        let n = self.taken.entry(base.clone()).or_insert(0);
        *n += 1;
        if *n == 1 {
            base
        } else {
            // second distinct branch with the same signature: letter suffix
            format!("{base}{}", (b'a' + (*n - 2) as u8) as char)
        }
    }
}

impl Default for LabelRegistry {
    fn default() -> Self {
        Self::new()
    }
}

/// A discovered branch plus how it was found, for the case report.
#[derive(Debug, Clone)]
pub struct CaseBranch {
    pub record: BranchRecord<f64>,
    pub provenance: String,
}

#[derive(Debug)]
pub struct CaseReport {
    pub id: u8,
    pub stiffness_ratio: f64,
    pub onset: Option<f64>,
    pub branches: Vec<CaseBranch>,
    pub minimal_path: Vec<(f64, String)>,
    pub warnings: Vec<String>,
    /// Branch-level failures (the run continues past them).
    pub failures: Vec<String>,
}

impl CaseReport {
    pub fn branch(&self, label: &str) -> Option<&BranchRecord<f64>> {
        self.branches.iter().map(|b| &b.record).find(|r| r.label == label)
    }
}

/// Continues a seed both forward and backward, merging into one record
/// sorted by g (backward steps first). The backward leg stops at birth.
pub fn continue_both_ways(
    ctx: &BranchContext<f64>,
    seed: &SolveResult<f64>,
    g_seed: f64,
    g_floor: f64,
    g_end: f64,
    dg_back: f64,
    dg_fwd: f64,
    label: &str,
) -> Result<BranchRecord<f64>> {
    let mut forward = continue_branch(ctx, seed, g_seed, g_end, dg_fwd, label)?;
    let backward = if g_seed > g_floor && dg_back < 0.0 {
        Some(continue_branch(ctx, seed, g_seed, g_floor, dg_back, label)?)
    } else {
        None
    };
    if let Some(back) = backward {
        let mut steps = back.steps;
        steps.reverse();
        steps.pop(); // drop the duplicated seed step
        steps.extend(forward.steps.drain(..));
        forward.steps = steps;
        forward.birth_g = back.birth_g;
        if forward.fallen_into.is_none() {
            forward.fallen_into = back.fallen_into;
        }
    }
    Ok(forward)
}

/// Backward-cascade discovery: continue a branch down in g; when it dies
/// onto a different non-annular configuration, adopt that configuration as a
/// new branch seed and keep going. Returns every branch found, outermost
/// first.
pub fn backward_cascade(
    ctx: &BranchContext<f64>,
    seed: SolveResult<f64>,
    g_seed: f64,
    g_floor: f64,
    dg_back: f64,
    g_end_forward: f64,
    dg_fwd: f64,
    labels: &mut LabelRegistry,
    max_depth: usize,
) -> Result<Vec<CaseBranch>> {
    let mut out = Vec::new();
    let mut current = seed;
    let mut g_cur = g_seed;
    for depth in 0..max_depth {
        let growth = GrowthField::new(g_cur).map_err(ContinuationError::from)?;
        let census = crease_census(&current.phi, ctx.system.mesh(), &ctx.census_cfg);
        let h = ctx.system.hessian(&current.phi, &growth).map_err(ContinuationError::from)?;
        let (_, vecs) =
            smallest_k_eigenpairs(&h, 1, &ctx.spectral_cfg).map_err(ContinuationError::from)?;
        let wavenumber = crate::spectral::mode_wavenumber(&vecs[0], ctx.system.mesh());
        let label = labels.label_for(&current.phi, &census, wavenumber);
        let record = continue_both_ways(
            ctx, &current, g_cur, g_floor, g_end_forward, dg_back, dg_fwd, &label,
        )?;
        let fallen = record.fallen_into.clone();
        out.push(CaseBranch {
            record,
            provenance: if depth == 0 {
                "seed".to_string()
            } else {
                format!("fell out of the previous branch at depth {depth}")
            },
        });
        match fallen {
            Some(f) if !f.into_reference => {
                g_cur = f.g;
                let growth = GrowthField::new(g_cur).map_err(ContinuationError::from)?;
                let grad =
                    ctx.system.gradient(&f.phi, &growth).map_err(ContinuationError::from)?;
                current = SolveResult {
                    phi: f.phi,
                    residual_norm: grad.norm(),
                    energy: f.energy,
                    gd_iters: 0,
                    newton_iters: 0,
                    converged: true,
                    trace: Vec::new(),
                };
            }
            _ => break,
        }
    }
    Ok(out)
}

/// Runs one full case study and writes its outputs.
pub fn run_case(cfg: &RunConfig, id: u8, out_dir: &Path) -> Result<CaseReport> {
    let pre = preset(id)?;
    let ctx = context_for(cfg, pre.stiffness_ratio)?;
    let mut report = match id {
        1 => case1(&ctx, &pre, cfg),
        2 => case2(&ctx, &pre, cfg),
        3 => case3(&ctx, &pre, cfg),
        other => Err(ExperimentError::UnknownCase(other)),
    }?;

    if let Some(warn_g) = pre.g_contact_warn {
        for b in &report.branches {
            if b.record.steps.iter().any(|s| s.g > warn_g) {
                report.warnings.push(format!(
                    "branch {} continued past g = {warn_g}; self-contact is not modeled there",
                    b.record.label
                ));
            }
        }
    }

    write_case_outputs(&report, cfg, &ctx, out_dir)?;
    Ok(report)
}

fn seed_to_branch(
    ctx: &BranchContext<f64>,
    seed: &SolveResult<f64>,
    g: f64,
) -> Result<(Census, Option<usize>)> {
    let growth = GrowthField::new(g).map_err(ContinuationError::from)?;
    let census = crease_census(&seed.phi, ctx.system.mesh(), &ctx.census_cfg);
    let h = ctx.system.hessian(&seed.phi, &growth).map_err(ContinuationError::from)?;
    let (_, vecs) =
        smallest_k_eigenpairs(&h, 1, &ctx.spectral_cfg).map_err(ContinuationError::from)?;
    Ok((census, crate::spectral::mode_wavenumber(&vecs[0], ctx.system.mesh())))
}

/// Case 1 (ratio 0.1): smooth wrinkles and foldings. Finds the onset, spawns
/// the first three wrinkle branches from the annular state, and tracks them.
fn case1(ctx: &BranchContext<f64>, pre: &CasePreset, _cfg: &RunConfig) -> Result<CaseReport> {
    let mut report = CaseReport {
        id: 1,
        stiffness_ratio: pre.stiffness_ratio,
        onset: None,
        branches: Vec::new(),
        minimal_path: Vec::new(),
        warnings: Vec::new(),
        failures: Vec::new(),
    };

    let (s_lo, s_hi, s_dg) = pre.onset_scan;
    let scan = scan_reference(ctx, s_lo, s_hi, s_dg)?;
    let (lo, hi) = scan.crossing.ok_or_else(|| {
        ExperimentError::Protocol(format!("no stability loss in [{s_lo}, {s_hi}]"))
    })?;
    let gc = bisect_reference_onset(ctx, lo, hi, 10)?;
    report.onset = Some(gc);

    // reference branch record across the case range
    let s0_seed = reference_result(ctx, s_lo)?;
    let s0 = continue_branch(ctx, &s0_seed, s_lo, pre.g_end, pre.dg_coarse, "s0")?;
    report.branches.push(CaseBranch { record: s0, provenance: "annular branch".into() });

    // first wrinkle family: three isoenergetic members of the eigenplane
    let g1 = gc + 3.0 * pre.dg_fine;
    let (seed5, gamma5) = spawn_distinct(ctx, g1, 0, SPAWN_GAMMAS)?;
    let mut labels = LabelRegistry::new();
    labels.taken.insert("s0".into(), 1);
    for angle in [45.0, 90.0] {
        let member = spawn_from_reference(ctx, g1, 0, gamma5, angle)?;
        report.warnings.push(format!(
            "eigenplane member at {angle} deg: energy offset {:.3e}",
            (member.energy - seed5.energy).abs()
        ));
    }
    let (census5, wave5) = seed_to_branch(ctx, &seed5, g1)?;
    let label5 = labels.label_for(&seed5.phi, &census5, wave5);
    let s5 = continue_both_ways(
        ctx, &seed5, g1, gc - 0.01, pre.g_end, pre.dg_back, pre.dg_coarse, &label5,
    )?;
    report.branches.push(CaseBranch { record: s5, provenance: "perturbed s0 eigenplane".into() });

    // second and third unstable groups: born-as-saddle wrinkle branches
    let sequence = unstable_mode_sequence(ctx, gc - 0.005, s_hi + 0.12, 0.01, 3)?;
    for (g_cross, _wave) in sequence.iter().skip(1) {
        let g_spawn = g_cross + 0.005;
        let groups = mode_groups(ctx, g_spawn, 8)?;
        let unstable: Vec<&ModeGroup> = groups.iter().filter(|m| m.lambda < 0.0).collect();
        let newest = match unstable.last() {
            Some(m) => m.first_index,
            None => continue,
        };
        match spawn_saddle(ctx, g_spawn, newest) {
            Ok(seed) => {
                let (census, wave) = seed_to_branch(ctx, &seed, g_spawn)?;
                let label = labels.label_for(&seed.phi, &census, wave);
                match continue_both_ways(
                    ctx, &seed, g_spawn, g_cross - 0.02, pre.g_end, pre.dg_back, pre.dg_coarse,
                    &label,
                ) {
                    Ok(rec) => report.branches.push(CaseBranch {
                        record: rec,
                        provenance: format!("perturbed s0 at g = {g_spawn:.4}"),
                    }),
                    Err(e) => report.failures.push(format!("{label}: {e}")),
                }
            }
            Err(e) => report.failures.push(format!("saddle spawn at {g_spawn:.4}: {e}")),
        }
    }

    finish_report(ctx, pre, &mut report);
    Ok(report)
}

/// Newton-captures the critical point along an eigen-direction of the
/// annular state: short descent, then Newton, which lands on the saddle.
pub fn spawn_saddle(
    ctx: &BranchContext<f64>,
    g: f64,
    eigen_index: usize,
) -> Result<SolveResult<f64>> {
    let base = reference_result(ctx, g)?;
    let merge = ctx.merge_threshold();
    let mut quick = BranchContext::new(
        clone_system(ctx),
        SolveConfig { max_iter_gd: 2_000, ..ctx.solve_cfg.clone() },
    );
    quick.spectral_cfg = ctx.spectral_cfg.clone();
    quick.census_cfg = ctx.census_cfg.clone();
    for gamma in [1e-2, 3e-2, 0.1, 0.3] {
        let spec = PerturbationSpec { eigen_index, gamma, in_plane_angle_deg: 0.0 };
        let found = perturb_and_search(&quick, &base, &spec, g)?;
        if found.converged && found.phi.distance(&base.phi, ctx.system.mesh()) > merge {
            return Ok(found);
        }
    }
    Err(ExperimentError::Protocol(format!(
        "no distinct critical point along eigenpair {eigen_index} at g = {g:.4}"
    )))
}

fn clone_system(ctx: &BranchContext<f64>) -> ElasticSystem<f64> {
    ElasticSystem::new(ctx.system.mesh().clone(), *ctx.system.material())
}

/// Case 2 (ratio 0.4): wrinkles, the transitional irregular state, and the
/// first creased branches.
fn case2(ctx: &BranchContext<f64>, pre: &CasePreset, cfg: &RunConfig) -> Result<CaseReport> {
    let mut report = CaseReport {
        id: 2,
        stiffness_ratio: pre.stiffness_ratio,
        onset: None,
        branches: Vec::new(),
        minimal_path: Vec::new(),
        warnings: Vec::new(),
        failures: Vec::new(),
    };
    let mut labels = LabelRegistry::new();

    let (s_lo, s_hi, s_dg) = pre.onset_scan;
    let scan = scan_reference(ctx, s_lo, s_hi, s_dg)?;
    let (lo, hi) = scan.crossing.ok_or_else(|| {
        ExperimentError::Protocol(format!("no stability loss in [{s_lo}, {s_hi}]"))
    })?;
    let gc = bisect_reference_onset(ctx, lo, hi, 10)?;
    report.onset = Some(gc);

    let s0_seed = reference_result(ctx, s_lo)?;
    let s0 = continue_branch(ctx, &s0_seed, s_lo, pre.g_end, pre.dg_coarse, "s0")?;
    report.branches.push(CaseBranch { record: s0, provenance: "annular branch".into() });

    labels.taken.insert("s0".into(), 1);

    // first smooth family
    let g1 = gc + 6.0 * pre.dg_fine;
    let (seed_a, _) = spawn_distinct(ctx, g1, 0, SPAWN_GAMMAS)?;
    let (census_a, wave_a) = seed_to_branch(ctx, &seed_a, g1)?;
    let label_a = labels.label_for(&seed_a.phi, &census_a, wave_a);
    let s_a = continue_both_ways(
        ctx, &seed_a, g1, gc - 0.005, pre.g_end, pre.dg_back, pre.dg_coarse, &label_a,
    )?;
    report.branches.push(CaseBranch { record: s_a, provenance: "perturbed s0 eigenplane".into() });

    // second smooth family (born as saddle)
    let sequence = unstable_mode_sequence(ctx, gc - 0.002, s_hi + 0.05, 0.005, 2)?;
    if let Some((g_cross2, wave2)) = sequence.get(1) {
        let g_spawn = g_cross2 + 0.006;
        let idx = wave2
            .and_then(|m| eigen_index_for_wavenumber(ctx, g_spawn, m, 10).transpose())
            .transpose()?
            .unwrap_or(2);
        match spawn_saddle(ctx, g_spawn, idx) {
            Ok(seed_b) => {
                let (census_b, wave_b) = seed_to_branch(ctx, &seed_b, g_spawn)?;
                let label_b = labels.label_for(&seed_b.phi, &census_b, wave_b);
                match continue_both_ways(
                    ctx, &seed_b, g_spawn, g_cross2 - 0.01, pre.g_end, pre.dg_back, pre.dg_coarse,
                    &label_b,
                ) {
                    Ok(rec) => report
                        .branches
                        .push(CaseBranch { record: rec, provenance: "second eigenplane".into() }),
                    Err(e) => report.failures.push(format!("{label_b}: {e}")),
                }
            }
            Err(e) => report.failures.push(format!("second-family spawn: {e}")),
        }
    }

    // transitional irregular minimizer between the two wrinkle saddles
    match transitional_window(ctx, &report, pre) {
        Ok(Some(rec)) => {
            report.branches.push(CaseBranch { record: rec, provenance: "valley between s5 and s6".into() })
        }
        Ok(None) => report.warnings.push("no transitional window found".into()),
        Err(e) => report.failures.push(format!("s_star: {e}")),
    }

    // creased cascade from the unstable second wrinkle family
    match crease_branch_from_saddle(ctx, &report, pre, cfg) {
        Ok(mut found) => report.branches.append(&mut found),
        Err(e) => report.failures.push(format!("crease cascade: {e}")),
    }

    finish_report(ctx, pre, &mut report);
    Ok(report)
}

/// Scans for the window where both wrinkle families are saddles and a
/// distinct transitional minimizer exists between them.
fn transitional_window(
    ctx: &BranchContext<f64>,
    report: &CaseReport,
    pre: &CasePreset,
) -> Result<Option<BranchRecord<f64>>> {
    let first_born = report
        .branches
        .iter()
        .map(|b| &b.record)
        .filter(|r| r.label != "s0" && !r.label.contains('_'))
        .min_by(|a, b| {
            let ga = a.steps.first().map(|s| s.g).unwrap_or(f64::MAX);
            let gb = b.steps.first().map(|s| s.g).unwrap_or(f64::MAX);
            ga.partial_cmp(&gb).unwrap()
        })
        .ok_or_else(|| ExperimentError::Protocol("transitional search needs a smooth branch".into()))?;
    // first growth value where the first-born family has turned saddle
    let turn = first_born.steps.iter().find(|s| s.classification == Classification::Saddle);
    let Some(turn) = turn else { return Ok(None) };
    let g_start = turn.g;
    let merge = ctx.merge_threshold();

    // perturb the saddle s5 along its unstable direction; descent settles in
    // the valley between the two wrinkle saddles
    let base = SolveResult {
        phi: turn.phi.clone(),
        residual_norm: turn.residual,
        energy: turn.energy,
        gd_iters: 0,
        newton_iters: 0,
        converged: true,
        trace: Vec::new(),
    };
    let spec = PerturbationSpec { eigen_index: 0, gamma: 1e-3, in_plane_angle_deg: 0.0 };
    let star = perturb_and_search(ctx, &base, &spec, g_start)?;
    if !star.converged || star.phi.distance(&turn.phi, ctx.system.mesh()) < merge {
        return Ok(None);
    }
    let rec = continue_both_ways(
        ctx,
        &star,
        g_start,
        g_start - 0.01,
        g_start + 0.01,
        -pre.dg_fine,
        pre.dg_fine,
        "s_star",
    )?;
    Ok(Some(rec))
}

/// The crease discovery of case 2: perturb the saddle second wrinkle family
/// at the preset growth value with a long gradient-descent budget; the
/// iterates leave the wrinkle valley and settle on the first creased branch,
/// which is then continued both ways and chained forward.
fn crease_branch_from_saddle(
    ctx: &BranchContext<f64>,
    report: &CaseReport,
    pre: &CasePreset,
    cfg: &RunConfig,
) -> Result<Vec<CaseBranch>> {
    let saddle = report
        .branches
        .iter()
        .map(|b| &b.record)
        .filter(|r| r.label.starts_with("s6") || r.label.starts_with("s5"))
        .flat_map(|r| r.steps.iter())
        .filter(|s| s.classification == Classification::Saddle)
        .filter(|s| s.g >= 1.49)
        .min_by(|a, b| a.g.partial_cmp(&b.g).unwrap())
        .or_else(|| {
            report
                .branches
                .iter()
                .map(|b| &b.record)
                .filter(|r| r.label.starts_with("s6") || r.label.starts_with("s5"))
                .flat_map(|r| r.steps.iter())
                .filter(|s| s.classification == Classification::Saddle)
                .max_by(|a, b| a.g.partial_cmp(&b.g).unwrap())
        })
        .ok_or_else(|| ExperimentError::Protocol("no smooth saddle to perturb".into()))?;
    let g = saddle.g;

    let mut deep_ctx = BranchContext::new(
        clone_system(ctx),
        SolveConfig { max_iter_gd: cfg.solve.max_iter_gd.max(400_000), ..ctx.solve_cfg.clone() },
    );
    deep_ctx.spectral_cfg = ctx.spectral_cfg.clone();
    deep_ctx.census_cfg = ctx.census_cfg.clone();
    let base = SolveResult {
        phi: saddle.phi.clone(),
        residual_norm: saddle.residual,
        energy: saddle.energy,
        gd_iters: 0,
        newton_iters: 0,
        converged: true,
        trace: Vec::new(),
    };
    let spec = PerturbationSpec { eigen_index: 0, gamma: 0.5, in_plane_angle_deg: 0.0 };
    let creased = perturb_and_search(&deep_ctx, &base, &spec, g)?;
    let census = crease_census(&creased.phi, ctx.system.mesh(), &ctx.census_cfg);
    if census.crease_count() == 0 {
        return Err(ExperimentError::Protocol(format!(
            "perturbation at g = {g} settled on a smooth state"
        )));
    }
    let mut labels = LabelRegistry::new();
    labels.taken.insert("s5".into(), 1);
    labels.taken.insert("s6".into(), 1);
    // forward-chain through census jumps, then backward to the birth
    let mut found = Vec::new();
    let (census1, wave1) = seed_to_branch(ctx, &creased, g)?;
    let label1 = labels.label_for(&creased.phi, &census1, wave1);
    let rec = continue_both_ways(
        ctx,
        &creased,
        g,
        g - 0.03,
        pre.g_end,
        -pre.dg_fine,
        pre.dg_coarse,
        &label1,
    )?;
    let mut fallen = rec.fallen_into.clone();
    found.push(CaseBranch { record: rec, provenance: format!("perturbed saddle s6 at g = {g:.4}") });
    let mut depth = 0;
    while let Some(f) = fallen.take() {
        if f.into_reference || depth >= 4 {
            break;
        }
        depth += 1;
        let growth = GrowthField::new(f.g).map_err(ContinuationError::from)?;
        let grad = ctx.system.gradient(&f.phi, &growth).map_err(ContinuationError::from)?;
        let seed = SolveResult {
            phi: f.phi,
            residual_norm: grad.norm(),
            energy: f.energy,
            gd_iters: 0,
            newton_iters: 0,
            converged: true,
            trace: Vec::new(),
        };
        let (census, wave) = seed_to_branch(ctx, &seed, f.g)?;
        let label = labels.label_for(&seed.phi, &census, wave);
        let rec = continue_both_ways(
            ctx, &seed, f.g, f.g - 0.03, pre.g_end, -pre.dg_fine, pre.dg_coarse, &label,
        )?;
        fallen = rec.fallen_into.clone();
        found.push(CaseBranch { record: rec, provenance: "chained from census jump".into() });
    }
    Ok(found)
}

/// Case 3 (ratio 1.0): creased branches discovered by finite perturbations
/// of the still-stable annular state and backward cascades.
fn case3(ctx: &BranchContext<f64>, pre: &CasePreset, _cfg: &RunConfig) -> Result<CaseReport> {
    let mut report = CaseReport {
        id: 3,
        stiffness_ratio: pre.stiffness_ratio,
        onset: None,
        branches: Vec::new(),
        minimal_path: Vec::new(),
        warnings: Vec::new(),
        failures: Vec::new(),
    };
    let mut labels = LabelRegistry::new();
    labels.taken.insert("s0".into(), 1);

    let (s_lo, s_hi, s_dg) = pre.onset_scan;
    let scan = scan_reference(ctx, s_lo, s_hi, s_dg)?;
    if let Some((lo, hi)) = scan.crossing {
        report.onset = Some(bisect_reference_onset(ctx, lo, hi, 10)?);
    }

    let s0_seed = reference_result(ctx, s_lo)?;
    let s0 = continue_branch(ctx, &s0_seed, s_lo, pre.g_end, pre.dg_coarse, "s0")?;
    report.branches.push(CaseBranch { record: s0, provenance: "annular branch".into() });

    // finite perturbations of the (meta)stable annulus at the working point
    let g_work = report.onset.map(|gc| gc - 0.002).unwrap_or(1.70_f64.min(s_hi));
    let groups = mode_groups(ctx, g_work, 14)?;
    let mut seen_distinct = 0usize;
    for (gi, group) in groups.iter().enumerate().take(7) {
        let gamma = if gi == 0 { 1e-3 } else { 1.0 };
        match spawn_from_reference(ctx, g_work, group.first_index, gamma, 0.0) {
            Ok(seed) => {
                let distinct =
                    seed.phi.distance(&reference_result(ctx, g_work)?.phi, ctx.system.mesh())
                        > ctx.merge_threshold();
                if !distinct {
                    continue;
                }
                seen_distinct += 1;
                match backward_cascade(
                    ctx,
                    seed,
                    g_work,
                    1.58,
                    pre.dg_back,
                    pre.g_end,
                    pre.dg_coarse,
                    &mut labels,
                    4,
                ) {
                    Ok(mut found) => {
                        for b in &mut found {
                            b.provenance =
                                format!("{} (from eigen-group {gi}, gamma {gamma})", b.provenance);
                        }
                        report.branches.append(&mut found);
                    }
                    Err(e) => report.failures.push(format!("cascade from group {gi}: {e}")),
                }
            }
            Err(e) => report.failures.push(format!("perturbation along group {gi}: {e}")),
        }
    }
    if seen_distinct == 0 {
        report.failures.push("no distinct branch found from any perturbation".into());
    }

    // deduplicate branches that landed on the same configuration
    dedup_branches(ctx, &mut report);
    finish_report(ctx, pre, &mut report);
    Ok(report)
}

fn dedup_branches(ctx: &BranchContext<f64>, report: &mut CaseReport) {
    let merge = ctx.merge_threshold();
    let mut keep: Vec<CaseBranch> = Vec::new();
    for cb in report.branches.drain(..) {
        let dup = keep.iter().any(|other| {
            cb.record
                .steps
                .iter()
                .find_map(|s| other.record.step_at(s.g).map(|o| (s, o)))
                .map(|(s, o)| s.phi.distance(&o.phi, ctx.system.mesh()) < merge)
                .unwrap_or(false)
        });
        if !dup {
            keep.push(cb);
        }
    }
    report.branches = keep;
}

fn finish_report(ctx: &BranchContext<f64>, pre: &CasePreset, report: &mut CaseReport) {
    let _ = ctx;
    let mut grid: Vec<f64> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for b in &report.branches {
        for s in &b.record.steps {
            if seen.insert(g_key(s.g)) {
                grid.push(s.g);
            }
        }
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.retain(|&g| g <= pre.g_end + 1e-9);
    let records: Vec<&BranchRecord<f64>> = report.branches.iter().map(|b| &b.record).collect();
    report.minimal_path = minimal_energy_path(&records, &grid);
}

fn write_case_outputs(
    report: &CaseReport,
    cfg: &RunConfig,
    ctx: &BranchContext<f64>,
    out_dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(IoError::from)?;
    for b in &report.branches {
        let path = out_dir.join(format!("branch_{}.csv", b.record.label));
        io::write_branch_csv(&path, &b.record)?;
        if let Some(last) = b.record.steps.last() {
            let ckpt = out_dir.join(format!("{}_g{:.4}.ckpt", b.record.label, last.g));
            io::write_checkpoint(&ckpt, &b.record.label, last.g, &last.phi)?;
        }
        for &g in &cfg.output.snapshot_g {
            if let Some(step) = b.record.step_at(g) {
                let snap = out_dir.join(format!("{}_g{:.4}.mesh", b.record.label, g));
                io::write_snapshot(&snap, ctx.system.mesh(), Some(&step.phi))?;
                if cfg.output.render {
                    let census = crease_census(&step.phi, ctx.system.mesh(), &ctx.census_cfg);
                    let svg = io::svg::render_svg(
                        ctx.system.mesh(),
                        &step.phi,
                        &io::svg::RenderOptions {
                            crease_nodes: census.creases.clone(),
                            saddle: step.classification == Classification::Saddle,
                            ..Default::default()
                        },
                    );
                    std::fs::write(out_dir.join(format!("{}_g{:.4}.svg", b.record.label, g)), svg)
                        .map_err(IoError::from)?;
                }
            }
        }
    }

    let mut summary = String::new();
    use std::fmt::Write as _;
    writeln!(summary, "case {} (stiffness ratio {})", report.id, report.stiffness_ratio).unwrap();
    if let Some(gc) = report.onset {
        writeln!(summary, "annular branch loses stability at g = {gc:.6}").unwrap();
    }
    writeln!(summary, "branches:").unwrap();
    for b in &report.branches {
        let r = &b.record;
        writeln!(
            summary,
            "  {}: {} steps, g in [{:.4}, {:.4}], birth {:?}, death {:?} ({})",
            r.label,
            r.steps.len(),
            r.steps.first().map(|s| s.g).unwrap_or(f64::NAN),
            r.steps.last().map(|s| s.g).unwrap_or(f64::NAN),
            r.birth_g,
            r.death_g,
            b.provenance,
        )
        .unwrap();
    }
    writeln!(summary, "minimal-energy path:").unwrap();
    let mut last_label = String::new();
    for (g, label) in &report.minimal_path {
        if *label != last_label {
            writeln!(summary, "  from g = {g:.4}: {label}").unwrap();
            last_label = label.clone();
        }
    }
    for w in &report.warnings {
        writeln!(summary, "warning: {w}").unwrap();
    }
    for f in &report.failures {
        writeln!(summary, "failure: {f}").unwrap();
    }
    std::fs::write(out_dir.join("summary.txt"), summary).map_err(IoError::from)?;

    let config_toml = cfg.to_toml();
    io::write_manifest(&out_dir.join("manifest.toml"), &config_toml, &[("case", report.id.to_string())])?;
    Ok(())
}
