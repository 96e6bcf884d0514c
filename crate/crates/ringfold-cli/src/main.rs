//! Command-line driver: mesh/solve/continue/perturb/case/render.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver hard failure,
//! 4 partial branch failure (a case or continuation finished but recorded
//! branch-level failures).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use ringfold::assembly::{GrowthField, NodalField};
use ringfold::continuation::{
    continue_branch, crease_census, perturb_and_search, BranchContext, PerturbationSpec,
};
use ringfold::experiments::{self, reference_result};
use ringfold::io::config::RunConfig;
use ringfold::io::svg::{render_svg, RenderOptions};
use ringfold::io::{self, IoError};
use ringfold::optimizer::{solve_elastic, SolveResult};
use ringfold::spectral::Classification;

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_PARTIAL: u8 = 4;

#[derive(Parser)]
#[command(
    name = "ringfold",
    about = "Growth-elasticity shape solver for bilayer annuli",
    version
)]
struct Cli {
    /// TOML run configuration; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the configuration).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the fully resolved configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the reference mesh snapshot.
    Mesh {
        /// Also write an SVG rendering.
        #[arg(long)]
        render: bool,
    },
    /// Solve the equilibrium at a growth value and write a checkpoint,
    /// snapshot, and iteration trace.
    Solve {
        /// Growth value.
        #[arg(long)]
        g: f64,
        /// Warm-start checkpoint; the annular reference state is used when
        /// omitted.
        #[arg(long)]
        from: Option<PathBuf>,
        /// Also write an SVG rendering.
        #[arg(long)]
        render: bool,
    },
    /// Continue a branch from a checkpoint across a growth schedule.
    Continue {
        /// Seed checkpoint (from `solve`, `perturb`, or a case run).
        #[arg(long)]
        seed: PathBuf,
        /// Growth step; negative continues backward. Defaults to the
        /// configured schedule step.
        #[arg(long)]
        dg: Option<f64>,
        /// Final growth value. Defaults to the configured schedule end.
        #[arg(long)]
        to: Option<f64>,
        /// Branch label for the CSV; defaults to the checkpoint label.
        #[arg(long)]
        label: Option<String>,
    },
    /// Perturb a converged state along a Hessian eigenvector and re-solve.
    Perturb {
        /// Base checkpoint.
        #[arg(long)]
        base: PathBuf,
        /// Perturbation magnitude; defaults to the configured value.
        #[arg(long)]
        gamma: Option<f64>,
        /// Ascending eigenpair index; defaults to the configured value.
        #[arg(long)]
        eigen_index: Option<usize>,
        /// In-plane angle (degrees) within a degenerate eigenplane.
        #[arg(long)]
        angle: Option<f64>,
        /// Also write an SVG rendering of the result.
        #[arg(long)]
        render: bool,
    },
    /// Run a full case study (1, 2, or 3).
    Case {
        /// Case id.
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        case: u8,
    },
    /// Render a mesh snapshot as SVG.
    Render {
        /// Snapshot file (reference or deformed).
        snapshot: PathBuf,
        /// Output SVG path; defaults to the snapshot path with .svg.
        #[arg(long)]
        out_file: Option<PathBuf>,
        /// Place the saddle marker at the center.
        #[arg(long)]
        saddle: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let mut cfg = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("configuration error: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
        },
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.output.dir = out.display().to_string();
    }

    if cli.print_config {
        print!("{}", cfg.to_toml());
        return ExitCode::SUCCESS;
    }

    let Some(command) = cli.command else {
        eprintln!("no command given; try --help");
        return ExitCode::from(EXIT_CONFIG);
    };

    match run(command, &cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let code = if e.downcast_ref::<IoError>().is_some() {
                EXIT_CONFIG
            } else if e.downcast_ref::<ringfold::optimizer::SolveError>().is_some() {
                EXIT_SOLVER
            } else {
                EXIT_SOLVER
            };
            ExitCode::from(code)
        }
    }
}

fn out_dir(cfg: &RunConfig) -> anyhow::Result<PathBuf> {
    let dir = PathBuf::from(&cfg.output.dir);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn context(cfg: &RunConfig) -> anyhow::Result<BranchContext<f64>> {
    Ok(experiments::context_for(cfg, cfg.material.stiffness_ratio)?)
}

fn write_solution(
    cfg: &RunConfig,
    ctx: &BranchContext<f64>,
    dir: &Path,
    stem: &str,
    label: &str,
    g: f64,
    result: &SolveResult<f64>,
    render: bool,
) -> anyhow::Result<()> {
    let mesh = ctx.system.mesh();
    io::write_checkpoint(&dir.join(format!("{stem}.ckpt")), label, g, &result.phi)?;
    io::write_snapshot(&dir.join(format!("{stem}.mesh")), mesh, Some(&result.phi))?;
    io::write_trace_csv(&dir.join(format!("{stem}_trace.csv")), &result.trace)?;
    if render || cfg.output.render {
        let census = crease_census(&result.phi, mesh, &ctx.census_cfg);
        let growth = GrowthField::new(g)?;
        let h = ctx.system.hessian(&result.phi, &growth)?;
        let class = ringfold::spectral::classify(&h, None, &ctx.spectral_cfg)?;
        let svg = render_svg(
            mesh,
            &result.phi,
            &RenderOptions {
                crease_nodes: census.creases.clone(),
                saddle: class == Classification::Saddle,
                ..Default::default()
            },
        );
        std::fs::write(dir.join(format!("{stem}.svg")), svg)?;
    }
    Ok(())
}

fn run(command: Command, cfg: &RunConfig) -> anyhow::Result<ExitCode> {
    match command {
        Command::Mesh { render } => {
            let mesh = cfg.build_mesh()?;
            let dir = out_dir(cfg)?;
            let path = dir.join("mesh.snapshot");
            io::write_snapshot(&path, &mesh, None)?;
            println!(
                "wrote {} ({} nodes, {} triangles)",
                path.display(),
                mesh.n_nodes(),
                mesh.n_triangles()
            );
            if render || cfg.output.render {
                let svg = render_svg(
                    &mesh,
                    &NodalField::reference(&mesh),
                    &RenderOptions::default(),
                );
                std::fs::write(dir.join("mesh.svg"), svg)?;
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Solve { g, from, render } => {
            let ctx = context(cfg)?;
            let mesh = ctx.system.mesh().clone();
            let phi0 = match &from {
                Some(path) => io::read_checkpoint(path, &mesh)?.2,
                None => reference_result(&ctx, g)?.phi,
            };
            let growth = GrowthField::new(g)?;
            let result = solve_elastic(&ctx.system, &growth, &phi0, &ctx.solve_cfg)?;
            println!(
                "g = {g}: converged = {}, residual = {:.3e}, energy = {:.6e}, iterations = {} gd + {} newton",
                result.converged, result.residual_norm, result.energy,
                result.gd_iters, result.newton_iters
            );
            let dir = out_dir(cfg)?;
            write_solution(cfg, &ctx, &dir, &format!("solve_g{g:.4}"), "solve", g, &result, render)?;
            if result.converged {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("no convergence within the iteration budget");
                Ok(ExitCode::from(EXIT_SOLVER))
            }
        }

        Command::Continue { seed, dg, to, label } => {
            let ctx = context(cfg)?;
            let mesh = ctx.system.mesh().clone();
            let (ckpt_label, g0, phi) = io::read_checkpoint(&seed, &mesh)?;
            let label = label.unwrap_or(ckpt_label);
            let dg = dg.unwrap_or(cfg.schedule.dg);
            let g_to = to.unwrap_or(cfg.schedule.g_end);
            if dg == 0.0 || g_to == g0 || (g_to - g0).signum() != dg.signum() {
                anyhow::bail!(IoError::Config(format!(
                    "empty or inconsistent schedule: from {g0} to {g_to} by {dg}"
                )));
            }
            // re-verify the seed state at its growth value
            let growth = GrowthField::new(g0)?;
            let seed_result = solve_elastic(&ctx.system, &growth, &phi, &ctx.solve_cfg)?;
            let record = continue_branch(&ctx, &seed_result, g0, g_to, dg, &label)?;
            let dir = out_dir(cfg)?;
            io::write_branch_csv(&dir.join(format!("branch_{label}.csv")), &record)?;
            if let Some(last) = record.steps.last() {
                io::write_checkpoint(
                    &dir.join(format!("{label}_g{:.4}.ckpt", last.g)),
                    &label,
                    last.g,
                    &last.phi,
                )?;
            }
            println!(
                "branch {label}: {} steps, birth {:?}, death {:?}",
                record.steps.len(),
                record.birth_g,
                record.death_g
            );
            if let Some(f) = &record.failure {
                eprintln!("branch truncated: {f}");
                return Ok(ExitCode::from(EXIT_PARTIAL));
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Perturb { base, gamma, eigen_index, angle, render } => {
            let ctx = context(cfg)?;
            let mesh = ctx.system.mesh().clone();
            let (_, g, phi) = io::read_checkpoint(&base, &mesh)?;
            let growth = GrowthField::new(g)?;
            let base_result = solve_elastic(&ctx.system, &growth, &phi, &ctx.solve_cfg)?;
            let spec = PerturbationSpec {
                eigen_index: eigen_index.unwrap_or(cfg.perturbation.eigen_index),
                gamma: gamma.unwrap_or(cfg.perturbation.gamma),
                in_plane_angle_deg: angle.unwrap_or(cfg.perturbation.in_plane_angle_deg),
            };
            let found = perturb_and_search(&ctx, &base_result, &spec, g)?;
            let census = crease_census(&found.phi, &mesh, &ctx.census_cfg);
            let distance = found.phi.distance(&base_result.phi, &mesh);
            println!(
                "perturbed (index {}, gamma {:.3e}): converged = {}, distance from base = {:.4e}, census = ({} creases, {} indentations)",
                spec.eigen_index, spec.gamma, found.converged, distance,
                census.crease_count(), census.indentation_count()
            );
            let dir = out_dir(cfg)?;
            write_solution(cfg, &ctx, &dir, &format!("perturb_g{g:.4}"), "perturbed", g, &found, render)?;
            if found.converged {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(EXIT_SOLVER))
            }
        }

        Command::Case { case } => {
            let dir = out_dir(cfg)?;
            let report = experiments::run_case(cfg, case, &dir)?;
            println!(
                "case {case}: {} branches, onset {:?}",
                report.branches.len(),
                report.onset
            );
            for (g, label) in &report.minimal_path {
                let _ = (g, label);
            }
            if report.failures.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                for f in &report.failures {
                    eprintln!("branch failure: {f}");
                }
                Ok(ExitCode::from(EXIT_PARTIAL))
            }
        }

        Command::Render { snapshot, out_file, saddle } => {
            let snap: io::MeshSnapshot<f64> = io::read_snapshot(&snapshot)?;
            let mesh = Arc::new(snap.into_mesh()?);
            let phi = NodalField::reference(&mesh);
            let census = crease_census(&phi, &mesh, &cfg.census_config());
            let svg = render_svg(
                &mesh,
                &phi,
                &RenderOptions { crease_nodes: census.creases.clone(), saddle, ..Default::default() },
            );
            let out = out_file.unwrap_or_else(|| snapshot.with_extension("svg"));
            std::fs::write(&out, svg)?;
            println!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
