use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use casimir_core::cli::{self, ForceTarget, Mode, Range, RunPlan, SweepAxis};
use casimir_core::geometry::Axis;
use casimir_core::meshio::Vec3;
use casimir_core::xi_quadrature::QuadratureSpec;

/// Casimir energies and forces between perfectly conducting objects.
#[derive(Parser)]
#[command(name = "casimir", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Casimir energy of a geometry.
    Energy(Common),
    /// Energy and the force on one object.
    Force(Common),
    /// Energy (and force with --object) over a translation or orientation sweep.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Canned figure sweeps on generated geometries.
    Preset {
        /// fig2, fig3 or fig4.
        name: cli::Preset,
        #[arg(long, default_value = "coarse")]
        scale: cli::Scale,
        /// Directory for the CSV files.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        quad: QuadArgs,
    },
}

#[derive(Args)]
struct QuadArgs {
    /// Gauss-Legendre points on the κ axis.
    #[arg(long, default_value_t = 24)]
    xi_points: usize,
    /// Mapping scale κ₀ (default 1/d_min).
    #[arg(long)]
    kappa_scale: Option<f64>,
    /// Rerun on the half rule and report the difference.
    #[arg(long)]
    error_estimate: bool,
    #[arg(long, default_value_t = cli::default_workers())]
    workers: usize,
}

impl QuadArgs {
    fn spec(&self) -> QuadratureSpec {
        QuadratureSpec {
            n_points: self.xi_points,
            kappa_scale: self.kappa_scale,
            error_estimate: self.error_estimate,
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    geometry: PathBuf,
    /// Object label receiving the force.
    #[arg(long)]
    object: Option<String>,
    #[arg(long, default_value = "z")]
    direction: Axis,
    /// CSV output file (default stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write M at the first κ node to this file.
    #[arg(long)]
    dump_matrix: Option<PathBuf>,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// Object moved or rotated by the sweep (default: --object).
    #[arg(long)]
    sweep_object: Option<String>,
    /// Translate along this axis.
    #[arg(long, conflicts_with_all = ["theta", "phi"])]
    axis: Option<Axis>,
    #[arg(long, allow_hyphen_values = true)]
    from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    to: Option<f64>,
    #[arg(long, default_value_t = 1)]
    steps: usize,
    /// Orientation grid `from:to:steps` for θ (degrees, about y).
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    /// Orientation grid `from:to:steps` for φ (degrees, about z).
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,
    /// Rotation origin in the object's own frame.
    #[arg(long, num_args = 3, allow_hyphen_values = true, value_names = ["X", "Y", "Z"])]
    pivot: Option<Vec<f64>>,
}

fn grid(text: Option<&str>) -> Result<Range, String> {
    let Some(text) = text else { return Range::new(0.0, 0.0, 1).map_err(|e| e.to_string()) };
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || format!("expected from:to:steps, got `{text}`");
    if parts.len() != 3 {
        return Err(bad());
    }
    let from = parts[0].parse().map_err(|_| bad())?;
    let to = parts[1].parse().map_err(|_| bad())?;
    let steps = parts[2].parse().map_err(|_| bad())?;
    Range::new(from, to, steps).map_err(|e| e.to_string())
}

fn plan(mode: Mode, common: Common, sweep: Option<SweepArgs>) -> Result<RunPlan, String> {
    let mut plan = RunPlan::new(mode, common.geometry);
    plan.force = common.object.clone().map(|object| ForceTarget { object, direction: common.direction });
    plan.quadrature = common.quad.spec();
    plan.workers = common.quad.workers;
    plan.out = common.out;
    plan.dump_matrix = common.dump_matrix;
    if let Some(s) = sweep {
        let object = s.sweep_object.or(common.object).ok_or("sweep needs --sweep-object or --object")?;
        plan.sweep = Some(match s.axis {
            Some(axis) => {
                let (from, to) = (s.from.ok_or("translation sweep needs --from")?, s.to.ok_or("translation sweep needs --to")?);
                SweepAxis::Translate { object, axis, range: Range::new(from, to, s.steps).map_err(|e| e.to_string())? }
            }
            None if s.theta.is_some() || s.phi.is_some() => SweepAxis::Orientation {
                object,
                theta: grid(s.theta.as_deref())?,
                phi: grid(s.phi.as_deref())?,
                pivot: s.pivot.map(|p| Vec3::new(p[0], p[1], p[2])).unwrap_or_else(Vec3::zeros),
            },
            None => return Err("sweep needs --axis or --theta/--phi".into()),
        });
    }
    Ok(plan)
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Energy(c) => plan(Mode::Energy, c, None).and_then(|p| cli::run(&p).map(drop).map_err(|e| e.to_string())),
        Command::Force(c) => plan(Mode::Force, c, None).and_then(|p| cli::run(&p).map(drop).map_err(|e| e.to_string())),
        Command::Sweep { common, sweep } => plan(Mode::Sweep, common, Some(sweep)).and_then(|p| cli::run(&p).map(drop).map_err(|e| e.to_string())),
        Command::Preset { name, scale, out, quad } => {
            cli::run_figure_presets(name, scale, &out, &quad.spec(), quad.workers).map(drop).map_err(|e| e.to_string())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
