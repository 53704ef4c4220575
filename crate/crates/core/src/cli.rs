//! Batch driver behind the `casimir` binary: energy and force runs, parameter
//! sweeps and canned figure presets, all written as CSV.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::assembly::Assembler;
use crate::error::{Error, Result};
use crate::geometry::{compose, load_geometry, orientation, place_tetrahedron, Axis, Configuration, ObjectInstance, RigidTransform};
use crate::meshio::{generate_capsule, generate_sphere, generate_tetrahedron, RwgBasisSet, Vec3};
use crate::xi_quadrature::{Integrator, QuadratureSpec, SweepResult};

pub const CSV_HEADER: &str = "param_name,param_value,energy_hbar_c_per_l,force_hbar_c_per_l2,error_estimate,N_basis,wall_seconds,status";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Energy,
    Force,
    Sweep,
}

/// Object and direction for force evaluations.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceTarget {
    pub object: String,
    pub direction: Axis,
}

/// Evenly spaced values `from..=to`; a single step gives `from`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl Range {
    pub fn new(from: f64, to: f64, steps: usize) -> Result<Self> {
        let range = Range { from, to, steps };
        range.validate()?;
        Ok(range)
    }

    fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidArgument("sweep needs at least one step".into()));
        }
        if !self.from.is_finite() || !self.to.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite range {}..{}", self.from, self.to)));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.from];
        }
        let h = (self.to - self.from) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.from + h * i as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    /// Place `object` at each value of its coordinate along `axis`, keeping
    /// the other coordinates and the orientation of its file placement.
    Translate { object: String, axis: Axis, range: Range },
    /// Rotate `object` by `phi` about `z`, then `theta` about `y`, about
    /// `pivot` given in the object's own frame, before its file placement.
    Orientation { object: String, theta: Range, phi: Range, pivot: Vec3 },
}

impl SweepAxis {
    fn object(&self) -> &str {
        match self {
            SweepAxis::Translate { object, .. } | SweepAxis::Orientation { object, .. } => object,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunPlan {
    pub mode: Mode,
    pub geometry: PathBuf,
    pub force: Option<ForceTarget>,
    pub sweep: Option<SweepAxis>,
    pub quadrature: QuadratureSpec,
    /// CSV destination; standard output when absent.
    pub out: Option<PathBuf>,
    pub workers: usize,
    /// Write `M` at the smallest `κ` node here.
    pub dump_matrix: Option<PathBuf>,
}

impl RunPlan {
    pub fn new(mode: Mode, geometry: impl Into<PathBuf>) -> Self {
        RunPlan {
            mode,
            geometry: geometry.into(),
            force: None,
            sweep: None,
            quadrature: QuadratureSpec::default(),
            out: None,
            workers: default_workers(),
            dump_matrix: None,
        }
    }

    pub fn validate(&self, config: &Configuration) -> Result<()> {
        self.quadrature.validate()?;
        if self.workers == 0 {
            return Err(Error::InvalidArgument("worker count must be positive".into()));
        }
        let known = |label: &str| {
            config
                .index_of(label)
                .map(|_| ())
                .ok_or_else(|| Error::InvalidArgument(format!("no object labelled `{label}`")))
        };
        if let Some(target) = &self.force {
            known(&target.object)?;
        }
        match (&self.mode, &self.sweep) {
            (Mode::Sweep, None) => return Err(Error::InvalidArgument("sweep mode needs a sweep axis".into())),
            (Mode::Force, _) if self.force.is_none() => {
                return Err(Error::InvalidArgument("force mode needs a target object".into()))
            }
            _ => {}
        }
        if let Some(sweep) = &self.sweep {
            known(sweep.object())?;
            match sweep {
                SweepAxis::Translate { range, .. } => range.validate()?,
                SweepAxis::Orientation { theta, phi, pivot, .. } => {
                    theta.validate()?;
                    phi.validate()?;
                    if !pivot.iter().all(|v| v.is_finite()) {
                        return Err(Error::InvalidArgument("non-finite pivot".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub param_name: String,
    pub param_value: String,
    pub result: std::result::Result<SweepResult, String>,
}

impl Row {
    pub fn to_csv(&self) -> String {
        let mut line = format!("{},{},", self.param_name, self.param_value);
        match &self.result {
            Ok(r) => {
                let error = match (r.force_error, r.energy_error) {
                    (Some(f), _) => f,
                    (None, Some(e)) => e,
                    (None, None) => f64::NAN,
                };
                let _ = write!(line, "{:.10e},", r.energy);
                match r.force {
                    Some(f) => {
                        let _ = write!(line, "{f:.10e},");
                    }
                    None => line.push_str("NaN,"),
                }
                let _ = write!(line, "{error:.3e},{},{:.3},ok", r.n_basis, r.wall_seconds);
            }
            Err(message) => {
                let clean: String = message.chars().map(|c| if c == ',' || c == '\n' { ';' } else { c }).collect();
                let _ = write!(line, "NaN,NaN,NaN,0,0,error: {clean}");
            }
        }
        line
    }
}

/// CSV sink that flushes after every row.
pub struct CsvWriter {
    out: Box<dyn Write + Send>,
}

impl CsvWriter {
    pub fn new(out: Box<dyn Write + Send>) -> Result<Self> {
        let mut writer = CsvWriter { out };
        writeln!(writer.out, "{CSV_HEADER}")?;
        writer.out.flush()?;
        Ok(writer)
    }

    pub fn create(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::new(Box::new(BufWriter::new(File::create(p)?))),
            None => Self::new(Box::new(std::io::stdout())),
        }
    }

    pub fn write(&mut self, row: &Row) -> Result<()> {
        writeln!(self.out, "{}", row.to_csv())?;
        self.out.flush()?;
        Ok(())
    }
}

fn format_value(v: f64) -> String {
    format!("{v}")
}

fn evaluate(integrator: &Integrator, config: &Configuration, force: Option<(usize, Vec3)>) -> Result<SweepResult> {
    match force {
        Some((object, direction)) => integrator.force(config, object, direction),
        None => integrator.energy(config),
    }
}

/// Run `points` through one integrator, writing a row each. Returns the rows
/// and the number of failed points.
fn run_points(
    integrator: &Integrator,
    points: Vec<(String, String, Result<Configuration>)>,
    force: Option<(usize, Vec3)>,
    writer: &mut CsvWriter,
) -> Result<(Vec<Row>, usize)> {
    let mut rows = Vec::with_capacity(points.len());
    let mut failures = 0;
    for (name, value, config) in points {
        let result = config.and_then(|c| evaluate(integrator, &c, force));
        if let Err(e) = &result {
            eprintln!("{name} = {value}: {e}");
            failures += 1;
        }
        let row = Row {
            param_name: name,
            param_value: value,
            result: result.map_err(|e| e.to_string()),
        };
        writer.write(&row)?;
        rows.push(row);
    }
    Ok((rows, failures))
}

fn with_pool<T: Send>(workers: usize, job: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    faer::set_global_parallelism(faer::Par::Seq);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {workers} workers: {e}")))?;
    pool.install(job)
}

/// Energy or force runs and sweeps described by `plan`.
pub fn run(plan: &RunPlan) -> Result<Vec<Row>> {
    let config = load_geometry(&plan.geometry)?;
    plan.validate(&config)?;
    with_pool(plan.workers, || {
        let integrator = Integrator::new(plan.quadrature.clone())?;
        let force = plan.force.as_ref().map(|t| (config.index_of(&t.object).unwrap(), t.direction.unit()));
        if let Some(path) = &plan.dump_matrix {
            dump_matrix(integrator.assembler(), &config, &plan.quadrature, path)?;
        }
        let mut writer = CsvWriter::create(plan.out.as_deref())?;
        let points = match (&plan.mode, &plan.sweep) {
            (Mode::Sweep, Some(sweep)) => sweep_points(&config, sweep),
            _ => vec![("single".to_string(), "0".to_string(), Ok(config.clone()))],
        };
        let (rows, failures) = run_points(&integrator, points, force, &mut writer)?;
        if failures > 0 {
            return Err(Error::Domain(format!("{failures} of {} points failed", rows.len())));
        }
        Ok(rows)
    })
}

pub fn run_energy(plan: &RunPlan) -> Result<Vec<Row>> {
    let mut plan = plan.clone();
    plan.mode = Mode::Energy;
    plan.force = None;
    run(&plan)
}

pub fn run_force(plan: &RunPlan) -> Result<Vec<Row>> {
    let mut plan = plan.clone();
    plan.mode = Mode::Force;
    run(&plan)
}

fn dump_matrix(assembler: &Assembler, config: &Configuration, spec: &QuadratureSpec, path: &Path) -> Result<()> {
    let nodes = crate::xi_quadrature::kappa_nodes(spec.n_points, spec.scale_for(config))?;
    let m = assembler.assemble(config, nodes[0].0)?;
    m.dump(path)
}

fn sweep_points(config: &Configuration, sweep: &SweepAxis) -> Vec<(String, String, Result<Configuration>)> {
    let index = config.index_of(sweep.object()).unwrap();
    let base = config.objects()[index].transform().clone();
    match sweep {
        SweepAxis::Translate { object, axis, range } => range
            .values()
            .into_iter()
            .map(|v| {
                let current = base.apply(&Vec3::zeros()).dot(&axis.unit());
                let moved = compose(&RigidTransform::translation(axis.unit() * (v - current)), &base);
                (format!("{object}_{axis}"), format_value(v), config.with_object_transform(index, moved))
            })
            .collect(),
        SweepAxis::Orientation { theta, phi, pivot, .. } => {
            let mut points = Vec::new();
            for t in theta.values() {
                for p in phi.values() {
                    let local = orientation(t, p).about(*pivot);
                    let placed = compose(&base, &local);
                    points.push(("orientation_deg".to_string(), format!("{t}:{p}"), config.with_object_transform(index, placed)));
                }
            }
            points
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Coarse,
    Fine,
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            "fig4" => Ok(Preset::Fig4),
            _ => Err(Error::InvalidArgument(format!("unknown preset `{s}` (fig2, fig3, fig4)"))),
        }
    }
}

impl std::str::FromStr for Scale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coarse" => Ok(Scale::Coarse),
            "fine" => Ok(Scale::Fine),
            _ => Err(Error::InvalidArgument(format!("unknown scale `{s}` (coarse, fine)"))),
        }
    }
}

/// Mesh sizes for the generated preset shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    pub sphere_level: usize,
    /// Vertices per ring of a unit-radius capsule.
    pub capsule_ring: usize,
    pub tetrahedron_level: usize,
}

impl Scale {
    pub fn resolution(self) -> Resolution {
        match self {
            Scale::Coarse => Resolution { sphere_level: 2, capsule_ring: 12, tetrahedron_level: 2 },
            Scale::Fine => Resolution { sphere_level: 3, capsule_ring: 20, tetrahedron_level: 3 },
        }
    }
}

fn shared(mesh: Result<crate::meshio::TriangleMesh>) -> Result<Arc<RwgBasisSet>> {
    Ok(Arc::new(RwgBasisSet::new(Arc::new(mesh?))))
}

/// Two unit-radius spheres with surface gap `gap` along `z`.
pub fn sphere_pair(level: usize, gap: f64) -> Result<Configuration> {
    spheres(shared(generate_sphere(1.0, level))?, gap)
}

fn spheres(basis: Arc<RwgBasisSet>, gap: f64) -> Result<Configuration> {
    Configuration::new(vec![
        ObjectInstance::new("lower", basis.clone(), RigidTransform::identity()),
        ObjectInstance::new("upper", basis, RigidTransform::translation(Vec3::new(0.0, 0.0, 2.0 + gap))),
    ])
}

/// Two unit-radius capsules of total length `length` with surface gap `gap`
/// along `z`; the lower lies along `x`, the upper along `x` or, when
/// `crossed`, along `y`.
pub fn capsule_pair(ring: usize, length: f64, gap: f64, crossed: bool) -> Result<Configuration> {
    capsules(shared(generate_capsule(1.0, length, ring))?, gap, crossed)
}

fn capsules(basis: Arc<RwgBasisSet>, gap: f64, crossed: bool) -> Result<Configuration> {
    let along_x = RigidTransform::rot_y(90.0);
    let upper = if crossed { compose(&RigidTransform::rot_z(90.0), &along_x) } else { along_x.clone() };
    Configuration::new(vec![
        ObjectInstance::new("lower", basis.clone(), along_x),
        ObjectInstance::new("upper", basis, compose(&RigidTransform::translation(Vec3::new(0.0, 0.0, 2.0 + gap)), &upper)),
    ])
}

/// Two tetrahedra of edge `edge` with pivots `2 edge` apart along `y`; the
/// one at `+y` carries the orientation `(theta, phi)`.
pub fn tetrahedron_pair(level: usize, edge: f64, theta: f64, phi: f64) -> Result<Configuration> {
    tetrahedra(shared(generate_tetrahedron(edge, level))?, edge, theta, phi)
}

fn tetrahedra(basis: Arc<RwgBasisSet>, edge: f64, theta: f64, phi: f64) -> Result<Configuration> {
    Configuration::new(vec![
        ObjectInstance::new("fixed", basis.clone(), place_tetrahedron(edge, 0.0, 0.0, Vec3::zeros())),
        ObjectInstance::new("rotated", basis, place_tetrahedron(edge, theta, phi, Vec3::new(0.0, 2.0 * edge, 0.0))),
    ])
}

/// Output of one preset curve.
#[derive(Debug, Clone)]
pub struct Curve {
    pub name: String,
    pub rows: Vec<Row>,
}

/// Least-squares fit of `y = a + b/x`.
pub fn fit_inverse(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + 1.0 / x, sy + y));
    let (sxx, sxy) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + 1.0 / (x * x), b + y / x));
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-300 {
        return None;
    }
    let b = (n * sxy - sx * sy) / det;
    Some(((sy - b * sx) / n, b))
}

/// Run a figure preset, writing one CSV per curve into `out_dir`.
pub fn run_figure_presets(preset: Preset, scale: Scale, out_dir: &Path, spec: &QuadratureSpec, workers: usize) -> Result<Vec<Curve>> {
    std::fs::create_dir_all(out_dir)?;
    let res = scale.resolution();
    let fine = scale == Scale::Fine;
    with_pool(workers, || {
        let integrator = Integrator::new(spec.clone())?;
        let mut curves = Vec::new();
        let mut failed = 0;
        let mut curve = |name: String, points: Vec<(String, String, Result<Configuration>)>, force: Option<(usize, Vec3)>| -> Result<()> {
            let mut writer = CsvWriter::create(Some(&out_dir.join(format!("{name}.csv"))))?;
            let (rows, failures) = run_points(&integrator, points, force, &mut writer)?;
            failed += failures;
            integrator.assembler().clear_cache();
            curves.push(Curve { name, rows });
            Ok(())
        };
        match preset {
            Preset::Fig2 => {
                let gaps: Vec<f64> = if fine { (1..=12).map(|i| 0.5 * i as f64).collect() } else { vec![0.5, 1.0, 2.0, 4.0, 6.0] };
                let sweep = |make: &dyn Fn(f64) -> Result<Configuration>| {
                    gaps.iter().map(|&z| ("separation".to_string(), format_value(z), make(z))).collect::<Vec<_>>()
                };
                let sphere = shared(generate_sphere(1.0, res.sphere_level))?;
                let capsule = shared(generate_capsule(1.0, 6.0, res.capsule_ring))?;
                curve("fig2_spheres".into(), sweep(&|z| spheres(sphere.clone(), z)), None)?;
                curve("fig2_parallel_capsules".into(), sweep(&|z| capsules(capsule.clone(), z, false)), None)?;
                curve("fig2_crossed_capsules".into(), sweep(&|z| capsules(capsule.clone(), z, true)), None)?;
            }
            Preset::Fig3 => {
                let lengths: Vec<f64> = if fine { (2..=8).map(|i| 2.0 * i as f64).collect() } else { vec![4.0, 6.0, 8.0, 10.0, 12.0] };
                for gap in [2.0, 4.0] {
                    let points = lengths
                        .iter()
                        .map(|&l| ("length".to_string(), format_value(l), capsule_pair(res.capsule_ring, l, gap, true)))
                        .collect();
                    curve(format!("fig3_gap{gap}"), points, Some((1, Vec3::z())))?;
                }
                for c in &curves {
                    let data: Vec<(f64, f64)> = c
                        .rows
                        .iter()
                        .filter_map(|r| Some((r.param_value.parse().ok()?, r.result.as_ref().ok()?.force?.abs())))
                        .collect();
                    if let Some((a, b)) = fit_inverse(&data[data.len().saturating_sub(3)..]) {
                        eprintln!("{}: |F| ≈ a + b/L with a = {a:.6e}, b = {b:.6e}", c.name);
                    }
                }
            }
            Preset::Fig4 => {
                let steps = if fine { 13 } else { 7 };
                let tetrahedron = shared(generate_tetrahedron(1.0, res.tetrahedron_level))?;
                let mut points = Vec::new();
                for theta in Range::new(-60.0, 60.0, steps)?.values() {
                    for phi in Range::new(0.0, 120.0, steps)?.values() {
                        points.push((
                            "orientation_deg".to_string(),
                            format!("{theta}:{phi}"),
                            tetrahedra(tetrahedron.clone(), 1.0, theta, phi),
                        ));
                    }
                }
                curve("fig4_tetrahedra".into(), points, None)?;
            }
        }
        if failed > 0 {
            return Err(Error::Domain(format!("{failed} preset point(s) failed")));
        }
        Ok(curves)
    })
}
