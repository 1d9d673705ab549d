//! Command-line front end. A scene file declares the base metric, the
//! signature, and named fields, curves, grids and Dirichlet problems;
//! subcommands then compute residual grids, invariant reports, dual
//! reconstructions, curve lengths, metric ratio scans and solves. Every
//! run validates the whole scene before computing and computes everything
//! before writing, so an invalid input never leaves a partial output
//! behind. All outputs are deterministic: the same scene, flags and seed
//! produce byte-identical bytes.

use crate::catalog;
use crate::completeness::{curve_length, metric_ratio_scan, Curve};
use crate::duality::{reconstruct_dual, DualDirection};
use crate::expr::ScalarField;
use crate::graph::{GraphSurface, Signature};
use crate::grid::{Grid, GridData};
use crate::metrics::{ConformalMetric, Region};
use crate::solver::{solve, DirichletProblem};
use crate::{Error, Point, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Parse `args` (including the program name), run the subcommand, print
/// its stdout and write its files. Returns the process exit code: 0 on
/// success, 1 when the scene or the math rejects the request, 2 on usage
/// errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (code, stdout) = run_captured(args);
    // A reader that hangs up early (say, a pager) is not an error worth
    // reporting, so the write result is dropped.
    use std::io::Write as _;
    let mut out = std::io::stdout();
    let _ = out.write_all(stdout.as_bytes());
    let _ = out.flush();
    code
}

/// Same as [`run`], but hands back what would be printed to stdout
/// instead of printing it. Output files are still written. Errors go to
/// stderr in both variants.
pub fn run_captured<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return (0, e.to_string());
        }
        Err(e) => {
            eprint!("{e}");
            return (2, String::new());
        }
    };
    configure_threads();
    match execute(cli) {
        Ok(output) => {
            for (path, bytes) in &output.files {
                if let Err(e) = std::fs::write(path, bytes) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return (1, output.stdout);
                }
            }
            (0, output.stdout)
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            (failure.code(), String::new())
        }
    }
}

fn configure_threads() {
    if let Ok(var) = std::env::var("MAXGRAPH_THREADS") {
        if let Ok(n) = var.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

#[derive(Parser)]
#[command(
    name = "maxgraph",
    version,
    about = "Geometry of spacelike graphs in Riemannian and Lorentzian products",
    max_term_width = 80
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct SceneArg {
    /// Scene file (JSON).
    #[arg(long)]
    scene: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the graph equation residual of a field on a grid (CSV).
    Residual {
        #[command(flatten)]
        scene: SceneArg,
        /// Field name from the scene, or a catalog entry name.
        #[arg(long)]
        field: String,
        /// Grid name from the scene.
        #[arg(long)]
        grid: String,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the curvature and angle identities at random sample points.
    Invariants {
        #[command(flatten)]
        scene: SceneArg,
        #[arg(long)]
        field: String,
        /// Grid whose rectangle is sampled.
        #[arg(long)]
        grid: String,
        /// Number of sample points.
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// RNG seed; identical seeds give identical reports.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct the dual graph by path integration.
    Dualize {
        #[command(flatten)]
        scene: SceneArg,
        #[arg(long)]
        field: String,
        #[arg(long)]
        grid: String,
        /// Anchor node, as `x1,x2`; the dual vanishes here.
        #[arg(long, default_value = "0,1")]
        basepoint: String,
        #[arg(long, value_enum, default_value_t = DirectionArg::MinToMax)]
        direction: DirectionArg,
        /// Closedness tolerance for certification.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Write the reconstructed grid here (.csv for CSV, else JSON);
        /// diagnostics always go to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Length of a scene curve in the induced metric of a field.
    Length {
        #[command(flatten)]
        scene: SceneArg,
        /// Curve name from the scene.
        #[arg(long)]
        curve: String,
        #[arg(long)]
        field: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Write a JSON report here in addition to the printed length.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scan the smallest eigenvalue of the induced metric against the base.
    Scan {
        #[command(flatten)]
        scene: SceneArg,
        #[arg(long)]
        field: String,
        /// Grid whose nodes are the sample points.
        #[arg(long)]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a Dirichlet problem from the scene.
    Solve {
        #[command(flatten)]
        scene: SceneArg,
        /// Problem name from the scene.
        #[arg(long)]
        problem: String,
        /// Write the solution grid here (.csv for CSV, else JSON); the
        /// report always goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in surfaces, or export one by name.
    Catalog {
        /// Entry name; omit to list all entries.
        name: Option<String>,
    },
    /// Sample a field on a grid (CSV).
    Grid {
        #[command(flatten)]
        scene: SceneArg,
        #[arg(long)]
        field: String,
        #[arg(long)]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    /// From a minimal graph to its maximal dual.
    MinToMax,
    /// From a maximal graph back to the minimal one.
    MaxToMin,
}

impl From<DirectionArg> for DualDirection {
    fn from(d: DirectionArg) -> DualDirection {
        match d {
            DirectionArg::MinToMax => DualDirection::MinimalToMaximal,
            DirectionArg::MaxToMin => DualDirection::MaximalToMinimal,
        }
    }
}

enum Failure {
    Usage(String),
    Domain(Error),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Domain(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Domain(e) => e.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Domain(e)
    }
}

struct Output {
    stdout: String,
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Output {
    fn stdout_only(stdout: String) -> Output {
        Output {
            stdout,
            files: Vec::new(),
        }
    }
}

fn execute(cli: Cli) -> std::result::Result<Output, Failure> {
    match cli.cmd {
        Cmd::Residual {
            scene,
            field,
            grid,
            out,
        } => {
            let scene = Scene::load(&scene.scene)?;
            let surface = scene.surface(&field)?;
            let grid = scene.grid(&grid)?;
            let data = GridData::sample(grid, |p| surface.residual(p))?;
            Ok(tabular_output(&data, out))
        }
        Cmd::Invariants {
            scene,
            field,
            grid,
            count,
            seed,
            out,
        } => {
            let scene = Scene::load(&scene.scene)?;
            let surface = scene.surface(&field)?;
            let grid = scene.grid(&grid)?;
            let report = invariant_sweep(&surface, grid, count, seed)?;
            Ok(json_output(report, out))
        }
        Cmd::Dualize {
            scene,
            field,
            grid,
            basepoint,
            direction,
            tol,
            out,
        } => {
            let scene = Scene::load(&scene.scene)?;
            let surface = scene.surface(&field)?;
            let grid = scene.grid(&grid)?;
            let basepoint = parse_point(&basepoint)?;
            let rec = reconstruct_dual(
                surface.u(),
                surface.metric(),
                grid,
                basepoint,
                direction.into(),
                tol,
            )?;
            let diagnostics = serde_json::json!({
                "basepoint": rec.basepoint,
                "closedness_sup": rec.closedness_sup,
                "path_independence_err": rec.path_independence_err,
                "certified": rec.certified,
            });
            let mut output = json_output(diagnostics, None);
            if let Some(path) = out {
                output.files.push(render_grid_file(&rec.values, &path)?);
            }
            Ok(output)
        }
        Cmd::Length {
            scene,
            curve,
            field,
            tol,
            out,
        } => {
            let scene = Scene::load(&scene.scene)?;
            let surface = scene.surface(&field)?;
            let curve = scene.curve(&curve)?;
            let len = curve_length(&surface, &curve, tol)?;
            if !len.converged {
                eprintln!("note: the length integral did not settle; printing a lower bound");
            }
            let mut output = Output::stdout_only(format!("{:.7}\n", len.length));
            if let Some(path) = out {
                let report = serde_json::json!({
                    "length": len.length,
                    "converged": len.converged,
                    "capped": len.capped,
                });
                output.files.push((path, pretty_json(&report).into_bytes()));
            }
            Ok(output)
        }
        Cmd::Scan {
            scene,
            field,
            grid,
            out,
        } => {
            let scene = Scene::load(&scene.scene)?;
            let surface = scene.surface(&field)?;
            let grid = scene.grid(&grid)?;
            let report = metric_ratio_scan(&surface, surface.metric(), grid.nodes())?;
            let json = serde_json::json!({
                "infimum": report.infimum,
                "argmin": report.argmin,
            });
            Ok(json_output(json, out))
        }
        Cmd::Solve {
            scene,
            problem,
            out,
        } => {
            let scene = Scene::load(&scene.scene)?;
            let prob = scene.problem(&problem)?;
            let report = solve(&prob)?;
            let json = serde_json::json!({
                "iterations": report.iterations,
                "residual_sup": report.residual_sup,
                "spacelike_margin": report.spacelike_margin,
                "margin_min_over_iterates": report.margin_min_over_iterates,
                "converged": report.converged,
            });
            let mut output = json_output(json, None);
            if let Some(path) = out {
                output.files.push(render_grid_file(&report.solution, &path)?);
            }
            Ok(output)
        }
        Cmd::Catalog { name } => {
            let json = match name {
                Some(name) => catalog_entry_json(&catalog::get_example(&name)?),
                None => {
                    let mut all = Vec::new();
                    for name in catalog::names() {
                        all.push(catalog_entry_json(&catalog::get_example(name)?));
                    }
                    serde_json::Value::Array(all)
                }
            };
            Ok(Output::stdout_only(pretty_json(&json)))
        }
        Cmd::Grid {
            scene,
            field,
            grid,
            out,
        } => {
            let scene = Scene::load(&scene.scene)?;
            let surface = scene.surface(&field)?;
            let grid = scene.grid(&grid)?;
            let data = GridData::sample(grid, |p| surface.u().value(p))?;
            Ok(tabular_output(&data, out))
        }
    }
}

fn catalog_entry_json(entry: &catalog::CatalogEntry) -> serde_json::Value {
    serde_json::json!({
        "name": entry.name(),
        "metric": entry.metric().name(),
        "signature": entry.signature(),
        "expression": entry.expression(),
        "properties": entry.properties(),
    })
}

fn invariant_sweep(
    surface: &GraphSurface,
    grid: Grid,
    count: usize,
    seed: u64,
) -> Result<serde_json::Value> {
    if count == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sups: BTreeMap<String, f64> = BTreeMap::new();
    for _ in 0..count {
        let p = [
            rng.gen_range(grid.x1[0]..=grid.x1[1]),
            rng.gen_range(grid.x2[0]..=grid.x2[1]),
        ];
        let report = surface.invariant_report(p)?;
        for (key, value) in &report.residuals {
            let sup = sups.entry(key.clone()).or_insert(0.0);
            *sup = sup.max(value.abs());
        }
    }
    Ok(serde_json::json!({
        "samples": count,
        "seed": seed,
        "sup_residuals": sups,
    }))
}

fn parse_point(text: &str) -> std::result::Result<Point, Failure> {
    let parts: Vec<&str> = text.split(',').collect();
    let bad = || Failure::Usage(format!("expected a point as `x1,x2`, got `{text}`"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let x1: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let x2: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    Ok([x1, x2])
}

fn pretty_json(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON serialization cannot fail");
    s.push('\n');
    s
}

fn json_output(value: serde_json::Value, out: Option<PathBuf>) -> Output {
    let text = pretty_json(&value);
    match out {
        Some(path) => Output {
            stdout: String::new(),
            files: vec![(path, text.into_bytes())],
        },
        None => Output::stdout_only(text),
    }
}

fn render_grid_file(data: &GridData, path: &Path) -> Result<(PathBuf, Vec<u8>)> {
    let bytes = if path.extension().is_some_and(|e| e == "csv") {
        let mut buf = Vec::new();
        data.write_csv(&mut buf)?;
        buf
    } else {
        data.to_json_string().into_bytes()
    };
    Ok((path.to_path_buf(), bytes))
}

fn tabular_output(data: &GridData, out: Option<PathBuf>) -> Output {
    let mut buf = Vec::new();
    data.write_csv(&mut buf).expect("writing to memory cannot fail");
    match out {
        Some(path) => Output {
            stdout: String::new(),
            files: vec![(path, buf)],
        },
        None => Output::stdout_only(String::from_utf8(buf).expect("CSV is UTF-8")),
    }
}

/// Scene file as written on disk.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    metric: MetricSpec,
    signature: Signature,
    #[serde(default)]
    fields: BTreeMap<String, FieldSpec>,
    #[serde(default)]
    curves: BTreeMap<String, CurveSpec>,
    #[serde(default)]
    grids: BTreeMap<String, GridSpec>,
    #[serde(default)]
    problems: BTreeMap<String, ProblemSpec>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MetricSpec {
    Preset(String),
    Conformal {
        conformal: String,
        #[serde(default)]
        region: Option<RegionSpec>,
    },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RegionSpec {
    Named(String),
    Rect { x1: [f64; 2], x2: [f64; 2] },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FieldSpec {
    Expression(String),
    Catalog { catalog: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveSpec {
    x1: String,
    x2: String,
    interval: [f64; 2],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    x1: [f64; 2],
    x2: [f64; 2],
    nx: usize,
    ny: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemSpec {
    grid: String,
    /// Field whose values provide the boundary data.
    boundary: String,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    max_iter: Option<usize>,
    #[serde(default)]
    eps_space: Option<f64>,
    /// Optional field sampled as the initial iterate.
    #[serde(default)]
    initial: Option<String>,
}

/// A fully validated scene: every expression parsed, every name resolved,
/// every grid constructed. Commands only read from it.
struct Scene {
    surfaces: BTreeMap<String, GraphSurface>,
    curves: BTreeMap<String, Curve>,
    grids: BTreeMap<String, Grid>,
    problems: BTreeMap<String, DirichletProblem>,
}

impl Scene {
    fn load(path: &Path) -> std::result::Result<Scene, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Domain(Error::Io(format!("{}: {e}", path.display()))))?;
        let file: SceneFile = serde_json::from_str(&text)
            .map_err(|e| Failure::Domain(Error::Scene(e.to_string())))?;
        Scene::build(file).map_err(Failure::Domain)
    }

    fn build(file: SceneFile) -> Result<Scene> {
        let metric = build_metric(&file.metric)?;
        let signature = file.signature;

        let mut surfaces = BTreeMap::new();
        for (name, spec) in &file.fields {
            let surface = match spec {
                FieldSpec::Expression(src) => {
                    GraphSurface::new(metric.clone(), ScalarField::parse(src)?, signature)
                }
                FieldSpec::Catalog { catalog: entry } => {
                    catalog::get_example(entry)?.surface().clone()
                }
            };
            surfaces.insert(name.clone(), surface);
        }

        let mut curves = BTreeMap::new();
        for (name, spec) in &file.curves {
            curves.insert(
                name.clone(),
                Curve::parse(&spec.x1, &spec.x2, (spec.interval[0], spec.interval[1]))?,
            );
        }

        let mut grids = BTreeMap::new();
        for (name, spec) in &file.grids {
            grids.insert(name.clone(), Grid::new(spec.x1, spec.x2, spec.nx, spec.ny)?);
        }

        let mut problems = BTreeMap::new();
        for (name, spec) in &file.problems {
            let grid = *grids
                .get(&spec.grid)
                .ok_or_else(|| Error::Scene(format!("problem `{name}` references unknown grid `{}`", spec.grid)))?;
            let boundary = surfaces
                .get(&spec.boundary)
                .ok_or_else(|| Error::Scene(format!("problem `{name}` references unknown field `{}`", spec.boundary)))?;
            let mut prob = DirichletProblem::new(
                boundary.metric().clone(),
                boundary.signature(),
                grid,
                boundary.u().clone(),
            );
            if let Some(tol) = spec.tol {
                prob.tol = tol;
            }
            if let Some(max_iter) = spec.max_iter {
                prob.max_iter = max_iter;
            }
            if let Some(eps) = spec.eps_space {
                prob.eps_space = eps;
            }
            if let Some(init) = &spec.initial {
                let init_surface = surfaces
                    .get(init)
                    .ok_or_else(|| Error::Scene(format!("problem `{name}` references unknown field `{init}`")))?;
                prob.initial = Some(GridData::sample(grid, |p| init_surface.u().value(p))?);
            }
            problems.insert(name.clone(), prob);
        }

        Ok(Scene {
            surfaces,
            curves,
            grids,
            problems,
        })
    }

    /// A named field from the scene, falling back to the catalog so the
    /// built-ins are usable without declaring them.
    fn surface(&self, name: &str) -> Result<GraphSurface> {
        if let Some(s) = self.surfaces.get(name) {
            return Ok(s.clone());
        }
        catalog::get_example(name).map(|e| e.surface().clone()).map_err(|_| {
            Error::Scene(format!(
                "field `{name}` is neither in the scene nor a catalog entry"
            ))
        })
    }

    fn grid(&self, name: &str) -> Result<Grid> {
        self.grids
            .get(name)
            .copied()
            .ok_or_else(|| Error::Scene(format!("grid `{name}` is not in the scene")))
    }

    fn curve(&self, name: &str) -> Result<Curve> {
        self.curves
            .get(name)
            .cloned()
            .ok_or_else(|| Error::Scene(format!("curve `{name}` is not in the scene")))
    }

    fn problem(&self, name: &str) -> Result<DirichletProblem> {
        self.problems
            .get(name)
            .cloned()
            .ok_or_else(|| Error::Scene(format!("problem `{name}` is not in the scene")))
    }
}

fn build_metric(spec: &MetricSpec) -> Result<ConformalMetric> {
    match spec {
        MetricSpec::Preset(name) => match name.as_str() {
            "euclidean" => Ok(ConformalMetric::euclidean()),
            "hyperbolic-half-plane" => Ok(ConformalMetric::hyperbolic_half_plane()),
            other => Err(Error::Scene(format!(
                "unknown metric preset `{other}`; use euclidean, hyperbolic-half-plane, or {{\"conformal\": \"<lambda>\"}}"
            ))),
        },
        MetricSpec::Conformal { conformal, region } => {
            let region = match region {
                None => Region::All,
                Some(RegionSpec::Named(name)) => match name.as_str() {
                    "all" => Region::All,
                    "upper-half-plane" => Region::UpperHalfPlane,
                    other => {
                        return Err(Error::Scene(format!("unknown region `{other}`")));
                    }
                },
                Some(RegionSpec::Rect { x1, x2 }) => Region::Rect { x1: *x1, x2: *x2 },
            };
            let mut label = String::new();
            write!(label, "conformal({conformal})").expect("writing to a String cannot fail");
            Ok(ConformalMetric::conformal(
                label,
                ScalarField::parse(conformal)?,
                region,
            ))
        }
    }
}
