//! Command-line front end.
//!
//! Every output begins with a header holding the tool version, the scene
//! hash, the sampling spec, the seed and the invocation. Exit codes: 0 on
//! success, 1 when `compare` finds the tables distinguishable, 2 for bad
//! input, 3 for numerical failures and 4 when `compare --expect-equal` finds
//! the tables distinguishable.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::flow::{trace, trace_from, FlowError, PhasePoint, TraceLimits, Trajectory, SPHERE_TOLERANCE};
use crate::geometry::{inspect_scene, livshits_pair, GeometryError, LivshitsParams, Rect, Scene, ValidationOptions};
use crate::lens::{
    boundary_distance, build_lens_table, compare_lens, entry_from_params, estimate_trapped, estimate_trapped_region, scattering_spectrum,
    LensError, LensTable, RegionGrid, SampleMode, SampleSpec, SpectrumOptions, Verdict, TIME_TOLERANCE,
};
use crate::variation::{conjugate_test, regularity_test, VariationError, CONJUGATE_TOLERANCE, RANK_TOLERANCE};
use crate::{io, svg, Vec3};

pub const EXIT_DISTINGUISHABLE: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_EXPECTED_EQUAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "lenslab", version, about = "Exterior billiards, lens data and conjugate points")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a scene and print its validation report.
    Validate(SceneArgs),
    /// Trace one entry and write the trajectory as JSONL.
    Trace(TraceArgs),
    /// Build a lens table.
    Lens(LensArgs),
    /// Estimate trapped fractions over a resolution ladder.
    Trapped(TrappedArgs),
    /// Scattering length spectrum for a pair of directions.
    Sls(SlsArgs),
    /// Compare two lens tables.
    Compare(CompareArgs),
    /// Conjugate-point test between all pairs of reflections of an orbit.
    Conjugate(VariationArgs),
    /// Rank test of the flow differentials past the exit.
    Regularity(VariationArgs),
    /// Write the Livshits scene, its deformed twin and the foci.
    Livshits(LivshitsArgs),
    /// Render a planar scene and optional trajectory as SVG.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct SceneArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Limits {
    /// Maximal number of reflections.
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Maximal travelling time.
    #[arg(long)]
    pub tmax: Option<f64>,
}

impl Limits {
    fn resolve(&self, a: f64) -> TraceLimits {
        let d = TraceLimits::for_radius(a);
        TraceLimits { max_reflections: self.nmax.unwrap_or(d.max_reflections), max_time: self.tmax.unwrap_or(d.max_time) }
    }
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub io: SceneArgs,
    /// `qx,qy,vx,vy` or `phi,psi` in 2D; `qx,qy,qz,vx,vy,vz` or
    /// `polar,azimuth,alpha,beta` in 3D.
    #[arg(long, allow_hyphen_values = true)]
    pub entry: String,
    #[command(flatten)]
    pub limits: Limits,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LensArgs {
    #[command(flatten)]
    pub io: SceneArgs,
    /// `grid:POSxDIR` or `mc:N`.
    #[arg(long)]
    pub spec: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub limits: Limits,
}

#[derive(Debug, Args)]
pub struct TrappedArgs {
    #[command(flatten)]
    pub io: SceneArgs,
    /// Comma separated ladder of specs; defaults to grid:10x10, grid:32x32,
    /// grid:100x100.
    #[arg(long)]
    pub spec: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub limits: Limits,
    /// Sample phase points inside boxes `x0,x1,y0,y1` (separated by `;`)
    /// instead of `S0`; `grid:PxD` then means a `P × P` position grid per
    /// box times `D` directions.
    #[arg(long, allow_hyphen_values = true)]
    pub region: Option<String>,
}

#[derive(Debug, Args)]
pub struct SlsArgs {
    #[command(flatten)]
    pub io: SceneArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub omega: String,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: String,
    /// Angular tolerance on the exit direction.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Impact points per axis of the incoming disc.
    #[arg(long)]
    pub impact: Option<usize>,
    #[command(flatten)]
    pub limits: Limits,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Two lens table files; alternatively give `--scene`, `--scene-b` and
    /// `--spec` to build both tables.
    pub tables: Vec<PathBuf>,
    #[arg(long)]
    pub scene: Option<PathBuf>,
    #[arg(long = "scene-b")]
    pub scene_b: Option<PathBuf>,
    #[arg(long)]
    pub spec: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub limits: Limits,
    /// Time tolerance; defaults to 1e−6 times the ball radius.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "expect-equal")]
    pub expect_equal: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VariationArgs {
    #[command(flatten)]
    pub io: SceneArgs,
    /// Entry on `S0` (as for `trace`) or any exterior start `q,v`.
    #[arg(long, allow_hyphen_values = true)]
    pub entry: String,
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub limits: Limits,
}

#[derive(Debug, Args)]
pub struct LivshitsArgs {
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Pocket deformation; defaults to 0.05 times the ball radius.
    #[arg(long)]
    pub deformation: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub entry: Option<String>,
    #[command(flatten)]
    pub limits: Limits,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn bad(message: impl Into<String>) -> Self {
        CliError { code: EXIT_BAD_INPUT, message: message.into() }
    }

    fn numeric(message: impl Into<String>) -> Self {
        CliError { code: EXIT_NUMERIC, message: message.into() }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        CliError::bad(e.to_string())
    }
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::InvalidEntry(_) | FlowError::NotScattered => CliError::bad(e.to_string()),
            _ => CliError::numeric(e.to_string()),
        }
    }
}

impl From<LensError> for CliError {
    fn from(e: LensError) -> Self {
        CliError::bad(e.to_string())
    }
}

impl From<VariationError> for CliError {
    fn from(e: VariationError) -> Self {
        match e {
            VariationError::Geometry(g) => g.into(),
            VariationError::Flow(f) => f.into(),
            VariationError::IndexOutOfRange { .. } | VariationError::TimeOutOfRange(_) => CliError::bad(e.to_string()),
            _ => CliError::numeric(e.to_string()),
        }
    }
}

struct Context {
    invocation: String,
}

impl Context {
    fn header(&self, command: &str, scene: Option<&Scene>, spec: Option<String>, seed: Option<u64>) -> Map<String, Value> {
        let mut h = Map::new();
        h.insert("version".into(), json!(crate::VERSION));
        h.insert("command".into(), json!(command));
        h.insert("scene_hash".into(), json!(scene.map(Scene::hash_hex)));
        h.insert("spec".into(), json!(spec));
        h.insert("seed".into(), json!(seed));
        h.insert("invocation".into(), json!(self.invocation));
        h
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::bad(format!("{}: {e}", path.display())))
}

fn load_scene(path: &Path) -> Result<Scene, CliError> {
    Scene::from_json(&read(path)?).map_err(|e| CliError::bad(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::bad(format!("{}: {e}", p.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::bad(e.to_string())),
    }
}

/// `{"header": .., key: value}` on one line.
fn document(header: Map<String, Value>, body: impl IntoIterator<Item = (&'static str, Value)>) -> String {
    // written by hand so that the header comes first
    let mut s = format!("{{\"header\":{}", header_line(&header));
    for (k, v) in body {
        s.push_str(&format!(",{}:{}", json!(k), io::to_json_string(&v).expect("document serializes")));
    }
    s.push_str("}\n");
    s
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

fn parse_csv(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::bad(format!("not a number: {t:?} in {s:?}"))))
        .collect()
}

fn parse_vector(s: &str, dim: usize) -> Result<Vec3, CliError> {
    let v = parse_csv(s)?;
    if v.len() != dim {
        return Err(CliError::bad(format!("{s:?} needs {dim} components")));
    }
    Ok(Vec3::new(v[0], v[1], if dim == 3 { v[2] } else { 0.0 }))
}

/// Entry from `--entry`: intrinsic coordinates (`dim` values for 2D,
/// 4 for 3D) or a position and direction (`2·dim` values).
fn parse_entry(s: &str, scene: &Scene) -> Result<PhasePoint, CliError> {
    let v = parse_csv(s)?;
    let (dim, a) = (scene.dim(), scene.ball_radius());
    let intrinsic = if dim == 2 { 2 } else { 4 };
    if v.len() == intrinsic {
        return Ok(entry_from_params(&v, a, dim)?.point);
    }
    if v.len() != 2 * dim {
        return Err(CliError::bad(format!("--entry needs {intrinsic} intrinsic or {} Cartesian values", 2 * dim)));
    }
    let q = Vec3::new(v[0], v[1], if dim == 3 { v[2] } else { 0.0 });
    let d = Vec3::new(v[dim], v[dim + 1], if dim == 3 { v[5] } else { 0.0 });
    if !(d.norm() > 0.0) {
        return Err(CliError::bad("direction must be nonzero"));
    }
    Ok(PhasePoint::new(q, d))
}

/// Traces from `S0` when the start lies on it, from the interior otherwise.
fn trace_any(scene: &Scene, p: &PhasePoint, limits: &TraceLimits) -> Result<Trajectory, CliError> {
    let a = scene.ball_radius();
    if (p.q.norm() - a).abs() <= SPHERE_TOLERANCE * a {
        Ok(trace(scene, p, limits)?)
    } else if p.q.norm() < a {
        Ok(trace_from(scene, p, limits)?)
    } else {
        Err(CliError::bad("start lies outside the ball"))
    }
}

fn parse_spec(s: &str, seed: u64, limits: &Limits, a: f64) -> Result<SampleSpec, CliError> {
    let mode: SampleMode = s.parse()?;
    let l = limits.resolve(a);
    Ok(SampleSpec { mode, seed, max_reflections: l.max_reflections, max_time: l.max_time })
}

fn parse_region(s: &str) -> Result<Vec<Rect>, CliError> {
    s.split(';')
        .map(|b| {
            let v = parse_csv(b)?;
            match v[..] {
                [x0, x1, y0, y1] if x0 < x1 && y0 < y1 => Ok(([x0, x1], [y0, y1])),
                _ => Err(CliError::bad(format!("box {b:?} must be x0,x1,y0,y1 with x0 < x1, y0 < y1"))),
            }
        })
        .collect()
}

/// Parses `argv` (including the program name), runs the command and
/// returns the exit code. Normal output goes to `stdout` unless `--out`
/// is given; messages go to `stderr`.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_BAD_INPUT } else { 0 };
            let _ = if code == 0 { write!(stdout, "{e}") } else { write!(stderr, "{e}") };
            return code;
        }
    };
    let invocation = argv.iter().skip(1).map(|s| s.to_string_lossy().into_owned()).collect::<Vec<_>>().join(" ");
    let ctx = Context { invocation };
    match dispatch(&ctx, cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

fn dispatch(ctx: &Context, command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Validate(args) => {
            let scene = load_scene(&args.scene)?;
            let report = inspect_scene(&scene, &ValidationOptions::default());
            let doc = document(ctx.header("validate", Some(&scene), None, None), [("report", to_value(&report))]);
            emit(args.out.as_deref(), &doc, stdout)?;
            if !report.passed {
                let _ = writeln!(stderr, "error: scene failed validation");
                return Ok(EXIT_BAD_INPUT);
            }
            Ok(0)
        }
        Command::Trace(args) => {
            let scene = load_scene(&args.io.scene)?;
            let limits = args.limits.resolve(scene.ball_radius());
            let entry = parse_entry(&args.entry, &scene)?;
            let traj = trace_any(&scene, &entry, &limits)?;
            let header = ctx.header("trace", Some(&scene), None, None);
            emit(args.io.out.as_deref(), &traj.to_jsonl(scene.dim(), header.clone()), stdout)?;
            if let Some(path) = &args.svg {
                write_svg(&scene, std::slice::from_ref(&traj), &header, path)?;
            }
            Ok(0)
        }
        Command::Lens(args) => {
            let scene = load_scene(&args.io.scene)?;
            let spec = parse_spec(&args.spec, args.seed, &args.limits, scene.ball_radius())?;
            let table = build_lens_table(&scene, &spec);
            let header = ctx.header("lens", Some(&scene), Some(spec.mode.to_string()), Some(spec.seed));
            let csv = args.io.out.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")));
            let text = if csv {
                let mut h = table.header();
                h.extend(header);
                format!("# {}\n{}", io::to_json_string(&Value::Object(h)).expect("header serializes"), table.to_csv())
            } else {
                table.to_jsonl(&header)
            };
            emit(args.io.out.as_deref(), &text, stdout)?;
            Ok(0)
        }
        Command::Trapped(args) => {
            let scene = load_scene(&args.io.scene)?;
            let a = scene.ball_radius();
            let ladder_text = args.spec.clone().unwrap_or_else(|| "grid:10x10,grid:32x32,grid:100x100".into());
            let specs = ladder_text.split(',').map(|s| parse_spec(s.trim(), args.seed, &args.limits, a)).collect::<Result<Vec<_>, _>>()?;
            let estimate = match &args.region {
                None => estimate_trapped(&scene, &specs)?,
                Some(r) => {
                    let boxes = parse_region(r)?;
                    let grids = specs
                        .iter()
                        .map(|s| match s.mode {
                            SampleMode::Grid { positions, directions } => Ok(RegionGrid { per_side: positions, directions }),
                            SampleMode::MonteCarlo { .. } => Err(CliError::bad("region sampling needs grid specs")),
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    estimate_trapped_region(&scene, &boxes, &grids, &args.limits.resolve(a))?
                }
            };
            let mut header = ctx.header("trapped", Some(&scene), Some(ladder_text), Some(args.seed));
            header.insert("heuristic".into(), json!("cluster_radius is a heuristic diagnostic and proves nothing about connectivity"));
            let doc = document(header, [("estimate", to_value(&estimate))]);
            emit(args.io.out.as_deref(), &doc, stdout)?;
            Ok(0)
        }
        Command::Sls(args) => {
            let scene = load_scene(&args.io.scene)?;
            let a = scene.ball_radius();
            let omega = parse_vector(&args.omega, scene.dim())?;
            let theta = parse_vector(&args.theta, scene.dim())?;
            let mut opts = SpectrumOptions::new(a, scene.dim());
            if let Some(t) = args.tol {
                opts.angular_tolerance = t;
            }
            if let Some(n) = args.impact {
                opts.impact_samples = n;
            }
            let bins = scattering_spectrum(&scene, &omega, &theta, &opts, &args.limits.resolve(a))?;
            let mut header = ctx.header("sls", Some(&scene), None, None);
            header.insert("options".into(), to_value(&opts));
            header.insert("bins".into(), json!(bins.len()));
            let mut text = io::to_json_string(&Value::Object(header)).expect("header serializes");
            text.push('\n');
            for b in &bins {
                text.push_str(&io::to_json_string(b).expect("bin serializes"));
                text.push('\n');
            }
            emit(args.io.out.as_deref(), &text, stdout)?;
            Ok(0)
        }
        Command::Compare(args) => compare(ctx, &args, stdout),
        Command::Conjugate(args) => {
            let scene = load_scene(&args.io.scene)?;
            let traj = trace_any(&scene, &parse_entry(&args.entry, &scene)?, &args.limits.resolve(scene.ball_radius()))?;
            let tol = args.tol.unwrap_or(CONJUGATE_TOLERANCE);
            let mut pairs = Vec::new();
            let n = traj.events.len();
            for i in 0..n {
                for j in i + 1..n {
                    let c = conjugate_test(&scene, &traj, i, j, tol)?;
                    let mut v = to_value(&c);
                    v["i"] = json!(i);
                    v["j"] = json!(j);
                    pairs.push(v);
                }
            }
            let any = pairs.iter().any(|p| p["conjugate"] == json!(true));
            let doc = document(
                ctx.header("conjugate", Some(&scene), None, None),
                [("events", json!(n)), ("status", json!(traj.status.label())), ("pairs", Value::Array(pairs)), ("any_conjugate", json!(any))],
            );
            emit(args.io.out.as_deref(), &doc, stdout)?;
            Ok(0)
        }
        Command::Regularity(args) => {
            let scene = load_scene(&args.io.scene)?;
            let entry = parse_entry(&args.entry, &scene)?;
            let r = regularity_test(&scene, &entry, None, args.tol.unwrap_or(RANK_TOLERANCE))?;
            let doc = document(ctx.header("regularity", Some(&scene), None, None), [("regularity", to_value(&r))]);
            emit(args.io.out.as_deref(), &doc, stdout)?;
            Ok(0)
        }
        Command::Livshits(args) => {
            let params = LivshitsParams::default();
            let delta = args.deformation.unwrap_or(0.05 * params.ball_radius);
            let (base, deformed) = livshits_pair(&params, delta)?;
            fs::create_dir_all(&args.out).map_err(|e| CliError::bad(format!("{}: {e}", args.out.display())))?;
            let mut files = Vec::new();
            for s in [&base.scene, &deformed.scene] {
                let path = args.out.join(format!("{}.json", s.name()));
                let mut text = io::to_json_string(&s.to_json_value()).expect("scene serializes");
                text.push('\n');
                emit(Some(&path), &text, stdout)?;
                files.push(json!({ "path": path.display().to_string(), "scene_hash": s.hash_hex() }));
            }
            let trim = |v: &Vec3| vec![v.x, v.y];
            let doc = document(
                ctx.header("livshits", Some(&base.scene), None, None),
                [
                    ("deformation", json!(delta)),
                    ("foci", json!([trim(&base.foci[0]), trim(&base.foci[1])])),
                    ("pockets", json!(base.pockets.iter().map(|(x, y)| json!({ "x": x, "y": y })).collect::<Vec<_>>())),
                    ("deformed_pockets", json!(deformed.pockets.iter().map(|(x, y)| json!({ "x": x, "y": y })).collect::<Vec<_>>())),
                    ("scenes", Value::Array(files)),
                ],
            );
            emit(Some(&args.out.join("livshits-foci.json")), &doc, stdout)?;
            emit(None, &doc, stdout)?;
            Ok(0)
        }
        Command::Render(args) => {
            let scene = load_scene(&args.scene)?;
            if scene.dim() != 2 {
                return Err(CliError::bad("render needs a planar scene"));
            }
            let trajectories = match &args.entry {
                Some(e) => vec![trace_any(&scene, &parse_entry(e, &scene)?, &args.limits.resolve(scene.ball_radius()))?],
                None => Vec::new(),
            };
            let header = ctx.header("render", Some(&scene), None, None);
            match args.svg.as_ref().or(args.out.as_ref()) {
                Some(path) => write_svg(&scene, &trajectories, &header, path)?,
                None => emit(None, &svg::render(&scene, &trajectories, &header_line(&header)), stdout)?,
            }
            Ok(0)
        }
    }
}

fn header_line(header: &Map<String, Value>) -> String {
    io::to_json_string(&Value::Object(header.clone())).expect("header serializes")
}

fn write_svg(scene: &Scene, trajectories: &[Trajectory], header: &Map<String, Value>, path: &Path) -> Result<(), CliError> {
    if scene.dim() != 2 {
        return Err(CliError::bad("SVG output needs a planar scene"));
    }
    let text = svg::render(scene, trajectories, &header_line(header));
    fs::write(path, text).map_err(|e| CliError::bad(format!("{}: {e}", path.display())))
}

fn compare(ctx: &Context, args: &CompareArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let (k, l, scenes) = match (&args.tables[..], &args.scene, &args.scene_b) {
        ([a, b], None, None) => {
            let k = LensTable::from_jsonl(&read(a)?)?;
            let l = LensTable::from_jsonl(&read(b)?)?;
            (k, l, None)
        }
        ([], Some(a), Some(b)) => {
            let (sk, sl) = (load_scene(a)?, load_scene(b)?);
            let spec_text = args.spec.as_deref().ok_or_else(|| CliError::bad("--spec is required when comparing scenes"))?;
            let spec = parse_spec(spec_text, args.seed, &args.limits, sk.ball_radius())?;
            if sk.ball_radius() != sl.ball_radius() || sk.dim() != sl.dim() {
                return Err(CliError::bad("scenes differ in dimension or ball radius"));
            }
            (build_lens_table(&sk, &spec), build_lens_table(&sl, &spec), Some((sk, sl)))
        }
        _ => return Err(CliError::bad("compare needs two table files, or --scene and --scene-b with --spec")),
    };
    let tol = args.tol.unwrap_or(TIME_TOLERANCE * k.ball_radius);
    let report = compare_lens(&k, &l, tol)?;
    let mut header = ctx.header("compare", None, Some(k.spec.mode.to_string()), Some(k.spec.seed));
    header.insert("scene_hash".into(), json!(k.scene_hash));
    header.insert("scene_hash_b".into(), json!(l.scene_hash));
    let mut body = vec![("report", to_value(&report))];
    if let Some((sk, sl)) = &scenes {
        body.push(("boundary_distance", json!(boundary_distance(sk, sl, 2000)?)));
    }
    emit(args.out.as_deref(), &document(header, body), stdout)?;
    Ok(match (report.verdict, args.expect_equal) {
        (Verdict::Indistinguishable, _) => 0,
        (Verdict::Distinguishable, true) => EXIT_EXPECTED_EQUAL,
        (Verdict::Distinguishable, false) => EXIT_DISTINGUISHABLE,
    })
}
