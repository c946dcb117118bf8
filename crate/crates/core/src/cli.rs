//! Command-line front end.
//!
//! [`run`] parses arguments and dispatches; it returns the process exit code
//! (0 success, 2 usage or input error, 3 runtime failure) so it can be
//! driven from tests without spawning a process.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use log::{info, LevelFilter};
use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::format::{fmt_f64, rows_to_csv, write_text};
use crate::gpis::{format_query, grid_to_csv, GpParams, GpisModel, GridSpec, OtherAxes, DEFAULT_RESOLUTION};
use crate::kinematics::Robot;
use crate::metrics::{run_benchmark, BenchConfig};
use crate::sampling::{
    explore, gauss_newton_solve, random_ik_sample, sample_family, Method, SampleSet, TraversalParams, RANDOM_IK_MAX_ITER,
};
use crate::task::{TaskInstance, TaskSpec};

/// Environment variable that overrides `--threads`.
pub const THREADS_ENV: &str = "NULLMANIFOLD_THREADS";

#[derive(Debug, Parser)]
#[command(name = "nullmanifold", version, about = "Sample, model and query redundancy manifolds")]
pub struct Cli {
    /// Worker threads for data-parallel work (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// More logging (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a solution manifold into a CSV (plus `.meta.json`).
    Sample(SampleArgs),
    /// Fit a field model to a sample CSV.
    Build(BuildArgs),
    /// Print phi, d and the gradient at a configuration.
    Query(PointArgs),
    /// Print the single-step projection of a configuration.
    Project(PointArgs),
    /// Write the sequence of capped projection steps to the manifold.
    Path(PathArgs),
    /// Export phi and d over a grid.
    Grid(GridArgs),
    /// Run a benchmark configuration.
    Bench(BenchArgs),
    /// Sample a task family and fit one model over all instances.
    Family(FamilyArgs),
}

#[derive(Debug, Args)]
pub struct TraversalArgs {
    /// Robot description JSON, or a built-in name (`planar3`, `panda`).
    #[arg(long)]
    pub robot: String,
    /// Task file (JSON).
    #[arg(long)]
    pub task: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.5)]
    pub gamma: f64,
    /// Projection tolerance on the residual norm.
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Initial guess, comma separated (default: the robot's ready pose).
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<String>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub traversal: TraversalArgs,
    /// newton, zigzag or random-ik.
    #[arg(long, default_value = "newton")]
    pub method: Method,
    /// Random restarts that look for further components.
    #[arg(long, default_value_t = 0)]
    pub restarts: usize,
    /// Number of solutions for random-ik.
    #[arg(long, default_value_t = 15)]
    pub count: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GpArgs {
    #[arg(long, default_value_t = crate::gpis::DEFAULT_LENGTHSCALE)]
    pub lengthscale: f64,
    #[arg(long, default_value_t = crate::gpis::DEFAULT_NOISE)]
    pub noise: f64,
    #[arg(long, default_value_t = crate::gpis::DEFAULT_THRESHOLD)]
    pub threshold: f64,
}

impl GpArgs {
    fn params(&self) -> GpParams {
        GpParams { lengthscale: self.lengthscale, noise: self.noise, threshold: self.threshold }
    }
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Sample CSV.
    #[arg(long)]
    pub samples: PathBuf,
    #[command(flatten)]
    pub gp: GpArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Configuration, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub q: String,
}

#[derive(Debug, Args)]
pub struct PathArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// Largest displacement per step.
    #[arg(long, default_value_t = 0.5)]
    pub step_cap: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    /// Output CSV (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Axes spanned by the grid, e.g. `0,1,2` (default: all, for models with at most 3 axes).
    #[arg(long)]
    pub axes: Option<String>,
    /// Values for the remaining axes, e.g. `3=0,4=0.5`; unlisted axes are 0.
    #[arg(long, allow_hyphen_values = true)]
    pub fix: Option<String>,
    /// Per cell, take the maximum phi over this many training-point slices of the remaining axes.
    #[arg(long, conflicts_with = "fix")]
    pub marginalize: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    pub resolution: f64,
    /// `lo:hi` for every grid axis, or one comma-separated pair per axis (default -pi:pi).
    #[arg(long, allow_hyphen_values = true)]
    pub bounds: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Report CSV; a Markdown table is written next to it.
    #[arg(long)]
    pub out: PathBuf,
    /// Leave timing columns empty.
    #[arg(long)]
    pub no_timing: bool,
    /// Run cells concurrently (implies --no-timing).
    #[arg(long)]
    pub parallel: bool,
    /// Overrides the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    #[command(flatten)]
    pub traversal: TraversalArgs,
    #[command(flatten)]
    pub gp: GpArgs,
    /// Labeled sample CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Model JSON.
    #[arg(long)]
    pub model: PathBuf,
}

/// Parses `args` (including the program name) and runs the command.
/// Normal output goes to `out`; diagnostics go to stderr.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_logging(cli.verbose);
    let pool = match thread_pool(cli.threads) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match pool.install(|| execute(&cli.command, out)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input() {
                2
            } else {
                3
            }
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().try_init();
}

fn thread_pool(flag: Option<usize>) -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parameter(format!("{THREADS_ENV} must be a thread count, got {v:?}")))?,
        ),
        Err(_) => flag,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads.filter(|&n| n > 0) {
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::Numerical(format!("thread pool: {e}")))
}

fn execute(cmd: &Command, out: &mut (dyn Write + Send)) -> Result<()> {
    match cmd {
        Command::Sample(a) => cmd_sample(a, out),
        Command::Build(a) => cmd_build(a, out),
        Command::Query(a) => cmd_query(a, out),
        Command::Project(a) => cmd_project(a, out),
        Command::Path(a) => cmd_path(a, out),
        Command::Grid(a) => cmd_grid(a),
        Command::Bench(a) => cmd_bench(a, out),
        Command::Family(a) => cmd_family(a, out),
    }
}

fn emit(out: &mut (dyn Write + Send), text: &str) -> Result<()> {
    writeln!(out, "{text}").map_err(|e| Error::io("<stdout>", e))
}

/// Loads a robot file, falling back to the built-in names.
pub fn load_robot(name: &str) -> Result<Robot> {
    let path = Path::new(name);
    if path.exists() {
        return Robot::load(path);
    }
    match name {
        "planar3" => Ok(Robot::planar_unit3()),
        "panda" => Ok(Robot::panda()),
        _ => Robot::load(path),
    }
}

/// Parses `a,b,c` into a vector.
pub fn parse_vector(text: &str) -> Result<DVector<f64>> {
    let values = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Input(format!("not a number: {s:?}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(DVector::from_vec(values))
}

impl TraversalArgs {
    fn params(&self) -> TraversalParams {
        TraversalParams {
            beta: self.beta,
            gamma: self.gamma,
            eps_proj: self.eps,
            max_steps: self.max_steps,
            seed: self.seed,
            ..Default::default()
        }
    }

    fn setup(&self) -> Result<(Arc<Robot>, TaskSpec, DVector<f64>)> {
        let robot = Arc::new(load_robot(&self.robot)?);
        let spec = TaskSpec::load(&self.task)?;
        let start = match &self.start {
            Some(s) => {
                let v = parse_vector(s)?;
                check_dim(robot.dof(), v.len())?;
                v
            }
            None => robot.ready(),
        };
        Ok((robot, spec, start))
    }
}

fn cmd_sample(a: &SampleArgs, out: &mut (dyn Write + Send)) -> Result<()> {
    let (robot, spec, start) = a.traversal.setup()?;
    let TaskSpec::Single(single) = &spec else {
        return Err(Error::Input("task file describes a family; use the `family` command".into()));
    };
    let task = single.instantiate(robot)?;
    let params = a.traversal.params();
    params.validate()?;
    let set = match a.method {
        Method::RandomIk => random_ik_sample(&task, a.count, params.eps_proj, params.seed)?,
        method => {
            let seed = gauss_newton_solve(&task, &start, params.eps_proj, RANDOM_IK_MAX_ITER)?;
            explore(&task, &seed.q, &params, method, a.restarts)?
        }
    };
    set.save(&a.out, Some(params.seed))?;
    for w in &set.warnings {
        log::warn!("{w}");
    }
    emit(
        out,
        &format!(
            "{} samples ({}), mean residual norm {:.3e}, termination {:?}",
            set.len(),
            set.method,
            set.mean_residual_norm(),
            set.termination
        ),
    )
}

fn cmd_build(a: &BuildArgs, out: &mut (dyn Write + Send)) -> Result<()> {
    let set = SampleSet::load(&a.samples)?;
    if set.is_empty() {
        return Err(Error::Input(format!("{}: no samples", a.samples.display())));
    }
    let model = GpisModel::build(set.samples, a.gp.params())?;
    model.save(&a.out)?;
    info!("model written to {}", a.out.display());
    emit(
        out,
        &format!(
            "N = {}, lengthscale = {}, noise = {:e}, jitter = {:e}, build time = {:.2} ms",
            model.len(),
            model.lengthscale(),
            model.params().noise,
            model.jitter(),
            model.build_time().as_secs_f64() * 1e3
        ),
    )
}

fn load_point(a: &PointArgs) -> Result<(GpisModel, DVector<f64>)> {
    let model = GpisModel::load(&a.model)?;
    let q = parse_vector(&a.q)?;
    check_dim(model.dim(), q.len())?;
    Ok((model, q))
}

fn joined(q: &DVector<f64>) -> String {
    q.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(",")
}

fn cmd_query(a: &PointArgs, out: &mut (dyn Write + Send)) -> Result<()> {
    let (model, q) = load_point(a)?;
    let f = model.field(&q)?;
    emit(out, &format_query(&f))?;
    emit(out, &format!("on_manifold = {}", f.phi > model.params().threshold))
}

fn cmd_project(a: &PointArgs, out: &mut (dyn Write + Send)) -> Result<()> {
    let (model, q) = load_point(a)?;
    emit(out, &joined(&model.project(&q)?))
}

fn cmd_path(a: &PathArgs, out: &mut (dyn Write + Send)) -> Result<()> {
    let (model, q) = load_point(&a.point)?;
    let path = model.path_to_manifold(&q, a.step_cap, a.tol)?;
    let header: Vec<String> = (0..model.dim()).map(|i| format!("q{i}")).chain(["d".to_string()]).collect();
    let rows = path
        .iter()
        .map(|p| Ok(p.iter().copied().chain([model.distance(p)?]).collect::<Vec<f64>>()))
        .collect::<Result<Vec<_>>>()?;
    let csv = rows_to_csv(&header, rows.iter().map(Vec::as_slice));
    match &a.out {
        Some(p) => write_text(p, &csv),
        None => out.write_all(csv.as_bytes()).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn parse_axes(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| Error::Input(format!("bad axis index {s:?}"))))
        .collect()
}

fn parse_fix(text: &str, dim: usize) -> Result<Vec<f64>> {
    let mut values = vec![0.0; dim];
    for item in text.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Input(format!("--fix entries look like axis=value, got {item:?}")))?;
        let axis: usize = k.trim().parse().map_err(|_| Error::Input(format!("bad axis index {k:?}")))?;
        if axis >= dim {
            return Err(Error::Input(format!("axis {axis} out of range for a {dim}-dimensional model")));
        }
        values[axis] = v.trim().parse().map_err(|_| Error::Input(format!("not a number: {v:?}")))?;
    }
    Ok(values)
}

fn parse_bounds(text: Option<&str>, count: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    use std::f64::consts::PI;
    let Some(text) = text else { return Ok((vec![-PI; count], vec![PI; count])) };
    let pairs = text
        .split(',')
        .map(|p| {
            let (lo, hi) = p
                .split_once(':')
                .ok_or_else(|| Error::Input(format!("bounds look like lo:hi, got {p:?}")))?;
            let lo: f64 = lo.trim().parse().map_err(|_| Error::Input(format!("not a number: {lo:?}")))?;
            let hi: f64 = hi.trim().parse().map_err(|_| Error::Input(format!("not a number: {hi:?}")))?;
            Ok((lo, hi))
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs = match pairs.len() {
        1 => vec![pairs[0]; count],
        n if n == count => pairs,
        n => return Err(Error::Input(format!("{n} bound pairs for {count} grid axes"))),
    };
    Ok(pairs.into_iter().unzip())
}

fn cmd_grid(a: &GridArgs) -> Result<()> {
    let model = GpisModel::load(&a.model)?;
    let dim = model.dim();
    let axes = match &a.axes {
        Some(s) => parse_axes(s)?,
        None if dim <= 3 => (0..dim).collect(),
        None => return Err(Error::Input(format!("a {dim}-dimensional model needs --axes"))),
    };
    let (lower, upper) = parse_bounds(a.bounds.as_deref(), axes.len())?;
    let other = match (a.marginalize, &a.fix) {
        (Some(0), _) => return Err(Error::Input("--marginalize needs at least one slice".into())),
        (Some(k), _) => {
            let pts = model.points();
            let stride = (pts.len() / k).max(1);
            OtherAxes::MaxOver(pts.iter().step_by(stride).take(k).map(|p| p.iter().copied().collect()).collect())
        }
        (None, Some(fix)) => OtherAxes::Fixed(parse_fix(fix, dim)?),
        (None, None) => OtherAxes::Fixed(vec![0.0; dim]),
    };
    let spec = GridSpec { axes, lower, upper, resolution: a.resolution, other };
    let cells = model.grid(&spec)?;
    info!("{} grid cells", cells.len());
    write_text(&a.out, &grid_to_csv(&spec, &cells))
}

fn cmd_bench(a: &BenchArgs, out: &mut (dyn Write + Send)) -> Result<()> {
    let mut cfg = BenchConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    cfg.parallel |= a.parallel;
    let timing = !(a.no_timing || cfg.parallel);
    let report = run_benchmark(&cfg)?;
    write_text(&a.out, &report.to_csv(timing))?;
    let markdown = report.to_markdown(timing);
    write_text(&a.out.with_extension("md"), &markdown)?;
    emit(out, markdown.trim_end())
}

fn cmd_family(a: &FamilyArgs, out: &mut (dyn Write + Send)) -> Result<()> {
    let (robot, spec, start) = a.traversal.setup()?;
    let tasks: Vec<TaskInstance> = spec.instances(robot)?;
    let params = a.traversal.params();
    let outcome = sample_family(&tasks, &params, &start)?;
    for inst in &outcome.instances {
        match &inst.error {
            None => emit(out, &format!("instance {} {:?}: {} samples", inst.index, inst.coordinate, inst.samples))?,
            Some(e) => emit(out, &format!("instance {} {:?}: failed: {e}", inst.index, inst.coordinate))?,
        }
    }
    let set = outcome.samples;
    set.save(&a.out, Some(params.seed))?;
    let model = GpisModel::build(set.samples.clone(), a.gp.params())?;
    model.save(&a.model)?;
    let failed = outcome.instances.iter().filter(|i| !i.succeeded()).count();
    emit(
        out,
        &format!(
            "{} samples from {} instances ({failed} failed), build time {:.2} ms",
            set.len(),
            outcome.instances.len(),
            model.build_time().as_secs_f64() * 1e3
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectors_and_bounds_parse() {
        assert_eq!(parse_vector("1, -2.5,3e-1").unwrap().as_slice(), &[1.0, -2.5, 0.3]);
        assert!(parse_vector("1,x").unwrap_err().is_input());
        let (lo, hi) = parse_bounds(Some("-1:1"), 2).unwrap();
        assert_eq!((lo, hi), (vec![-1.0, -1.0], vec![1.0, 1.0]));
        assert!(parse_bounds(Some("0:1,0:1"), 3).is_err());
        assert_eq!(parse_fix("3=0.5, 1=-1", 4).unwrap(), vec![0.0, -1.0, 0.0, 0.5]);
        assert!(parse_fix("9=0", 4).is_err());
    }

    #[test]
    fn unknown_method_is_usage_error() {
        let mut out = Vec::new();
        let code = run(
            ["nullmanifold", "sample", "--robot", "planar3", "--task", "t.json", "--method", "spiral", "--out", "x.csv"],
            &mut out,
        );
        assert_eq!(code, 2);
    }

    #[test]
    fn missing_file_is_input_error() {
        let mut out = Vec::new();
        let code = run(["nullmanifold", "build", "--samples", "/nonexistent/s.csv", "--out", "m.json"], &mut out);
        assert_eq!(code, 2);
    }
}
