use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use log::info;
use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{coverage_volume, CoverageParams};
use crate::error::{Error, Result};
use crate::gpis::{GpParams, GpisModel};
use crate::kinematics::{Robot, RobotDescription};
use crate::sampling::{
    explore, gauss_newton_solve, random_ik_sample, sample_family, Method, SampleSet, TraversalParams,
    RANDOM_IK_MAX_ITER,
};
use crate::task::{TaskInstance, TaskSpec};

/// Robot given inline or as a path (relative to the config file).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RobotSource {
    Path(PathBuf),
    Inline(RobotDescription),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TaskSource {
    Path(PathBuf),
    Inline(TaskSpec),
}

/// One sampling method with the parameter values to sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum MethodGrid {
    Newton { betas: Vec<f64> },
    Zigzag { betas: Vec<f64> },
    RandomIk { counts: Vec<usize> },
}

/// A robot/task pair and the methods to run on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchCase {
    pub name: String,
    pub robot: RobotSource,
    pub task: TaskSource,
    /// Initial guess for the seed solve; defaults to the robot's ready pose.
    #[serde(default)]
    pub start: Option<Vec<f64>>,
    #[serde(default)]
    pub methods: Vec<MethodGrid>,
    #[serde(default)]
    pub traversal: Option<TraversalParams>,
    /// When set, a GPIS model is built from each cell's samples and timed.
    #[serde(default)]
    pub gp: Option<GpParams>,
    #[serde(default = "default_true")]
    pub coverage: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub coverage: CoverageParams,
    pub cases: Vec<BenchCase>,
    /// Run cells concurrently; timing columns are then left blank.
    #[serde(default)]
    pub parallel: bool,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl BenchConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: BenchConfig = serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() { p.to_path_buf() } else { self.base_dir.join(p) }
    }
}

/// One method×parameter cell of the report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub case: String,
    pub method: Method,
    pub beta: Option<f64>,
    pub requested: Option<usize>,
    pub samples: usize,
    pub sampling_time_ms: Option<f64>,
    pub coverage_volume: Option<f64>,
    pub coverage_std_error: Option<f64>,
    pub mean_residual_norm: Option<f64>,
    pub rms_residual_norm: Option<f64>,
    pub gp_build_time_ms: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

struct PreparedCase {
    name: String,
    tasks: Vec<TaskInstance>,
    start: DVector<f64>,
    traversal: TraversalParams,
    gp: Option<GpParams>,
    coverage: bool,
}

#[derive(Clone)]
enum Cell {
    Traverse(Method, f64),
    RandomIk(usize),
}

fn prepare(cfg: &BenchConfig, case: &BenchCase) -> Result<PreparedCase> {
    let robot = match &case.robot {
        RobotSource::Path(p) => Robot::load(cfg.resolve(p))?,
        RobotSource::Inline(d) => Robot::from_description(d)?,
    };
    let robot = Arc::new(robot);
    let spec = match &case.task {
        TaskSource::Path(p) => TaskSpec::load(cfg.resolve(p))?,
        TaskSource::Inline(t) => t.clone(),
    };
    let tasks = spec.instances(robot.clone())?;
    let start = match &case.start {
        Some(s) => {
            crate::error::check_dim(robot.dof(), s.len())?;
            DVector::from_column_slice(s)
        }
        None => robot.ready(),
    };
    let mut traversal = case.traversal.clone().unwrap_or_default();
    traversal.seed = cfg.seed;
    Ok(PreparedCase { name: case.name.clone(), tasks, start, traversal, gp: case.gp, coverage: case.coverage })
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn run_cell(case: &PreparedCase, cell: &Cell, cfg: &BenchConfig) -> BenchRow {
    let (method, beta, requested) = match cell {
        Cell::Traverse(m, b) => (*m, Some(*b), None),
        Cell::RandomIk(n) => (Method::RandomIk, None, Some(*n)),
    };
    let mut row = BenchRow {
        case: case.name.clone(),
        method,
        beta,
        requested,
        samples: 0,
        sampling_time_ms: None,
        coverage_volume: None,
        coverage_std_error: None,
        mean_residual_norm: None,
        rms_residual_norm: None,
        gp_build_time_ms: None,
        error: None,
    };
    match sample_cell(case, cell) {
        Ok((set, residuals)) => {
            row.samples = set.len();
            row.sampling_time_ms = Some(ms(set.sampling_time));
            if !residuals.is_empty() {
                let n = residuals.len() as f64;
                row.mean_residual_norm = Some(residuals.iter().sum::<f64>() / n);
                row.rms_residual_norm = Some((residuals.iter().map(|r| r * r).sum::<f64>() / n).sqrt());
            }
            if case.coverage {
                let params = CoverageParams { seed: cfg.seed, ..cfg.coverage.clone() };
                match coverage_volume(&set.samples, &params) {
                    Ok(c) => {
                        row.coverage_volume = Some(c.volume);
                        row.coverage_std_error = c.std_error;
                    }
                    Err(e) => row.error = Some(e.to_string()),
                }
            }
            if let Some(gp) = case.gp {
                match GpisModel::build(set.samples.clone(), gp) {
                    Ok(m) => row.gp_build_time_ms = Some(ms(m.build_time())),
                    Err(e) => row.error = Some(e.to_string()),
                }
            }
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Samples one cell; returns the set and residual norms recomputed per sample's own task.
fn sample_cell(case: &PreparedCase, cell: &Cell) -> Result<(SampleSet, Vec<f64>)> {
    let params = match cell {
        Cell::Traverse(_, beta) => TraversalParams { beta: *beta, ..case.traversal.clone() },
        Cell::RandomIk(_) => case.traversal.clone(),
    };
    if case.tasks.len() > 1 {
        let Cell::Traverse(Method::Newton, _) = cell else {
            return Err(Error::Input("task families are sampled with the newton method only".into()));
        };
        let outcome = sample_family(&case.tasks, &params, &case.start)?;
        let mut residuals = Vec::with_capacity(outcome.samples.len());
        let mut offset = 0;
        for inst in &outcome.instances {
            let task = &case.tasks[inst.index];
            for q in &outcome.samples.samples[offset..offset + inst.samples] {
                residuals.push(task.residual_norm(q)?);
            }
            offset += inst.samples;
        }
        return Ok((outcome.samples, residuals));
    }
    let task = &case.tasks[0];
    let set = match cell {
        Cell::RandomIk(n) => random_ik_sample(task, *n, params.eps_proj, params.seed)?,
        Cell::Traverse(method, _) => {
            let clock = Instant::now();
            let seed = gauss_newton_solve(task, &case.start, params.eps_proj, RANDOM_IK_MAX_ITER)?;
            let mut set = explore(task, &seed.q, &params, *method, 0)?;
            set.sampling_time = clock.elapsed();
            set
        }
    };
    let residuals = set.samples.iter().map(|q| task.residual_norm(q)).collect::<Result<Vec<_>>>()?;
    Ok((set, residuals))
}

/// Runs every method×parameter cell of every case.
///
/// Cells run sequentially unless `parallel` is set; failures become rows
/// with the error column filled in.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchReport> {
    let mut work: Vec<(Arc<PreparedCase>, Cell)> = Vec::new();
    for case in &cfg.cases {
        let prepared = Arc::new(prepare(cfg, case)?);
        for grid in &case.methods {
            match grid {
                MethodGrid::Newton { betas } => {
                    work.extend(betas.iter().map(|b| (prepared.clone(), Cell::Traverse(Method::Newton, *b))))
                }
                MethodGrid::Zigzag { betas } => {
                    work.extend(betas.iter().map(|b| (prepared.clone(), Cell::Traverse(Method::Zigzag, *b))))
                }
                MethodGrid::RandomIk { counts } => {
                    work.extend(counts.iter().map(|n| (prepared.clone(), Cell::RandomIk(*n))))
                }
            }
        }
    }
    let rows: Vec<BenchRow> = if cfg.parallel {
        work.par_iter()
            .map(|(case, cell)| {
                let mut row = run_cell(case, cell, cfg);
                row.sampling_time_ms = None;
                row.gp_build_time_ms = None;
                row
            })
            .collect()
    } else {
        work.iter()
            .map(|(case, cell)| {
                let row = run_cell(case, cell, cfg);
                info!("{} {} {:?}/{:?}: {} samples", row.case, row.method, row.beta, row.requested, row.samples);
                row
            })
            .collect()
    };
    Ok(BenchReport { rows })
}

fn opt(x: Option<f64>, fmt: impl Fn(f64) -> String) -> String {
    x.map(fmt).unwrap_or_default()
}

fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

impl BenchReport {
    const HEADER: [&'static str; 12] = [
        "case",
        "method",
        "beta",
        "n_requested",
        "samples",
        "sampling_time_ms",
        "coverage_volume",
        "coverage_std_error",
        "mean_residual_norm",
        "rms_residual_norm",
        "gp_build_time_ms",
        "status",
    ];

    fn fields(row: &BenchRow, timing: bool) -> Vec<String> {
        let time = |t: Option<f64>| if timing { opt(t, |v| format!("{v:.2}")) } else { String::new() };
        vec![
            row.case.clone(),
            row.method.to_string(),
            opt(row.beta, |b| format!("{b}")),
            row.requested.map(|n| n.to_string()).unwrap_or_default(),
            row.samples.to_string(),
            time(row.sampling_time_ms),
            opt(row.coverage_volume, sci),
            opt(row.coverage_std_error, sci),
            opt(row.mean_residual_norm, sci),
            opt(row.rms_residual_norm, sci),
            time(row.gp_build_time_ms),
            row.error.clone().map(|e| format!("error: {e}")).unwrap_or_else(|| "ok".into()),
        ]
    }

    /// CSV report. With `timing = false` the time columns are left empty,
    /// making the output reproducible byte-for-byte under a fixed seed.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(Self::HEADER).expect("writing to memory");
        for row in &self.rows {
            w.write_record(Self::fields(row, timing)).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("ASCII")
    }

    pub fn to_markdown(&self, timing: bool) -> String {
        let mut out = format!("| {} |\n|{}\n", Self::HEADER.join(" | "), "---|".repeat(Self::HEADER.len()));
        for row in &self.rows {
            out.push_str(&format!("| {} |\n", Self::fields(row, timing).join(" | ")));
        }
        out
    }
}
