//! Gaussian-process implicit surface with the prior mean shifted to one.
//!
//! Training targets are all one, so the posterior mean `φ(q) = k(Q, q)ᵀα`
//! is ≈ 1 on the sampled manifold and decays to 0 away from it. Inverting
//! the squared-exponential kernel turns `φ` into a distance-like field
//! `d(q) = sqrt(max(0, −2ℓ² log φ(q)))`.

use std::path::Path;
use std::time::{Duration, Instant};

use log::debug;
use faer::linalg::solvers::Solve;
use faer::{Col, Mat, Side};
use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::format::{fmt_f64, read_text, rows_to_csv, write_text};
use crate::kinematics::wrap_angles;

pub const DEFAULT_LENGTHSCALE: f64 = 0.4;
pub const DEFAULT_NOISE: f64 = 1e-6;
pub const DEFAULT_THRESHOLD: f64 = 0.995;

/// Floor applied to φ before taking its log.
const PHI_FLOOR: f64 = 1e-300;
const JITTER_START: f64 = 1e-10;
const JITTER_MAX: f64 = 1e-4;

/// Squared-exponential kernel `exp(−‖a − b‖² / 2ℓ²)`.
pub fn se_kernel(a: &[f64], b: &[f64], lengthscale: f64) -> Result<f64> {
    if !(lengthscale > 0.0) {
        return Err(Error::Parameter(format!("lengthscale must be positive, got {lengthscale}")));
    }
    check_dim(a.len(), b.len())?;
    Ok((-squared_distance(a, b) / (2.0 * lengthscale * lengthscale)).exp())
}

#[inline]
fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Hyperparameters for model construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GpParams {
    pub lengthscale: f64,
    /// Observation noise variance σ², added to the Gram diagonal.
    pub noise: f64,
    /// φ above this counts as on the manifold.
    pub threshold: f64,
}

impl Default for GpParams {
    fn default() -> Self {
        GpParams { lengthscale: DEFAULT_LENGTHSCALE, noise: DEFAULT_NOISE, threshold: DEFAULT_THRESHOLD }
    }
}

impl GpParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lengthscale > 0.0 && self.lengthscale.is_finite()) {
            return Err(Error::Parameter(format!("lengthscale must be positive, got {}", self.lengthscale)));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::Parameter(format!("noise must be nonnegative, got {}", self.noise)));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Parameter(format!("threshold must lie in (0, 1), got {}", self.threshold)));
        }
        Ok(())
    }
}

/// Field value, gradient, and pseudo-distance at one query.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldQuery {
    pub phi: f64,
    pub gradient: DVector<f64>,
    pub distance: f64,
}

/// An immutable GPIS model.
#[derive(Clone, Debug, PartialEq)]
pub struct GpisModel {
    points: Vec<DVector<f64>>,
    alpha: Vec<f64>,
    params: GpParams,
    /// Extra diagonal added to make the Gram matrix factorizable (0 if none).
    jitter: f64,
    build_time: Duration,
}

/// Gram matrix `k(Q, Q)` plus `diag` on the diagonal, assembled column-parallel.
fn gram(points: &[DVector<f64>], lengthscale: f64, diag: f64) -> Mat<f64> {
    let n = points.len();
    let inv = 1.0 / (2.0 * lengthscale * lengthscale);
    let mut k = Mat::<f64>::zeros(n, n);
    k.par_col_iter_mut().enumerate().for_each(|(j, mut col)| {
        for i in 0..n {
            let v = (-squared_distance(points[i].as_slice(), points[j].as_slice()) * inv).exp();
            col[i] = if i == j { v + diag } else { v };
        }
    });
    k
}

impl GpisModel {
    /// Fits `α = (K + σ²I)⁻¹·1` by Cholesky factorization.
    ///
    /// If the factorization fails (e.g. duplicated points with σ² = 0),
    /// jitter starting at 1e-10 is added to the diagonal and escalated ×10 up
    /// to 1e-4 before giving up.
    pub fn build(points: Vec<DVector<f64>>, params: GpParams) -> Result<Self> {
        params.validate()?;
        let clock = Instant::now();
        let Some(dim) = points.first().map(|p| p.len()) else {
            return Err(Error::Input("cannot build a model from zero samples".into()));
        };
        for p in &points {
            check_dim(dim, p.len())?;
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::Input("training points must be finite".into()));
            }
        }
        let n = points.len();
        let ones = Col::<f64>::from_fn(n, |_| 1.0);
        let mut k = gram(&points, params.lengthscale, params.noise);
        let mut jitter = 0.0;
        let chol = loop {
            if let Ok(c) = k.llt(Side::Lower) {
                break c;
            }
            let next = if jitter == 0.0 { JITTER_START } else { jitter * 10.0 };
            if next > JITTER_MAX * 1.000001 {
                return Err(Error::Numerical(format!(
                    "Gram matrix not positive definite even with jitter {jitter:e}"
                )));
            }
            for i in 0..n {
                k[(i, i)] += next - jitter;
            }
            jitter = next;
        };
        let alpha = chol.solve(&ones);
        // one step of iterative refinement
        let residual = &ones - &k * &alpha;
        let alpha = &alpha + chol.solve(&residual);
        let build_time = clock.elapsed();
        debug!("built GPIS model: N = {n}, jitter = {jitter:e}, {:.3} ms", build_time.as_secs_f64() * 1e3);
        Ok(GpisModel { points, alpha: alpha.iter().copied().collect(), params, jitter, build_time })
    }

    /// Rebuilds a model from stored coefficients (no solve).
    pub fn from_parts(points: Vec<DVector<f64>>, alpha: Vec<f64>, params: GpParams) -> Result<Self> {
        params.validate()?;
        if points.is_empty() {
            return Err(Error::Input("model has no points".into()));
        }
        check_dim(points.len(), alpha.len())?;
        let dim = points[0].len();
        for p in &points {
            check_dim(dim, p.len())?;
        }
        Ok(GpisModel { points, alpha, params, jitter: 0.0, build_time: Duration::ZERO })
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn params(&self) -> &GpParams {
        &self.params
    }

    pub fn lengthscale(&self) -> f64 {
        self.params.lengthscale
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn build_time(&self) -> Duration {
        self.build_time
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// `‖(K + σ²I)α − 1‖∞`, recomputed from scratch.
    pub fn solve_residual(&self) -> f64 {
        let k = gram(&self.points, self.params.lengthscale, self.params.noise);
        let alpha = Col::<f64>::from_fn(self.alpha.len(), |i| self.alpha[i]);
        (&k * &alpha).iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max)
    }

    fn check_query(&self, q: &DVector<f64>) -> Result<()> {
        check_dim(self.dim(), q.len())
    }

    /// Field value φ(q).
    pub fn infer(&self, q: &DVector<f64>) -> Result<f64> {
        self.check_query(q)?;
        let inv = 1.0 / (2.0 * self.params.lengthscale.powi(2));
        Ok(self
            .points
            .iter()
            .zip(&self.alpha)
            .map(|(p, a)| a * (-squared_distance(p.as_slice(), q.as_slice()) * inv).exp())
            .sum())
    }

    /// ∇φ(q) = Σ αᵢ k(qᵢ, q)(qᵢ − q)/ℓ²; points up the field, toward the manifold.
    pub fn gradient(&self, q: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.field(q)?.gradient)
    }

    /// Pseudo-distance to the manifold.
    pub fn distance(&self, q: &DVector<f64>) -> Result<f64> {
        Ok(self.distance_from_phi(self.infer(q)?))
    }

    pub fn distance_from_phi(&self, phi: f64) -> f64 {
        if phi >= 1.0 {
            return 0.0;
        }
        let l2 = self.params.lengthscale.powi(2);
        (-2.0 * l2 * phi.max(PHI_FLOOR).ln()).max(0.0).sqrt()
    }

    pub fn is_on_manifold(&self, q: &DVector<f64>) -> Result<bool> {
        Ok(self.infer(q)? > self.params.threshold)
    }

    /// φ, ∇φ and d in a single pass over the training points.
    pub fn field(&self, q: &DVector<f64>) -> Result<FieldQuery> {
        self.check_query(q)?;
        let l2 = self.params.lengthscale.powi(2);
        let inv = 1.0 / (2.0 * l2);
        let mut phi = 0.0;
        let mut grad = DVector::zeros(q.len());
        for (p, a) in self.points.iter().zip(&self.alpha) {
            let w = a * (-squared_distance(p.as_slice(), q.as_slice()) * inv).exp();
            phi += w;
            for ((g, pi), qi) in grad.iter_mut().zip(p.iter()).zip(q.iter()) {
                *g += w * (pi - qi);
            }
        }
        grad /= l2;
        Ok(FieldQuery { phi, distance: self.distance_from_phi(phi), gradient: grad })
    }

    /// Data-parallel [`GpisModel::field`] over many queries.
    pub fn field_batch(&self, queries: &[DVector<f64>]) -> Result<Vec<FieldQuery>> {
        queries.par_iter().map(|q| self.field(q)).collect()
    }

    /// One step along the normalized gradient by the field distance:
    /// `wrap(q + d(q)·∇φ/‖∇φ‖)`. A point with `d = 0` is returned unchanged.
    pub fn project(&self, q: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(wrap_angles(&(q + self.projection_step(q)?)))
    }

    /// Displacement taken by [`GpisModel::project`] before wrapping.
    pub fn projection_step(&self, q: &DVector<f64>) -> Result<DVector<f64>> {
        let f = self.field(q)?;
        if f.distance == 0.0 {
            return Ok(DVector::zeros(q.len()));
        }
        // Compared against the field's own scale; far from the data both are tiny.
        let norm = f.gradient.norm();
        let scale = f.phi.abs().max(f64::MIN_POSITIVE) / self.params.lengthscale;
        if !(norm > 1e-12 * scale) || !norm.is_finite() {
            return Err(Error::DegenerateQuery);
        }
        Ok(f.gradient * (f.distance / norm))
    }

    /// Repeated projection with each displacement capped at `step_cap`,
    /// until `d ≤ tol` or 100 steps. Returns the visited configurations,
    /// starting with `q0`. Fails if `d` does not decrease over 5 consecutive steps.
    pub fn path_to_manifold(&self, q0: &DVector<f64>, step_cap: f64, tol: f64) -> Result<Vec<DVector<f64>>> {
        const MAX_STEPS: usize = 100;
        const STALL_STEPS: usize = 5;
        if !(step_cap > 0.0) || !(tol >= 0.0) {
            return Err(Error::Parameter(format!("step cap must be positive and tol nonnegative ({step_cap}, {tol})")));
        }
        let mut path = vec![q0.clone()];
        let mut q = q0.clone();
        let mut d = self.distance(&q)?;
        let mut stalled = 0;
        for _ in 0..MAX_STEPS {
            if d <= tol {
                break;
            }
            let mut step = self.projection_step(&q)?;
            let len = step.norm();
            if len > step_cap {
                step *= step_cap / len;
            }
            q = wrap_angles(&(q + step));
            let d_next = self.distance(&q)?;
            path.push(q.clone());
            stalled = if d_next >= d { stalled + 1 } else { 0 };
            if stalled >= STALL_STEPS {
                return Err(Error::Stall(STALL_STEPS));
            }
            d = d_next;
        }
        Ok(path)
    }
}

/// On-disk model representation (JSON).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub lengthscale: f64,
    pub noise: f64,
    pub threshold: f64,
    pub points: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
}

impl GpisModel {
    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            lengthscale: self.params.lengthscale,
            noise: self.params.noise,
            threshold: self.params.threshold,
            points: self.points.iter().map(|p| p.as_slice().to_vec()).collect(),
            alpha: self.alpha.clone(),
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        let params = GpParams { lengthscale: file.lengthscale, noise: file.noise, threshold: file.threshold };
        let points = file.points.into_iter().map(DVector::from_vec).collect();
        GpisModel::from_parts(points, file.alpha, params)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("model serializes") + "\n"
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_json())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(&read_text(path)?).map_err(|e| Error::parse(path, e))?;
        GpisModel::from_file(file).map_err(|e| Error::parse(path, e))
    }
}

/// How axes outside the exported grid are treated.
#[derive(Clone, Debug, PartialEq)]
pub enum OtherAxes {
    /// Hold every remaining axis at a value (full-length vector, used only at non-grid axes).
    Fixed(Vec<f64>),
    /// Per cell, take the maximum φ over these settings of the remaining axes.
    MaxOver(Vec<Vec<f64>>),
}

/// Axis-aligned grid over selected configuration axes.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub axes: Vec<usize>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub resolution: f64,
    pub other: OtherAxes,
}

pub const MAX_GRID_CELLS: u64 = 100_000_000;

/// Default grid resolution for field export.
pub const DEFAULT_RESOLUTION: f64 = 0.05;

impl GridSpec {
    /// Full `[-π, π)` box over every axis of an `n`-dimensional model.
    pub fn full(n: usize, resolution: f64) -> Self {
        GridSpec {
            axes: (0..n).collect(),
            lower: vec![-std::f64::consts::PI; n],
            upper: vec![std::f64::consts::PI; n],
            resolution,
            other: OtherAxes::Fixed(vec![0.0; n]),
        }
    }

    /// Sample values along one axis: `lo + i·res < hi`, at least one.
    pub fn axis_values(&self, k: usize) -> Vec<f64> {
        let (lo, hi) = (self.lower[k], self.upper[k]);
        let count = (((hi - lo) / self.resolution) - 1e-9).ceil().max(1.0) as usize;
        (0..count).map(|i| lo + i as f64 * self.resolution).collect()
    }

    pub fn cell_count(&self) -> u64 {
        (0..self.axes.len()).map(|k| self.axis_values(k).len() as u64).product()
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if !(self.resolution > 0.0) {
            return Err(Error::Input(format!("resolution must be positive, got {}", self.resolution)));
        }
        if self.axes.is_empty() || self.axes.len() != self.lower.len() || self.axes.len() != self.upper.len() {
            return Err(Error::Input("grid axes and bounds must have matching nonzero length".into()));
        }
        if let Some(a) = self.axes.iter().find(|&&a| a >= dim) {
            return Err(Error::Input(format!("grid axis {a} out of range for a {dim}-dimensional model")));
        }
        let mut sorted = self.axes.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.axes.len() {
            return Err(Error::Input("grid axes must be distinct".into()));
        }
        if self.lower.iter().zip(&self.upper).any(|(l, u)| !(l < u)) {
            return Err(Error::Input("grid bounds must satisfy lower < upper".into()));
        }
        match &self.other {
            OtherAxes::Fixed(v) => check_dim(dim, v.len())?,
            OtherAxes::MaxOver(vs) => {
                if vs.is_empty() {
                    return Err(Error::Input("marginalization needs at least one setting".into()));
                }
                for v in vs {
                    check_dim(dim, v.len())?;
                }
            }
        }
        let cells = self.cell_count();
        if cells > MAX_GRID_CELLS {
            return Err(Error::Input(format!("grid has {cells} cells, limit is {MAX_GRID_CELLS}")));
        }
        Ok(())
    }
}

/// One exported grid cell.
#[derive(Clone, Debug, PartialEq)]
pub struct GridCell {
    pub coords: Vec<f64>,
    pub phi: f64,
    pub distance: f64,
}

impl GpisModel {
    /// Evaluates φ and d over a grid; rows in lexicographic order with the last axis fastest.
    pub fn grid(&self, spec: &GridSpec) -> Result<Vec<GridCell>> {
        spec.validate(self.dim())?;
        let values: Vec<Vec<f64>> = (0..spec.axes.len()).map(|k| spec.axis_values(k)).collect();
        let total = spec.cell_count() as usize;
        let bases: Vec<DVector<f64>> = match &spec.other {
            OtherAxes::Fixed(v) => vec![DVector::from_column_slice(v)],
            OtherAxes::MaxOver(vs) => vs.iter().map(|v| DVector::from_column_slice(v)).collect(),
        };
        (0..total)
            .into_par_iter()
            .map(|flat| {
                let mut coords = vec![0.0; values.len()];
                let mut rem = flat;
                for k in (0..values.len()).rev() {
                    coords[k] = values[k][rem % values[k].len()];
                    rem /= values[k].len();
                }
                let mut phi = f64::NEG_INFINITY;
                for base in &bases {
                    let mut q = base.clone();
                    for (&axis, &c) in spec.axes.iter().zip(&coords) {
                        q[axis] = c;
                    }
                    phi = phi.max(self.infer(&q)?);
                }
                Ok(GridCell { coords, phi, distance: self.distance_from_phi(phi) })
            })
            .collect()
    }
}

/// CSV with columns `q{axis}..., phi, d`.
pub fn grid_to_csv(spec: &GridSpec, cells: &[GridCell]) -> String {
    let header: Vec<String> = spec
        .axes
        .iter()
        .map(|a| format!("q{a}"))
        .chain(["phi".to_string(), "d".to_string()])
        .collect();
    let rows: Vec<Vec<f64>> = cells
        .iter()
        .map(|c| c.coords.iter().copied().chain([c.phi, c.distance]).collect())
        .collect();
    rows_to_csv(&header, rows.iter().map(Vec::as_slice))
}

/// Compact `phi d` formatting used by the CLI.
pub fn format_query(f: &FieldQuery) -> String {
    let grad: Vec<String> = f.gradient.iter().map(|g| fmt_f64(*g)).collect();
    format!("phi = {:.6}\nd = {:.6}\ngradient = [{}]", f.phi, f.distance, grad.join(", "))
}
