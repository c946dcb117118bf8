//! Coverage volume, residual statistics, distance-field error, and the
//! benchmark runner that tabulates them.

mod bench;

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::gpis::GpisModel;
use crate::kinematics::wrap_angle;
use crate::task::TaskInstance;

pub use bench::{run_benchmark, BenchCase, BenchConfig, BenchReport, BenchRow, MethodGrid, RobotSource, TaskSource};

/// Dimensions above this use Monte Carlo instead of an exhaustive grid.
pub const EXHAUSTIVE_MAX_DIM: usize = 3;
pub const MONTE_CARLO_POINTS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoverageParams {
    /// Grid spacing s.
    pub spacing: f64,
    /// Neighborhood radius ε.
    pub epsilon: f64,
    /// Box bounds; `None` is `[-π, π)ⁿ`.
    pub bounds: Option<(Vec<f64>, Vec<f64>)>,
    /// Seed for the Monte Carlo estimate in high dimensions.
    pub seed: u64,
}

impl Default for CoverageParams {
    fn default() -> Self {
        CoverageParams { spacing: 0.05, epsilon: 0.5, bounds: None, seed: 0 }
    }
}

impl CoverageParams {
    fn resolved_bounds(&self, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        if !(self.spacing > 0.0 && self.epsilon > 0.0) {
            return Err(Error::Parameter(format!(
                "coverage spacing and epsilon must be positive ({}, {})",
                self.spacing, self.epsilon
            )));
        }
        match &self.bounds {
            None => Ok((vec![-PI; n], vec![PI; n])),
            Some((lo, hi)) => {
                check_dim(n, lo.len())?;
                check_dim(n, hi.len())?;
                if lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
                    return Err(Error::Parameter("coverage bounds must be nonempty".into()));
                }
                Ok((lo.clone(), hi.clone()))
            }
        }
    }
}

/// Coverage volume estimate; `std_error` is set for Monte Carlo estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Coverage {
    pub volume: f64,
    pub std_error: Option<f64>,
}

const PERIOD: f64 = 2.0 * PI;

/// Indices `i` in `0..count` whose position `lo + i·step` lies within `eps` of `x`
/// in wrapped (periodic) distance, paired with that 1-D distance.
fn lattice_hits(x: f64, lo: f64, step: f64, count: usize, eps: f64) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::new();
    for shift in [-PERIOD, 0.0, PERIOD] {
        let c = x + shift;
        let first = ((c - eps - lo) / step).ceil().max(0.0);
        let last = ((c + eps - lo) / step).floor().min(count as f64 - 1.0);
        if last < first {
            continue;
        }
        for i in first as usize..=last as usize {
            let d = wrap_angle(lo + i as f64 * step - x).abs();
            if d < eps && !out.iter().any(|(j, _)| *j == i) {
                out.push((i, d));
            }
        }
    }
    out
}

/// Grid cells (per axis) overlapping the wrapped interval `[x − eps, x + eps]`.
fn cell_hits(x: f64, lo: f64, width: f64, cells: usize, eps: f64) -> Vec<usize> {
    let w = width / cells as f64;
    let mut out = Vec::new();
    for shift in [-PERIOD, 0.0, PERIOD] {
        let c = x + shift;
        let first = ((c - eps - lo) / w).floor().max(0.0);
        let last = ((c + eps - lo) / w).floor().min(cells as f64 - 1.0);
        if last < first {
            continue;
        }
        for i in first as usize..=last as usize {
            if !out.contains(&i) {
                out.push(i);
            }
        }
    }
    out
}

/// Calls `f` with every combination drawn from per-axis candidate lists.
fn for_each_product<T: Copy>(lists: &[Vec<T>], mut f: impl FnMut(&[T])) {
    if lists.iter().any(Vec::is_empty) {
        return;
    }
    let mut idx = vec![0usize; lists.len()];
    let mut cur: Vec<T> = lists.iter().map(|l| l[0]).collect();
    loop {
        f(&cur);
        let mut k = lists.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < lists[k].len() {
                cur[k] = lists[k][idx[k]];
                break;
            }
            idx[k] = 0;
            cur[k] = lists[k][0];
        }
    }
}

/// Volume of the part of the bounds within ε (wrapped distance) of any sample.
///
/// Up to three dimensions every grid point `lo + i·s` is tested and the
/// count is multiplied by `sⁿ`. Above that, the covered fraction of the box
/// is estimated from 10⁶ uniform points.
pub fn coverage_volume(samples: &[DVector<f64>], params: &CoverageParams) -> Result<Coverage> {
    let Some(n) = samples.first().map(|q| q.len()) else {
        return Ok(Coverage { volume: 0.0, std_error: None });
    };
    for q in samples {
        check_dim(n, q.len())?;
    }
    let (lo, hi) = params.resolved_bounds(n)?;
    if n <= EXHAUSTIVE_MAX_DIM {
        Ok(Coverage { volume: exhaustive_coverage(samples, params, &lo, &hi), std_error: None })
    } else {
        Ok(monte_carlo_coverage(samples, params, &lo, &hi))
    }
}

fn exhaustive_coverage(samples: &[DVector<f64>], params: &CoverageParams, lo: &[f64], hi: &[f64]) -> f64 {
    let s = params.spacing;
    let eps = params.epsilon;
    let counts: Vec<usize> = lo
        .iter()
        .zip(hi)
        .map(|(l, h)| (((h - l) / s) - 1e-9).ceil().max(1.0) as usize)
        .collect();
    let total: usize = counts.iter().product();
    let mut hit = vec![false; total];
    for q in samples {
        let lists: Vec<Vec<(usize, f64)>> =
            (0..q.len()).map(|k| lattice_hits(q[k], lo[k], s, counts[k], eps)).collect();
        for_each_product(&lists, |combo| {
            let d2: f64 = combo.iter().map(|(_, d)| d * d).sum();
            if d2 < eps * eps {
                let flat = combo.iter().zip(&counts).fold(0, |acc, ((i, _), c)| acc * c + i);
                hit[flat] = true;
            }
        });
    }
    hit.iter().filter(|h| **h).count() as f64 * s.powi(lo.len() as i32)
}

fn monte_carlo_coverage(samples: &[DVector<f64>], params: &CoverageParams, lo: &[f64], hi: &[f64]) -> Coverage {
    let n = lo.len();
    let eps = params.epsilon;
    let widths: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| h - l).collect();
    let cells: Vec<usize> = widths.iter().map(|w| ((w / eps).floor() as usize).max(1)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let points: Vec<Vec<f64>> = (0..MONTE_CARLO_POINTS)
        .map(|_| (0..n).map(|k| rng.random_range(lo[k]..hi[k])).collect())
        .collect();
    let mut buckets: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        let key: Vec<usize> = (0..n)
            .map(|k| (((p[k] - lo[k]) / widths[k] * cells[k] as f64) as usize).min(cells[k] - 1))
            .collect();
        buckets.entry(key).or_default().push(i);
    }
    let hits: Vec<Vec<usize>> = samples
        .par_iter()
        .map(|q| {
            let lists: Vec<Vec<usize>> = (0..n).map(|k| cell_hits(q[k], lo[k], widths[k], cells[k], eps)).collect();
            let mut found = Vec::new();
            for_each_product(&lists, |key| {
                if let Some(ids) = buckets.get(key) {
                    for &i in ids {
                        let d2: f64 = (0..n).map(|k| wrap_angle(points[i][k] - q[k]).powi(2)).sum();
                        if d2 < eps * eps {
                            found.push(i);
                        }
                    }
                }
            });
            found
        })
        .collect();
    let mut covered = vec![false; MONTE_CARLO_POINTS];
    for i in hits.into_iter().flatten() {
        covered[i] = true;
    }
    let p = covered.iter().filter(|c| **c).count() as f64 / MONTE_CARLO_POINTS as f64;
    let box_volume: f64 = widths.iter().product();
    Coverage {
        volume: p * box_volume,
        std_error: Some(box_volume * (p * (1.0 - p) / MONTE_CARLO_POINTS as f64).sqrt()),
    }
}

/// Mean of `‖r(q)‖` over the samples, recomputed from the task.
pub fn mean_residual_norm(task: &TaskInstance, samples: &[DVector<f64>]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Input("mean residual of an empty sample set".into()));
    }
    let total = samples.iter().map(|q| task.residual_norm(q)).sum::<Result<f64>>()?;
    Ok(total / samples.len() as f64)
}

/// Uniform-grid nearest-neighbor index for Euclidean queries within a fixed radius.
pub struct RadiusIndex<'a> {
    points: &'a [DVector<f64>],
    cell: f64,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
}

impl<'a> RadiusIndex<'a> {
    pub fn new(points: &'a [DVector<f64>], radius: f64) -> Self {
        let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(Self::key(p, radius)).or_default().push(i);
        }
        RadiusIndex { points, cell: radius, buckets }
    }

    fn key(p: &DVector<f64>, cell: f64) -> Vec<i64> {
        p.iter().map(|x| (x / cell).floor() as i64).collect()
    }

    /// Distance to the nearest indexed point if it lies within the radius.
    pub fn nearest_within(&self, q: &DVector<f64>) -> Option<f64> {
        let center = Self::key(q, self.cell);
        let lists: Vec<Vec<i64>> = center.iter().map(|c| vec![c - 1, *c, c + 1]).collect();
        let mut best = f64::INFINITY;
        for_each_product(&lists, |key| {
            if let Some(ids) = self.buckets.get(key) {
                for &i in ids {
                    best = best.min((&self.points[i] - q).norm_squared());
                }
            }
        });
        let d = best.sqrt();
        (d <= self.cell).then_some(d)
    }
}

/// Result of comparing the field distance against a sampled ground truth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RmseReport {
    pub rmse: f64,
    /// Queries inside the cutoff that entered the average.
    pub count: usize,
    pub max_abs_error: f64,
}

/// RMSE of `|d_model(q) − min_i ‖q − oracle_i‖|` over queries whose
/// ground-truth distance is at most `cutoff` (3ℓ if `None`).
pub fn distance_rmse(
    model: &GpisModel,
    oracle: &[DVector<f64>],
    queries: &[DVector<f64>],
    cutoff: Option<f64>,
) -> Result<RmseReport> {
    if queries.is_empty() {
        return Err(Error::Input("distance RMSE needs at least one query".into()));
    }
    if oracle.is_empty() {
        return Err(Error::Input("distance RMSE needs oracle samples".into()));
    }
    let cutoff = cutoff.unwrap_or(3.0 * model.lengthscale());
    let index = RadiusIndex::new(oracle, cutoff);
    let errors: Vec<f64> = queries
        .par_iter()
        .map(|q| -> Result<Option<f64>> {
            match index.nearest_within(q) {
                Some(truth) => Ok(Some(model.distance(q)? - truth)),
                None => Ok(None),
            }
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    if errors.is_empty() {
        return Err(Error::Input("no query lies within the cutoff of the oracle".into()));
    }
    let mse = errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64;
    Ok(RmseReport {
        rmse: mse.sqrt(),
        count: errors.len(),
        max_abs_error: errors.iter().fold(0.0, |m, e| m.max(e.abs())),
    })
}

/// Regular grid of query points over a box (last axis fastest).
pub fn grid_points(lower: &[f64], upper: &[f64], resolution: f64) -> Vec<DVector<f64>> {
    let axes: Vec<Vec<f64>> = lower
        .iter()
        .zip(upper)
        .map(|(l, h)| {
            let count = (((h - l) / resolution) - 1e-9).ceil().max(1.0) as usize;
            (0..count).map(|i| l + i as f64 * resolution).collect()
        })
        .collect();
    let mut out = Vec::new();
    for_each_product(&axes, |c| out.push(DVector::from_column_slice(c)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpis::GpParams;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn one_dimensional_hand_count() {
        // grid -π + 0.5·i; sample on grid point i = 6
        let x = -PI + 3.0;
        let params = CoverageParams { spacing: 0.5, epsilon: 0.6, ..Default::default() };
        let c = coverage_volume(&[v(&[x])], &params).unwrap();
        assert!((c.volume - 1.5).abs() < 1e-12);
        assert!(c.std_error.is_none());
    }

    #[test]
    fn wraps_across_the_seam() {
        // sample at the last grid point; the first grid point is 2π − 12·0.5 ≈ 0.283 away
        let params = CoverageParams { spacing: 0.5, epsilon: 0.6, ..Default::default() };
        let x = -PI + 12.0 * 0.5;
        let c = coverage_volume(&[v(&[x])], &params).unwrap();
        assert!((c.volume - 1.5).abs() < 1e-12, "{}", c.volume);
    }

    #[test]
    fn small_epsilon_off_grid_can_be_empty() {
        let params = CoverageParams { spacing: 0.5, epsilon: 0.1, ..Default::default() };
        let c = coverage_volume(&[v(&[-PI + 0.25, -PI + 0.25])], &params).unwrap();
        assert_eq!(c.volume, 0.0);
        assert_eq!(coverage_volume(&[], &params).unwrap().volume, 0.0);
    }

    #[test]
    fn exhaustive_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let samples: Vec<_> = (0..12).map(|_| DVector::from_fn(3, |_, _| rng.random_range(-PI..PI))).collect();
        let params = CoverageParams { spacing: 0.2, epsilon: 0.45, ..Default::default() };
        let fast = coverage_volume(&samples, &params).unwrap().volume;
        let grid = grid_points(&[-PI; 3], &[PI; 3], 0.2);
        let count = grid
            .iter()
            .filter(|g| samples.iter().any(|s| crate::kinematics::wrapped_distance(g, s) < 0.45))
            .count();
        assert!((fast - count as f64 * 0.008).abs() < 1e-9);
    }

    #[test]
    fn monte_carlo_agrees_with_ball_volume() {
        // one 4-D ball of radius 0.5 well inside the box: π²r⁴/2
        let params = CoverageParams { spacing: 0.05, epsilon: 0.5, ..Default::default() };
        let c = coverage_volume(&[v(&[0.0, 0.3, -0.2, 1.0])], &params).unwrap();
        let exact = PI * PI * 0.5f64.powi(4) / 2.0;
        let se = c.std_error.unwrap();
        assert!((c.volume - exact).abs() < 4.0 * se + 1e-3, "{} vs {exact} (se {se})", c.volume);
    }

    #[test]
    fn rmse_basic_cases() {
        let center = v(&[0.1, 0.2, 0.3]);
        let m = GpisModel::build(vec![center.clone()], GpParams { noise: 0.0, ..Default::default() }).unwrap();
        let queries = grid_points(&[-0.5; 3], &[0.7; 3], 0.1);
        let r = distance_rmse(&m, &[center], &queries, None).unwrap();
        assert!(r.rmse < 1e-10);
        assert!(r.count > 0);
        assert!(distance_rmse(&m, m.points(), &[], None).is_err());
    }

    #[test]
    fn radius_index_finds_nearest() {
        let pts = vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 2.0])];
        let idx = RadiusIndex::new(&pts, 0.5);
        assert!((idx.nearest_within(&v(&[0.9, 0.1])).unwrap() - 0.02f64.sqrt()).abs() < 1e-15);
        assert!(idx.nearest_within(&v(&[0.5, 1.0])).is_none());
    }
}
