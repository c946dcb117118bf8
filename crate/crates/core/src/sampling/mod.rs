//! Sampling configurations on or near a solution manifold.
//!
//! Jacobian-guided traversal walks a one-dimensional self-motion manifold by
//! stepping along the null space of the task Jacobian and correcting back
//! toward the manifold. Two correctors are provided: full Gauss-Newton
//! projection ([`Method::Newton`]) and overshooting zigzag correction
//! ([`Method::Zigzag`]). [`random_ik_sample`] is the baseline that solves IK
//! from uniformly random starts.

mod family;
mod io;
mod random_ik;
mod solve;
mod traverse;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::task::TaskInstance;

pub use family::{sample_family, FamilyOutcome, InstanceOutcome};
pub use io::SampleMetadata;
pub use random_ik::{random_configuration, random_ik_sample, RANDOM_IK_MAX_ITER};
pub use solve::{correction_direction, gauss_newton_solve, null_space_basis, pinv_solve, Solution, SINGULAR_TOL};
pub use traverse::{explore, newton_traverse, traverse, zigzag_traverse};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Newton,
    Zigzag,
    RandomIk,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Newton => "newton",
            Method::Zigzag => "zigzag",
            Method::RandomIk => "random_ik",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "newton" => Ok(Method::Newton),
            "zigzag" => Ok(Method::Zigzag),
            "random_ik" | "random-ik" => Ok(Method::RandomIk),
            other => Err(Error::Input(format!("unknown sampling method '{other}'"))),
        }
    }
}

/// Why a traversal stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Returned within β of an earlier sample.
    LoopClosure,
    MaxSteps,
    /// The corrector could not bring a step back to the manifold.
    ProjectionFailure,
    /// The null space stopped being one-dimensional (singular configuration).
    SingularTangent,
    /// Both traversal directions left the joint box.
    JointLimit,
}

/// Axis-aligned joint box. Traversal steps leaving it are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl JointBox {
    pub fn contains(&self, q: &DVector<f64>) -> bool {
        q.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(x, (lo, hi))| *x >= *lo && *x <= *hi)
    }
}

/// Knobs for traversal and projection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TraversalParams {
    /// Tangent step length.
    pub beta: f64,
    /// Projection tolerance on `‖r‖`.
    pub eps_proj: f64,
    /// Zigzag overshoot factor, > 1.
    pub gamma: f64,
    pub max_steps: usize,
    pub max_proj_iters: usize,
    /// Most recent samples excluded from the loop-closure test.
    pub termination_skip: usize,
    pub seed: u64,
    /// `None` is the full `[-π, π)ⁿ` torus.
    pub joint_box: Option<JointBox>,
}

impl Default for TraversalParams {
    fn default() -> Self {
        TraversalParams {
            beta: 0.5,
            eps_proj: 1e-6,
            gamma: 1.5,
            max_steps: 10_000,
            max_proj_iters: 10,
            termination_skip: 3,
            seed: 0,
            joint_box: None,
        }
    }
}

impl TraversalParams {
    pub fn with_beta(beta: f64) -> Self {
        TraversalParams { beta, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: &dyn fmt::Display| Err(Error::Parameter(format!("{what} out of range: {v}")));
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad("beta", &self.beta);
        }
        if !(self.eps_proj > 0.0) {
            return bad("eps_proj", &self.eps_proj);
        }
        if !(self.gamma > 1.0 && self.gamma.is_finite()) {
            return bad("gamma", &self.gamma);
        }
        if self.termination_skip < 1 {
            return bad("termination_skip", &self.termination_skip);
        }
        if self.max_proj_iters < 1 {
            return bad("max_proj_iters", &self.max_proj_iters);
        }
        if let Some(b) = &self.joint_box {
            if b.lower.len() != b.upper.len() || b.lower.iter().zip(&b.upper).any(|(l, u)| !(l < u)) {
                return Err(Error::Parameter("joint box bounds must be ordered pairs".into()));
            }
        }
        Ok(())
    }
}

/// Ordered configurations on/near a manifold with their residual norms.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub samples: Vec<DVector<f64>>,
    pub residual_norms: Vec<f64>,
    /// Task-family coordinate per sample; each row is empty when unlabeled.
    pub labels: Vec<Vec<f64>>,
    pub method: Method,
    /// Tangent step used; `None` for random IK.
    pub beta: Option<f64>,
    pub sampling_time: Duration,
    /// Tangent direction used at each recorded step (traversals only).
    pub tangents: Vec<DVector<f64>>,
    pub termination: Option<Termination>,
    pub warnings: Vec<String>,
}

impl SampleSet {
    pub fn empty(method: Method, beta: Option<f64>) -> Self {
        SampleSet {
            samples: Vec::new(),
            residual_norms: Vec::new(),
            labels: Vec::new(),
            method,
            beta,
            sampling_time: Duration::ZERO,
            tangents: Vec::new(),
            termination: None,
            warnings: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dof(&self) -> Option<usize> {
        self.samples.first().map(|q| q.len())
    }

    pub fn label_dim(&self) -> usize {
        self.labels.first().map_or(0, |l| l.len())
    }

    pub fn push(&mut self, q: DVector<f64>, residual_norm: f64) {
        self.samples.push(q);
        self.residual_norms.push(residual_norm);
        self.labels.push(Vec::new());
    }

    pub fn mean_residual_norm(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.residual_norms.iter().sum::<f64>() / self.len() as f64
    }

    /// Labels every sample with `coordinate`.
    pub fn label_all(&mut self, coordinate: &[f64]) {
        for l in &mut self.labels {
            *l = coordinate.to_vec();
        }
    }

    /// Appends `other`, keeping the order of both.
    pub fn extend(&mut self, other: SampleSet) {
        self.samples.extend(other.samples);
        self.residual_norms.extend(other.residual_norms);
        self.labels.extend(other.labels);
        self.tangents.extend(other.tangents);
        self.warnings.extend(other.warnings);
        self.sampling_time += other.sampling_time;
    }

    /// Largest discrepancy between stored and recomputed residual norms.
    pub fn residual_consistency(&self, task: &TaskInstance) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (q, r) in self.samples.iter().zip(&self.residual_norms) {
            worst = worst.max((task.residual_norm(q)? - r).abs());
        }
        Ok(worst)
    }
}
