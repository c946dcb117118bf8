//! Sampling and modelling of redundancy (self-motion) manifolds.
//!
//! A task `f(q) = p*` on a redundant arm has a whole manifold of solutions.
//! This crate walks that manifold by stepping along the Jacobian null space
//! and projecting back, fits a shifted-mean Gaussian process implicit surface
//! to the samples, and answers distance / projection queries against it.
//!
//! ```no_run
//! use std::sync::Arc;
//! use nalgebra::DVector;
//! use nullmanifold::{gauss_newton_solve, newton_traverse, GpisModel, GpParams, Robot, TaskInstance, TraversalParams};
//!
//! let robot = Arc::new(Robot::planar_unit3());
//! let task = TaskInstance::planar(robot, 1.5, 0.5).unwrap();
//! let start = gauss_newton_solve(&task, &DVector::from_vec(vec![0.3, -0.6, 0.4]), 1e-10, 100).unwrap();
//! let samples = newton_traverse(&task, &start.q, &TraversalParams::default()).unwrap();
//! let model = GpisModel::build(samples.samples, GpParams::default()).unwrap();
//! let d = model.distance(&DVector::from_vec(vec![0.0, 0.0, 0.0])).unwrap();
//! println!("distance to manifold: {d}");
//! ```
//!
//! The `examples/` directory has one runnable program per capability; the
//! `nullmanifold` binary exposes the same pieces on the command line.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod format;
pub mod gpis;
pub mod kinematics;
pub mod metrics;
pub mod sampling;
pub mod task;

pub use error::{Error, Result};
pub use gpis::{FieldQuery, GpParams, GpisModel, GridSpec, OtherAxes};
pub use kinematics::{se3_error, wrap_angle, wrap_angles, wrapped_distance, KinematicChain, PlanarChain, Pose, Robot};
pub use metrics::{coverage_volume, distance_rmse, run_benchmark, BenchConfig, BenchReport, Coverage, CoverageParams};
pub use sampling::{
    explore, gauss_newton_solve, newton_traverse, null_space_basis, random_ik_sample, sample_family, traverse,
    zigzag_traverse, Method, SampleSet, Termination, TraversalParams,
};
pub use task::{OrientationSpec, Target, TaskFamily, TaskInstance, TaskSpec};
