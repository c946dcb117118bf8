#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DVector;
use nullmanifold::kinematics::wrapped_distance;
use nullmanifold::{gauss_newton_solve, Robot, TaskInstance, TaskSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const PLANAR_TARGET: (f64, f64) = (1.5, 0.5);

pub fn planar_task() -> TaskInstance {
    TaskInstance::planar(Arc::new(Robot::planar_unit3()), PLANAR_TARGET.0, PLANAR_TARGET.1).unwrap()
}

pub fn planar_start(task: &TaskInstance) -> DVector<f64> {
    gauss_newton_solve(task, &DVector::from_vec(vec![0.3, -0.6, 0.4]), 1e-12, 100).unwrap().q
}

/// Pose task at the panda's ready pose.
pub fn panda_pose_task() -> TaskInstance {
    let robot = Arc::new(Robot::panda());
    let Robot::Chain(chain) = robot.as_ref() else { unreachable!() };
    let pose = chain.fk(&robot.ready()).unwrap();
    TaskInstance::new(robot.clone(), nullmanifold::Target::Pose6(pose)).unwrap()
}

pub fn line_family() -> Vec<TaskInstance> {
    let spec = TaskSpec::from_json(r#"{"family": "line", "from": [-0.5, 0.6], "to": [0.5, 0.6], "z": 0.3, "count": 30}"#)
        .unwrap();
    spec.instances(Arc::new(Robot::panda())).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_q<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-PI..PI))
}

/// Length of the self-motion loop of a unit three-link planar arm reaching `(px, py)`.
///
/// Independent of the library: the loop is parameterized by the absolute
/// angle `psi` of the last link. The wrist then sits at `p − (cos psi, sin psi)`,
/// and closed-form two-link IK gives the first two joints for both elbow
/// branches. Length is accumulated over a fine `psi` grid in wrapped joint space.
pub fn planar_loop_length(px: f64, py: f64, steps: usize) -> f64 {
    let branch = |psi: f64, sign: f64| -> Option<[f64; 3]> {
        let (wx, wy) = (px - psi.cos(), py - psi.sin());
        let c2 = (wx * wx + wy * wy - 2.0) / 2.0;
        if c2.abs() > 1.0 {
            return None;
        }
        let q2 = sign * c2.acos();
        let q1 = wy.atan2(wx) - q2.sin().atan2(1.0 + q2.cos());
        Some([q1, q2, psi - q1 - q2])
    };
    let dist = |a: &[f64; 3], b: &[f64; 3]| {
        wrapped_distance(&DVector::from_column_slice(a), &DVector::from_column_slice(b))
    };
    let mut total = 0.0;
    for sign in [1.0, -1.0] {
        let mut prev: Option<[f64; 3]> = None;
        for i in 0..=steps {
            let psi = -PI + 2.0 * PI * i as f64 / steps as f64;
            match branch(psi, sign) {
                Some(q) => {
                    if let Some(p) = prev {
                        total += dist(&p, &q);
                    }
                    prev = Some(q);
                }
                None => prev = None,
            }
        }
    }
    total
}

pub fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}
