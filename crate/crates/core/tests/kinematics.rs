mod common;

use std::sync::Arc;

use nalgebra::{DVector, Matrix3, Rotation3, Vector3};
use nullmanifold::kinematics::{wrap_angles, Pose};
use nullmanifold::sampling::null_space_basis;
use nullmanifold::{Robot, Target, TaskInstance};
use proptest::prelude::*;

use common::*;

/// Output of tests/oracles/panda_fk.py for the ready pose of data/panda.json.
#[rustfmt::skip]
#[allow(clippy::excessive_precision)]
const READY_POSE: [[f64; 4]; 3] = [
    [1.00000000000000000e+00, -1.79380389039134874e-16, -1.21168838820085180e-16, 3.06890566592941172e-01],
    [-1.99673461754273926e-16, -1.00000000000000000e+00, -8.65956056235493286e-17, -7.42545462805422719e-17],
    [-1.00875766104946128e-16, 8.65956056235493286e-17, -1.00000000000000000e+00, 4.86882052302839208e-01],
];

#[test]
fn panda_ready_pose_matches_script_oracle() {
    let robot = Robot::panda();
    let Robot::Chain(chain) = &robot else { unreachable!() };
    let pose = chain.fk(&robot.ready()).unwrap();
    for (r, row) in READY_POSE.iter().enumerate() {
        for (c, expected) in row[..3].iter().enumerate() {
            assert!((pose.rotation[(r, c)] - expected).abs() < 1e-12, "R[{r},{c}]");
        }
        assert!((pose.translation[r] - row[3]).abs() < 1e-12, "t[{r}]");
    }
}

fn tasks_of_every_kind() -> Vec<TaskInstance> {
    let panda = Arc::new(Robot::panda());
    let target = Pose::new(Rotation3::from_euler_angles(0.3, -0.2, 1.1), Vector3::new(0.4, 0.1, 0.5));
    vec![
        planar_task(),
        TaskInstance::new(panda.clone(), Target::Position3(Vector3::new(0.4, 0.1, 0.5))).unwrap(),
        TaskInstance::new(panda.clone(), Target::Pose6(target)).unwrap(),
        TaskInstance::new(panda, Target::PositionFixedOrientation(target)).unwrap(),
    ]
}

#[test]
fn residual_jacobians_match_finite_differences() {
    let mut rng = rng(21);
    let h = 1e-6;
    for task in tasks_of_every_kind() {
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let q = random_q(&mut rng, task.dof());
            let j = task.residual_jacobian(&q).unwrap();
            for k in 0..task.dof() {
                let mut qp = q.clone();
                let mut qm = q.clone();
                qp[k] += h;
                qm[k] -= h;
                let fd = (task.residual(&qp).unwrap() - task.residual(&qm).unwrap()) / (2.0 * h);
                worst = worst.max((fd - j.column(k)).amax());
            }
        }
        assert!(worst < 1e-5, "{}: {worst:e}", task.target().kind_name());
    }
}

#[test]
fn pose_residual_is_first_order_accurate_on_manifold() {
    let task = panda_pose_task();
    let q = task.robot().ready();
    assert!(task.residual_norm(&q).unwrap() < 1e-12);
    let j = task.residual_jacobian(&q).unwrap();
    let mut rng = rng(22);
    for _ in 0..50 {
        let delta = random_q(&mut rng, 7).normalize() * 1e-3;
        let predicted = &j * &delta;
        let actual = task.residual(&(&q + &delta)).unwrap();
        assert!((actual - &predicted).norm() / predicted.norm() < 1e-3);
    }
}

#[test]
fn null_space_directions_leave_task_invariant_on_manifold() {
    let task = panda_pose_task();
    let q = task.robot().ready();
    let j = task.residual_jacobian(&q).unwrap();
    let basis = null_space_basis(&j, 1e-8).unwrap();
    assert_eq!(basis.ncols(), 1);
    let v = basis.column(0).into_owned();
    assert!((&j * &v).norm() <= 1e-10);
    assert!((v.norm() - 1.0).abs() < 1e-12);
}

#[test]
fn chain_rotation_stays_orthonormal() {
    let robot = Robot::panda();
    let Robot::Chain(chain) = &robot else { unreachable!() };
    let mut rng = rng(23);
    for _ in 0..100 {
        let pose = chain.fk(&random_q(&mut rng, 7)).unwrap();
        let r: Matrix3<f64> = *pose.rotation.matrix();
        assert!((r.transpose() * r - Matrix3::identity()).amax() < 1e-10);
        assert!((r.determinant() - 1.0).abs() < 1e-10);
    }
}

proptest! {
    #[test]
    fn planar_fk_ignores_full_turns(q in proptest::collection::vec(-20.0f64..20.0, 3)) {
        let Robot::Planar(arm) = Robot::planar_unit3() else { unreachable!() };
        let q = DVector::from_vec(q);
        let a = arm.fk(&q).unwrap();
        let b = arm.fk(&wrap_angles(&q)).unwrap();
        prop_assert!((a - b).norm() < 1e-12);
    }
}
