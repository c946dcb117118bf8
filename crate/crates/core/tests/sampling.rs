mod common;

use std::sync::Arc;

use nalgebra::DVector;
use nullmanifold::kinematics::wrapped_distance;
use nullmanifold::sampling::{random_ik_sample, JointBox, Termination};
use nullmanifold::{
    explore, gauss_newton_solve, newton_traverse, sample_family, traverse, zigzag_traverse, Error, Method, Robot,
    TaskInstance, TraversalParams,
};
use proptest::prelude::*;

use common::*;

#[test]
fn tangent_step_residual_shrinks_quadratically() {
    let task = planar_task();
    let start = planar_start(&task);
    let mean_pre = |beta: f64| {
        let set = newton_traverse(&task, &start, &TraversalParams::with_beta(beta)).unwrap();
        let pre: Vec<f64> = set
            .samples
            .iter()
            .zip(&set.tangents)
            .map(|(q, v)| task.residual_norm(&(q + v * beta)).unwrap() / (beta * beta))
            .collect();
        pre.iter().sum::<f64>() / pre.len() as f64
    };
    let c: Vec<f64> = [0.5, 0.25, 0.125].iter().map(|b| mean_pre(*b)).collect();
    for w in c.windows(2) {
        let ratio = w[0] / w[1];
        assert!((0.5..=2.0).contains(&ratio), "C estimates {c:?}");
    }
}

#[test]
fn loop_closes_near_start_with_continuous_tangents() {
    let task = planar_task();
    for beta in [1.0, 0.5, 0.1] {
        let set = newton_traverse(&task, &planar_start(&task), &TraversalParams::with_beta(beta)).unwrap();
        assert_eq!(set.termination, Some(Termination::LoopClosure));
        let gap = wrapped_distance(&set.samples[0], set.samples.last().unwrap());
        assert!(gap <= 2.0 * beta, "beta {beta}: gap {gap}");
        for w in set.tangents.windows(2) {
            assert!(w[0].dot(&w[1]) > 0.0);
        }
        assert!(set.residual_consistency(&task).unwrap() <= 1e-12);
    }
}

#[test]
fn traversal_is_deterministic() {
    let task = planar_task();
    let start = planar_start(&task);
    let params = TraversalParams::with_beta(0.3);
    for method in [Method::Newton, Method::Zigzag] {
        let a = traverse(&task, &start, &params, method).unwrap();
        let b = traverse(&task, &start, &params, method).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.residual_norms, b.residual_norms);
    }
    let a = random_ik_sample(&task, 30, 1e-8, 4).unwrap();
    let b = random_ik_sample(&task, 30, 1e-8, 4).unwrap();
    assert_eq!(a.samples, b.samples);
}

#[test]
fn zigzag_needs_no_correction_on_the_manifold() {
    let task = planar_task();
    let start = planar_start(&task);
    // A vanishing step keeps the predictor on the manifold to rounding.
    let params = TraversalParams { beta: 1e-9, max_steps: 3, ..Default::default() };
    let set = zigzag_traverse(&task, &start, &params).unwrap();
    assert!(set.residual_norms.iter().all(|r| *r <= params.eps_proj));
}

#[test]
fn start_off_manifold_is_rejected() {
    let task = planar_task();
    let err = newton_traverse(&task, &DVector::zeros(3), &TraversalParams::default()).unwrap_err();
    assert!(err.is_input());
}

#[test]
fn two_redundant_directions_are_refused() {
    // Position only on a 7-joint arm: four redundant directions.
    let task = TaskInstance::new(
        Arc::new(Robot::panda()),
        nullmanifold::Target::Position3(nalgebra::Vector3::new(0.4, 0.1, 0.5)),
    )
    .unwrap();
    let q = gauss_newton_solve(&task, &Robot::panda().ready(), 1e-10, 100).unwrap().q;
    match newton_traverse(&task, &q, &TraversalParams::default()) {
        Err(Error::NullSpaceDimension(4)) => {}
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn joint_box_reverses_then_stops() {
    let task = planar_task();
    let start = planar_start(&task);
    let lower: Vec<f64> = start.iter().map(|x| x - 0.6).collect();
    let upper: Vec<f64> = start.iter().map(|x| x + 0.6).collect();
    let params = TraversalParams { joint_box: Some(JointBox { lower, upper }), ..TraversalParams::with_beta(0.1) };
    let set = newton_traverse(&task, &start, &params).unwrap();
    assert_eq!(set.termination, Some(Termination::JointLimit));
    assert!(set.samples.iter().all(|q| params.joint_box.as_ref().unwrap().contains(q)));
}

#[test]
fn explore_finds_nothing_new_on_a_single_loop() {
    let task = planar_task();
    let start = planar_start(&task);
    let params = TraversalParams::with_beta(0.5);
    let plain = newton_traverse(&task, &start, &params).unwrap();
    let explored = explore(&task, &start, &params, Method::Newton, 10).unwrap();
    assert_eq!(plain.len(), explored.len());
}

#[test]
fn family_of_one_equals_labeled_traversal() {
    let tasks = line_family();
    let one = &tasks[..1];
    let params = TraversalParams::with_beta(0.3);
    let initial = Robot::panda().ready();
    let family = sample_family(one, &params, &initial).unwrap();
    let seed = gauss_newton_solve(&one[0], &initial, params.eps_proj, 100).unwrap();
    let plain = newton_traverse(&one[0], &seed.q, &params).unwrap();
    assert_eq!(family.samples.samples, plain.samples);
    let coord = one[0].family_coordinate().unwrap().to_vec();
    assert!(family.samples.labels.iter().all(|l| *l == coord));
}

#[test]
fn line_family_residuals_within_tolerance() {
    let tasks = line_family();
    let params = TraversalParams::with_beta(0.3);
    let out = sample_family(&tasks, &params, &Robot::panda().ready()).unwrap();
    assert!(out.instances.iter().all(|i| i.succeeded()));
    let mut offset = 0;
    for inst in &out.instances {
        for q in &out.samples.samples[offset..offset + inst.samples] {
            assert!(tasks[inst.index].residual_norm(q).unwrap() <= params.eps_proj);
        }
        offset += inst.samples;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Any reachable, non-singular planar target gives a closed loop of on-manifold samples.
    #[test]
    fn planar_targets_traverse_cleanly(radius in 0.6f64..2.6, angle in -3.0f64..3.0) {
        let robot = Arc::new(Robot::planar_unit3());
        let task = TaskInstance::planar(robot, radius * angle.cos(), radius * angle.sin()).unwrap();
        let seed = random_ik_sample(&task, 1, 1e-10, 0).unwrap();
        let set = newton_traverse(&task, &seed.samples[0], &TraversalParams::with_beta(0.4)).unwrap();
        prop_assert_eq!(set.termination, Some(Termination::LoopClosure));
        prop_assert!(set.residual_norms.iter().all(|r| *r <= 1e-6));
        for w in set.samples.windows(2) {
            let d = wrapped_distance(&w[0], &w[1]);
            prop_assert!((0.1..=0.6).contains(&d), "spacing {}", d);
        }
    }
}
