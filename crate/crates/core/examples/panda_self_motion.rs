//! Self-motion of a seven-joint arm that keeps its ready-pose end effector fixed.

use std::sync::Arc;

use nullmanifold::{newton_traverse, Robot, Target, TaskInstance, TraversalParams};

fn main() -> nullmanifold::Result<()> {
    let robot = Arc::new(Robot::panda());
    let Robot::Chain(chain) = robot.as_ref() else { unreachable!("panda is a spatial chain") };
    let ready = robot.ready();
    let pose = chain.fk(&ready)?;
    println!("ready pose translation {:?}", pose.translation.as_slice());

    let task = TaskInstance::new(robot.clone(), Target::Pose6(pose))?;
    let set = newton_traverse(&task, &ready, &TraversalParams::with_beta(0.5))?;
    println!("{} samples, max residual {:.2e}, {:?}", set.len(), set.residual_norms.iter().fold(0.0f64, |a, b| a.max(*b)), set.termination);
    for q in set.samples.iter().step_by((set.len() / 6).max(1)) {
        let joints: Vec<String> = q.iter().map(|x| format!("{x:+.3}")).collect();
        println!("  [{}]", joints.join(", "));
    }
    Ok(())
}
