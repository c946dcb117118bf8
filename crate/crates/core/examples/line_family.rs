//! Sample a whole family of pick targets along a line and fit one model to all of it.

use std::sync::Arc;

use nullmanifold::{sample_family, GpParams, GpisModel, Robot, TaskSpec, TraversalParams};

fn main() -> nullmanifold::Result<()> {
    let robot = Arc::new(Robot::panda());
    let spec = TaskSpec::from_json(
        r#"{"family": "line", "from": [-0.5, 0.6], "to": [0.5, 0.6], "z": 0.3, "count": 30, "orientation": "down"}"#,
    )?;
    let tasks = spec.instances(robot.clone())?;
    let outcome = sample_family(&tasks, &TraversalParams::with_beta(0.12), &robot.ready())?;
    for inst in outcome.instances.iter().step_by(5) {
        println!("instance {:2} at s = {:.3}: {} samples", inst.index, inst.coordinate[0], inst.samples);
    }

    let model = GpisModel::build(outcome.samples.samples.clone(), GpParams::default())?;
    println!(
        "{} samples from {} instances, model built in {:.2} s",
        model.len(),
        tasks.len(),
        model.build_time().as_secs_f64()
    );
    Ok(())
}
