//! Pull a configuration back onto the learned manifold with capped steps.

use std::sync::Arc;

use nalgebra::DVector;
use nullmanifold::{gauss_newton_solve, newton_traverse, GpParams, GpisModel, Robot, TaskInstance, TraversalParams};

fn main() -> nullmanifold::Result<()> {
    let task = TaskInstance::planar(Arc::new(Robot::planar_unit3()), 1.5, 0.5)?;
    let start = gauss_newton_solve(&task, &DVector::from_vec(vec![0.3, -0.6, 0.4]), 1e-10, 100)?.q;
    let samples = newton_traverse(&task, &start, &TraversalParams::with_beta(0.5))?.samples;
    let model = GpisModel::build(samples, GpParams::default())?;

    let q0 = DVector::from_vec(vec![0.9, -1.2, 0.9]);
    let path = model.path_to_manifold(&q0, 0.5, 1e-3)?;
    for (i, q) in path.iter().enumerate() {
        println!(
            "step {i:2}: [{:+.4}, {:+.4}, {:+.4}]  d = {:.5}  task residual = {:.4}",
            q[0],
            q[1],
            q[2],
            model.distance(q)?,
            task.residual_norm(q)?
        );
    }
    Ok(())
}
