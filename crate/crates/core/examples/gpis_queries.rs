//! Fit a field model to sampled configurations and query it.

use std::sync::Arc;

use nalgebra::DVector;
use nullmanifold::{gauss_newton_solve, newton_traverse, GpParams, GpisModel, Robot, TaskInstance, TraversalParams};

fn main() -> nullmanifold::Result<()> {
    let task = TaskInstance::planar(Arc::new(Robot::planar_unit3()), 1.5, 0.5)?;
    let start = gauss_newton_solve(&task, &DVector::from_vec(vec![0.3, -0.6, 0.4]), 1e-10, 100)?.q;
    let samples = newton_traverse(&task, &start, &TraversalParams::with_beta(0.5))?.samples;

    let model = GpisModel::build(samples.clone(), GpParams::default())?;
    println!("{} points, lengthscale {}, build {:.2} ms", model.len(), model.lengthscale(), model.build_time().as_secs_f64() * 1e3);

    let on = samples[3].clone();
    let off = &on + DVector::from_vec(vec![0.2, -0.1, 0.15]);
    let far = DVector::from_vec(vec![3.0, 3.0, 3.0]);
    for (name, q) in [("training point", on), ("nearby", off), ("far away", far)] {
        let f = model.field(&q)?;
        println!(
            "{name:<15} phi {:.6}  d {:.4}  |grad| {:.3e}  on manifold: {}",
            f.phi,
            f.distance,
            f.gradient.norm(),
            model.is_on_manifold(&q)?
        );
    }
    Ok(())
}
