//! Compare the two traversal correctors on the planar loop.

use std::sync::Arc;

use nalgebra::DVector;
use nullmanifold::{gauss_newton_solve, traverse, Method, Robot, TaskInstance, TraversalParams};

fn main() -> nullmanifold::Result<()> {
    let task = TaskInstance::planar(Arc::new(Robot::planar_unit3()), 1.5, 0.5)?;
    let start = gauss_newton_solve(&task, &DVector::from_vec(vec![0.3, -0.6, 0.4]), 1e-10, 100)?.q;

    println!("{:<8} {:>5} {:>8} {:>12} {:>12}", "method", "beta", "samples", "mean |r|", "time (ms)");
    for beta in [1.5, 1.0, 0.5, 0.1] {
        for method in [Method::Newton, Method::Zigzag] {
            let set = traverse(&task, &start, &TraversalParams::with_beta(beta), method)?;
            println!(
                "{:<8} {:>5} {:>8} {:>12.3e} {:>12.3}",
                method.to_string(),
                beta,
                set.len(),
                set.mean_residual_norm(),
                set.sampling_time.as_secs_f64() * 1e3
            );
        }
    }
    Ok(())
}
