//! Trace the self-motion loop of a three-link planar arm holding its tip at (1.5, 0.5).

use std::sync::Arc;

use nalgebra::DVector;
use nullmanifold::{gauss_newton_solve, newton_traverse, Robot, TaskInstance, TraversalParams};

fn main() -> nullmanifold::Result<()> {
    let task = TaskInstance::planar(Arc::new(Robot::planar_unit3()), 1.5, 0.5)?;
    let start = gauss_newton_solve(&task, &DVector::from_vec(vec![0.3, -0.6, 0.4]), 1e-10, 100)?.q;

    for beta in [1.0, 0.5, 0.25] {
        let set = newton_traverse(&task, &start, &TraversalParams::with_beta(beta))?;
        println!(
            "beta {beta:<4}: {:3} samples, mean residual {:.2e}, {:?}",
            set.len(),
            set.mean_residual_norm(),
            set.termination
        );
    }

    let set = newton_traverse(&task, &start, &TraversalParams::with_beta(0.5))?;
    println!("\nq0,q1,q2");
    for q in set.samples.iter().take(6) {
        println!("{:.4},{:.4},{:.4}", q[0], q[1], q[2]);
    }
    println!("... ({} more)", set.len().saturating_sub(6));
    Ok(())
}
