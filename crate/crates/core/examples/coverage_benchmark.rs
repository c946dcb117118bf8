//! Coverage of the planar loop by traversal and by random restarts of IK.

use std::sync::Arc;

use nalgebra::DVector;
use nullmanifold::{
    coverage_volume, gauss_newton_solve, newton_traverse, random_ik_sample, CoverageParams, Robot, TaskInstance,
    TraversalParams,
};

fn main() -> nullmanifold::Result<()> {
    let task = TaskInstance::planar(Arc::new(Robot::planar_unit3()), 1.5, 0.5)?;
    let start = gauss_newton_solve(&task, &DVector::from_vec(vec![0.3, -0.6, 0.4]), 1e-10, 100)?.q;

    for epsilon in [0.5, 0.05] {
        let params = CoverageParams { epsilon, ..Default::default() };
        println!("epsilon = {epsilon}");
        for beta in [1.0, 0.5, 0.1] {
            let traversed = newton_traverse(&task, &start, &TraversalParams::with_beta(beta))?;
            let random = random_ik_sample(&task, traversed.len(), 1e-6, 7)?;
            let a = coverage_volume(&traversed.samples, &params)?.volume;
            let b = coverage_volume(&random.samples, &params)?.volume;
            println!("  n = {:3}: traversal {a:.4}, random IK {b:.4}, ratio {:.2}", traversed.len(), a / b);
        }
    }
    Ok(())
}
