//! Export a two-axis slice of the field as CSV on stdout.

use std::sync::Arc;

use nalgebra::DVector;
use nullmanifold::gpis::grid_to_csv;
use nullmanifold::{
    gauss_newton_solve, newton_traverse, GpParams, GpisModel, GridSpec, OtherAxes, Robot, TaskInstance,
    TraversalParams,
};

fn main() -> nullmanifold::Result<()> {
    let task = TaskInstance::planar(Arc::new(Robot::planar_unit3()), 1.5, 0.5)?;
    let start = gauss_newton_solve(&task, &DVector::from_vec(vec![0.3, -0.6, 0.4]), 1e-10, 100)?.q;
    let samples = newton_traverse(&task, &start, &TraversalParams::with_beta(0.25))?.samples;
    let model = GpisModel::build(samples, GpParams::default())?;

    let pi = std::f64::consts::PI;
    let spec = GridSpec {
        axes: vec![0, 1],
        lower: vec![-pi, -pi],
        upper: vec![pi, pi],
        resolution: 0.25,
        other: OtherAxes::Fixed(vec![0.0, 0.0, start[2]]),
    };
    let cells = model.grid(&spec)?;
    eprintln!("{} cells, {} above threshold", cells.len(), cells.iter().filter(|c| c.phi > 0.995).count());
    print!("{}", grid_to_csv(&spec, &cells));
    Ok(())
}
