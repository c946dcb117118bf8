//! Forward kinematics, Jacobians, and pose errors for planar arms and
//! spatial serial chains.

mod chain;
mod description;
mod planar;
mod pose;

use std::f64::consts::PI;

use nalgebra::DVector;

pub use chain::{Joint, KinematicChain};
pub use description::{OriginDescription, Robot, RobotDescription, JointDescription};
pub use planar::PlanarChain;
pub use pose::{se3_error, so3_left_jacobian_inverse, so3_log, Pose};

const TWO_PI: f64 = 2.0 * PI;

/// Maps an angle into `[-π, π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x - TWO_PI * ((x + PI) / TWO_PI).floor();
    // floor() can land one ulp on the wrong side of the boundary
    if y >= PI {
        y -= TWO_PI;
    } else if y < -PI {
        y += TWO_PI;
    }
    y
}

/// Wraps every joint angle of `q` into `[-π, π)`.
pub fn wrap_angles(q: &DVector<f64>) -> DVector<f64> {
    q.map(wrap_angle)
}

pub fn wrap_angles_mut(q: &mut DVector<f64>) {
    q.apply(|x| *x = wrap_angle(*x));
}

/// Squared toroidal distance: per-axis differences are wrapped before summing.
pub fn wrapped_distance_squared(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| wrap_angle(x - y).powi(2))
        .sum()
}

pub fn wrapped_distance(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    wrapped_distance_squared(a, b).sqrt()
}
