use std::ops::Mul;

use nalgebra::{Matrix3, Rotation3, Unit, Vector3, Vector6};

/// Rigid transform stored as a rotation matrix and a translation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub rotation: Rotation3<f64>,
    pub translation: Vector3<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Pose { rotation: Rotation3::identity(), translation: Vector3::zeros() }
    }

    pub fn new(rotation: Rotation3<f64>, translation: Vector3<f64>) -> Self {
        Pose { rotation, translation }
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        Pose { rotation: Rotation3::identity(), translation }
    }

    /// Roll-pitch-yaw about fixed x, y, z axes: `R = Rz(yaw) Ry(pitch) Rx(roll)`.
    pub fn from_rpy(translation: Vector3<f64>, rpy: [f64; 3]) -> Self {
        Pose {
            rotation: Rotation3::from_euler_angles(rpy[0], rpy[1], rpy[2]),
            translation,
        }
    }

    pub fn from_axis_angle(axis: &Unit<Vector3<f64>>, angle: f64) -> Self {
        Pose { rotation: Rotation3::from_axis_angle(axis, angle), translation: Vector3::zeros() }
    }

    pub fn inverse(&self) -> Self {
        let r = self.rotation.inverse();
        Pose { rotation: r, translation: -(r * self.translation) }
    }

    /// Largest deviation of `RᵀR` from identity, entrywise.
    pub fn orthonormality_error(&self) -> f64 {
        let m = self.rotation.matrix();
        (m.transpose() * m - Matrix3::identity()).abs().max()
    }
}

impl Mul for Pose {
    type Output = Pose;

    fn mul(self, rhs: Pose) -> Pose {
        Pose {
            rotation: self.rotation * rhs.rotation,
            translation: self.translation + self.rotation * rhs.translation,
        }
    }
}

impl Mul<&Pose> for &Pose {
    type Output = Pose;

    fn mul(self, rhs: &Pose) -> Pose {
        *self * *rhs
    }
}

fn vee(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)]) * 0.5
}

/// Rotation angles past this use the symmetric-part axis extraction.
const NEAR_PI: f64 = std::f64::consts::PI - 1e-3;

/// Matrix logarithm of a rotation as an axis-angle vector with angle in `[0, π]`.
pub fn so3_log(rotation: &Rotation3<f64>) -> Vector3<f64> {
    let m = rotation.matrix();
    let skew = vee(m);
    let sin_theta = skew.norm();
    let cos_theta = ((m.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let theta = sin_theta.atan2(cos_theta);
    if theta < 1e-12 {
        return Vector3::zeros();
    }
    if theta < NEAR_PI {
        return skew * (theta / sin_theta);
    }
    // Near π the skew part vanishes. The symmetric part is
    // cosθ·I + (1 − cosθ)·aaᵀ, which reduces to (R + I)/2 = aaᵀ at θ = π.
    let sym = (m + m.transpose()) * 0.5 - Matrix3::identity() * cos_theta;
    let outer = sym / (1.0 - cos_theta);
    let i = (0..3)
        .max_by(|&a, &b| outer[(a, a)].total_cmp(&outer[(b, b)]))
        .unwrap_or(0);
    let mut axis: Vector3<f64> = outer.column(i) / outer[(i, i)].sqrt();
    axis.normalize_mut();
    if axis.dot(&skew) < 0.0 {
        axis = -axis;
    }
    axis * theta
}

/// Inverse of the left Jacobian of SO(3) at `phi`.
///
/// If `R = exp(phi)` and `R` is perturbed on the left by a small world-frame
/// rotation `w`, the log changes by `J_l⁻¹(phi)·w` to first order.
pub fn so3_left_jacobian_inverse(phi: &Vector3<f64>) -> Matrix3<f64> {
    let theta = phi.norm();
    let k = phi.cross_matrix();
    let coeff = if theta < 1e-4 {
        1.0 / 12.0 + theta * theta / 720.0
    } else {
        1.0 / (theta * theta) - (1.0 + theta.cos()) / (2.0 * theta * theta.sin())
    };
    Matrix3::identity() - k * 0.5 + k * k * coeff
}

/// Error from `current` to `target`: `(t_target − t_current, log(R_currentᵀ R_target))`.
pub fn se3_error(current: &Pose, target: &Pose) -> Vector6<f64> {
    let dt = target.translation - current.translation;
    let dr = so3_log(&(current.rotation.inverse() * target.rotation));
    Vector6::new(dt.x, dt.y, dt.z, dr.x, dr.y, dr.z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn se3_error_examples() {
        let p = Pose::from_rpy(Vector3::new(0.1, 0.2, 0.3), [0.3, -0.2, 1.0]);
        assert_eq!(se3_error(&p, &p), Vector6::zeros());

        let q = Pose::new(p.rotation, p.translation + Vector3::new(0.1, 0.0, 0.0));
        let e = se3_error(&p, &q);
        assert!((e - Vector6::new(0.1, 0.0, 0.0, 0.0, 0.0, 0.0)).norm() < 1e-15);

        let a = Pose::identity();
        let b = Pose::from_axis_angle(&Vector3::z_axis(), FRAC_PI_2);
        let e = se3_error(&a, &b);
        assert!((e - Vector6::new(0.0, 0.0, 0.0, 0.0, 0.0, FRAC_PI_2)).norm() < 1e-14);
    }

    #[test]
    fn log_round_trips_including_near_pi() {
        let axis = Unit::new_normalize(Vector3::new(0.3, -0.5, 0.8));
        for &angle in &[1e-13, 1e-6, 0.3, 2.0, PI - 1e-2, PI - 1e-5, PI - 1e-9, PI] {
            let r = Rotation3::from_axis_angle(&axis, angle);
            let phi = so3_log(&r);
            let back = Rotation3::new(phi);
            assert!((back.matrix() - r.matrix()).abs().max() < 1e-9, "angle {angle}");
            if angle > 1e-12 && angle < PI - 1e-9 {
                assert!((phi - axis.into_inner() * angle).norm() < 1e-8, "angle {angle}");
            }
        }
        assert_eq!(so3_log(&Rotation3::identity()), Vector3::zeros());
    }

    #[test]
    fn left_jacobian_inverse_matches_finite_differences() {
        let phi = Vector3::new(0.4, -1.1, 0.7);
        let jinv = so3_left_jacobian_inverse(&phi);
        let r = Rotation3::new(phi);
        let h = 1e-6;
        for i in 0..3 {
            let mut w = Vector3::zeros();
            w[i] = h;
            let plus = so3_log(&(Rotation3::new(w) * r));
            let minus = so3_log(&(Rotation3::new(-w) * r));
            let fd = (plus - minus) / (2.0 * h);
            assert!((fd - jinv.column(i)).norm() < 1e-8);
        }
        let small = Vector3::new(1e-6, 0.0, 0.0);
        let jinv = so3_left_jacobian_inverse(&small);
        assert!((jinv - Matrix3::identity()).abs().max() < 1e-6);
    }

    #[test]
    fn compose_and_invert() {
        let p = Pose::from_rpy(Vector3::new(1.0, -2.0, 0.5), [0.1, 0.2, 0.3]);
        let id = p * p.inverse();
        assert!(id.translation.norm() < 1e-14);
        assert!((id.rotation.matrix() - Matrix3::identity()).abs().max() < 1e-14);
        assert!(p.orthonormality_error() < 1e-14);
    }
}
