use nalgebra::{DVector, Matrix6xX, Unit, Vector3};

use super::Pose;
use crate::error::{check_dim, Error, Result};

/// A revolute joint: fixed transform from the parent frame, then a rotation
/// about `axis` (expressed in the joint frame).
#[derive(Clone, Debug, PartialEq)]
pub struct Joint {
    pub axis: Unit<Vector3<f64>>,
    pub origin: Pose,
}

impl Joint {
    pub fn new(axis: Vector3<f64>, origin: Pose) -> Result<Self> {
        let norm = axis.norm();
        if !(norm > 1e-9 && norm.is_finite()) {
            return Err(Error::Parameter(format!("joint axis must be nonzero, got {axis:?}")));
        }
        Ok(Joint { axis: Unit::new_normalize(axis), origin })
    }

    pub fn revolute_z(origin: Pose) -> Self {
        Joint { axis: Vector3::z_axis(), origin }
    }
}

/// Spatial serial chain of revolute joints followed by a fixed tool transform.
#[derive(Clone, Debug, PartialEq)]
pub struct KinematicChain {
    joints: Vec<Joint>,
    tool: Pose,
    ready: Option<DVector<f64>>,
}

/// World-frame joint axes and origins gathered during a forward pass.
struct Frames {
    axes: Vec<Vector3<f64>>,
    origins: Vec<Vector3<f64>>,
    tool: Pose,
}

impl KinematicChain {
    pub fn new(joints: Vec<Joint>, tool: Pose) -> Result<Self> {
        if joints.is_empty() {
            return Err(Error::Parameter("kinematic chain needs at least one joint".into()));
        }
        Ok(KinematicChain { joints, tool, ready: None })
    }

    /// Attaches a nominal "ready" configuration, used as a default IK seed.
    pub fn with_ready(mut self, ready: DVector<f64>) -> Result<Self> {
        check_dim(self.dof(), ready.len())?;
        self.ready = Some(ready);
        Ok(self)
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn tool(&self) -> &Pose {
        &self.tool
    }

    pub fn ready(&self) -> Option<&DVector<f64>> {
        self.ready.as_ref()
    }

    fn frames(&self, q: &DVector<f64>) -> Result<Frames> {
        check_dim(self.dof(), q.len())?;
        let mut axes = Vec::with_capacity(self.dof());
        let mut origins = Vec::with_capacity(self.dof());
        let mut t = Pose::identity();
        for (joint, &angle) in self.joints.iter().zip(q.iter()) {
            t = t * joint.origin;
            axes.push(t.rotation * joint.axis.into_inner());
            origins.push(t.translation);
            t = t * Pose::from_axis_angle(&joint.axis, angle);
        }
        Ok(Frames { axes, origins, tool: t * self.tool })
    }

    /// Tool pose in the base frame.
    pub fn fk(&self, q: &DVector<f64>) -> Result<Pose> {
        Ok(self.frames(q)?.tool)
    }

    /// 6×n geometric Jacobian, rows ordered (linear, angular), world frame.
    pub fn jacobian(&self, q: &DVector<f64>) -> Result<Matrix6xX<f64>> {
        Ok(self.fk_and_jacobian(q)?.1)
    }

    pub fn fk_and_jacobian(&self, q: &DVector<f64>) -> Result<(Pose, Matrix6xX<f64>)> {
        let frames = self.frames(q)?;
        let p_ee = frames.tool.translation;
        let mut jac = Matrix6xX::zeros(self.dof());
        for (i, (w, p)) in frames.axes.iter().zip(&frames.origins).enumerate() {
            let v = w.cross(&(p_ee - p));
            jac.fixed_view_mut::<3, 1>(0, i).copy_from(&v);
            jac.fixed_view_mut::<3, 1>(3, i).copy_from(w);
        }
        Ok((frames.tool, jac))
    }
}
