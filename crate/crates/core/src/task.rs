//! Residual maps `r(q) = f(q) − p*` over a robot, and task families that
//! sweep the target along a line or over a rectangle.

use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Rotation3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::kinematics::{se3_error, so3_left_jacobian_inverse, OriginDescription, Pose, Robot};

/// What the task constrains, with its target value.
#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    /// End-effector position of a planar arm (m = 2).
    PlanarPosition(Vector2<f64>),
    /// Tool position of a spatial chain (m = 3).
    Position3(Vector3<f64>),
    /// Full tool pose (m = 6).
    Pose6(Pose),
    /// Tool position with a prescribed orientation (m = 6).
    PositionFixedOrientation(Pose),
}

impl Target {
    pub fn dim(&self) -> usize {
        match self {
            Target::PlanarPosition(_) => 2,
            Target::Position3(_) => 3,
            Target::Pose6(_) | Target::PositionFixedOrientation(_) => 6,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Target::PlanarPosition(_) => "planar_position",
            Target::Position3(_) => "position3",
            Target::Pose6(_) => "pose6",
            Target::PositionFixedOrientation(_) => "position_fixed_orientation",
        }
    }
}

/// A single task: robot plus target, optionally tagged with its position
/// inside a task family.
#[derive(Clone, Debug)]
pub struct TaskInstance {
    robot: Arc<Robot>,
    target: Target,
    family_coordinate: Option<Vec<f64>>,
}

impl TaskInstance {
    pub fn new(robot: Arc<Robot>, target: Target) -> Result<Self> {
        let compatible = matches!(
            (&*robot, &target),
            (Robot::Planar(_), Target::PlanarPosition(_))
                | (Robot::Chain(_), Target::Position3(_) | Target::Pose6(_) | Target::PositionFixedOrientation(_))
        );
        if !compatible {
            return Err(Error::Input(format!(
                "task kind {} does not apply to this robot",
                target.kind_name()
            )));
        }
        Ok(TaskInstance { robot, target, family_coordinate: None })
    }

    pub fn planar(robot: Arc<Robot>, x: f64, y: f64) -> Result<Self> {
        TaskInstance::new(robot, Target::PlanarPosition(Vector2::new(x, y)))
    }

    pub fn with_family_coordinate(mut self, coordinate: Vec<f64>) -> Self {
        self.family_coordinate = Some(coordinate);
        self
    }

    pub fn robot(&self) -> &Arc<Robot> {
        &self.robot
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn family_coordinate(&self) -> Option<&[f64]> {
        self.family_coordinate.as_deref()
    }

    /// Configuration-space dimension n.
    pub fn dof(&self) -> usize {
        self.robot.dof()
    }

    /// Residual dimension m.
    pub fn residual_dim(&self) -> usize {
        self.target.dim()
    }

    pub fn residual(&self, q: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dof(), q.len())?;
        match (&*self.robot, &self.target) {
            (Robot::Planar(arm), Target::PlanarPosition(t)) => {
                let p = arm.fk(q)? - t;
                Ok(DVector::from_column_slice(p.as_slice()))
            }
            (Robot::Chain(chain), Target::Position3(t)) => {
                let p = chain.fk(q)?.translation - t;
                Ok(DVector::from_column_slice(p.as_slice()))
            }
            (Robot::Chain(chain), Target::Pose6(t) | Target::PositionFixedOrientation(t)) => {
                let e = se3_error(t, &chain.fk(q)?);
                Ok(DVector::from_column_slice(e.as_slice()))
            }
            _ => unreachable!("checked in TaskInstance::new"),
        }
    }

    pub fn residual_norm(&self, q: &DVector<f64>) -> Result<f64> {
        Ok(self.residual(q)?.norm())
    }

    pub fn residual_jacobian(&self, q: &DVector<f64>) -> Result<DMatrix<f64>> {
        Ok(self.residual_and_jacobian(q)?.1)
    }

    /// Residual and its exact derivative with respect to `q`.
    ///
    /// For pose targets the rotational residual is `log(R_targetᵀ R(q))`, so the
    /// angular rows are the geometric Jacobian's angular rows mapped through
    /// `J_l⁻¹(e)·R_targetᵀ`. They coincide with the geometric rows on the manifold.
    pub fn residual_and_jacobian(&self, q: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
        check_dim(self.dof(), q.len())?;
        let n = self.dof();
        match (&*self.robot, &self.target) {
            (Robot::Planar(arm), Target::PlanarPosition(t)) => {
                let p = arm.fk(q)? - t;
                let j = arm.jacobian(q)?;
                Ok((DVector::from_column_slice(p.as_slice()), DMatrix::from_column_slice(2, n, j.as_slice())))
            }
            (Robot::Chain(chain), Target::Position3(t)) => {
                let (pose, j) = chain.fk_and_jacobian(q)?;
                let p = pose.translation - t;
                Ok((DVector::from_column_slice(p.as_slice()), j.rows(0, 3).into_owned()))
            }
            (Robot::Chain(chain), Target::Pose6(t) | Target::PositionFixedOrientation(t)) => {
                let (pose, j) = chain.fk_and_jacobian(q)?;
                let e = se3_error(t, &pose);
                let map = so3_left_jacobian_inverse(&e.fixed_rows::<3>(3).into_owned())
                    * t.rotation.inverse().matrix();
                let mut out = DMatrix::zeros(6, n);
                out.rows_mut(0, 3).copy_from(&j.rows(0, 3));
                out.rows_mut(3, 3).copy_from(&(map * j.rows(3, 3)));
                Ok((DVector::from_column_slice(e.as_slice()), out))
            }
            _ => unreachable!("checked in TaskInstance::new"),
        }
    }
}

/// Orientation held fixed across a family, or by a position-with-orientation task.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrientationSpec {
    /// Tool z-axis pointing along −z of the base, tool x-axis along +x.
    #[default]
    Down,
    Rpy([f64; 3]),
}

impl OrientationSpec {
    pub fn rotation(&self) -> Rotation3<f64> {
        match self {
            OrientationSpec::Down => Rotation3::from_euler_angles(std::f64::consts::PI, 0.0, 0.0),
            OrientationSpec::Rpy(rpy) => Rotation3::from_euler_angles(rpy[0], rpy[1], rpy[2]),
        }
    }
}

/// Geometric locus swept by a task family.
#[derive(Clone, Debug, PartialEq)]
pub enum FamilyShape {
    /// Segment between two points, `count` equally spaced targets (endpoints included).
    Line { from: Vector3<f64>, to: Vector3<f64>, count: usize },
    /// Axis-aligned rectangle at height `z`, `counts = [nx, ny]` grid.
    Rectangle { min: Vector2<f64>, max: Vector2<f64>, z: f64, counts: [usize; 2] },
}

/// A continuum of position-with-fixed-orientation tasks.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskFamily {
    pub shape: FamilyShape,
    pub orientation: Rotation3<f64>,
}

pub const DEFAULT_LINE_COUNT: usize = 30;
pub const DEFAULT_RECTANGLE_COUNTS: [usize; 2] = [10, 20];

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if a == b {
        return a;
    }
    a * (1.0 - t) + b * t
}

impl TaskFamily {
    pub fn line(from: Vector3<f64>, to: Vector3<f64>, count: usize) -> Self {
        TaskFamily { shape: FamilyShape::Line { from, to, count }, orientation: OrientationSpec::Down.rotation() }
    }

    pub fn rectangle(min: Vector2<f64>, max: Vector2<f64>, z: f64, counts: [usize; 2]) -> Self {
        TaskFamily {
            shape: FamilyShape::Rectangle { min, max, z, counts },
            orientation: OrientationSpec::Down.rotation(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.shape {
            FamilyShape::Line { from, to, count } => {
                if *count < 2 {
                    return Err(Error::Input(format!("line family needs at least 2 points, got {count}")));
                }
                if from == to {
                    return Err(Error::Input("line family endpoints coincide".into()));
                }
            }
            FamilyShape::Rectangle { min, max, counts, .. } => {
                if counts.iter().any(|&c| c < 2) {
                    return Err(Error::Input(format!("rectangle counts must be >= 2, got {counts:?}")));
                }
                if !(min.x < max.x && min.y < max.y) {
                    return Err(Error::Input(format!("rectangle bounds not ordered: {min:?} .. {max:?}")));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        match &self.shape {
            FamilyShape::Line { count, .. } => *count,
            FamilyShape::Rectangle { counts, .. } => counts[0] * counts[1],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Target positions in order: along the line, or row-major with x outer and y inner.
    pub fn positions(&self) -> Result<Vec<Vector3<f64>>> {
        self.validate()?;
        Ok(match &self.shape {
            FamilyShape::Line { from, to, count } => (0..*count)
                .map(|i| {
                    let t = i as f64 / (*count - 1) as f64;
                    Vector3::new(lerp(from.x, to.x, t), lerp(from.y, to.y, t), lerp(from.z, to.z, t))
                })
                .collect(),
            FamilyShape::Rectangle { min, max, z, counts } => {
                let mut out = Vec::with_capacity(counts[0] * counts[1]);
                for i in 0..counts[0] {
                    let x = lerp(min.x, max.x, i as f64 / (counts[0] - 1) as f64);
                    for j in 0..counts[1] {
                        let y = lerp(min.y, max.y, j as f64 / (counts[1] - 1) as f64);
                        out.push(Vector3::new(x, y, *z));
                    }
                }
                out
            }
        })
    }

    /// One fixed-orientation task per target, each labeled with its position.
    pub fn discretize(&self, robot: Arc<Robot>) -> Result<Vec<TaskInstance>> {
        self.positions()?
            .into_iter()
            .map(|p| {
                let target = Target::PositionFixedOrientation(Pose::new(self.orientation, p));
                Ok(TaskInstance::new(robot.clone(), target)?.with_family_coordinate(p.iter().copied().collect()))
            })
            .collect()
    }
}

/// Task file contents: a single task or a family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TaskSpec {
    Single(SingleTaskSpec),
    Family(FamilySpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SingleTaskSpec {
    PlanarPosition {
        target: [f64; 2],
    },
    Position3 {
        target: [f64; 3],
    },
    Pose6 {
        target: OriginDescription,
    },
    PositionFixedOrientation {
        target: [f64; 3],
        #[serde(default)]
        orientation: OrientationSpec,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// `from`/`to` are (x, y) at height `z`.
    Line {
        from: [f64; 2],
        to: [f64; 2],
        z: f64,
        #[serde(default = "default_line_count")]
        count: usize,
        #[serde(default)]
        orientation: OrientationSpec,
    },
    Rectangle {
        min: [f64; 2],
        max: [f64; 2],
        z: f64,
        #[serde(default = "default_rectangle_counts")]
        counts: [usize; 2],
        #[serde(default)]
        orientation: OrientationSpec,
    },
}

fn default_line_count() -> usize {
    DEFAULT_LINE_COUNT
}

fn default_rectangle_counts() -> [usize; 2] {
    DEFAULT_RECTANGLE_COUNTS
}

impl SingleTaskSpec {
    pub fn instantiate(&self, robot: Arc<Robot>) -> Result<TaskInstance> {
        let target = match self {
            SingleTaskSpec::PlanarPosition { target } => Target::PlanarPosition(Vector2::from(*target)),
            SingleTaskSpec::Position3 { target } => Target::Position3(Vector3::from(*target)),
            SingleTaskSpec::Pose6 { target } => Target::Pose6(target.to_pose()),
            SingleTaskSpec::PositionFixedOrientation { target, orientation } => {
                Target::PositionFixedOrientation(Pose::new(orientation.rotation(), Vector3::from(*target)))
            }
        };
        TaskInstance::new(robot, target)
    }
}

impl FamilySpec {
    pub fn to_family(&self) -> TaskFamily {
        match self {
            FamilySpec::Line { from, to, z, count, orientation } => TaskFamily {
                shape: FamilyShape::Line {
                    from: Vector3::new(from[0], from[1], *z),
                    to: Vector3::new(to[0], to[1], *z),
                    count: *count,
                },
                orientation: orientation.rotation(),
            },
            FamilySpec::Rectangle { min, max, z, counts, orientation } => TaskFamily {
                shape: FamilyShape::Rectangle {
                    min: Vector2::from(*min),
                    max: Vector2::from(*max),
                    z: *z,
                    counts: *counts,
                },
                orientation: orientation.rotation(),
            },
        }
    }
}

impl TaskSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("task file: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e))
    }

    /// Task instances in family order; a single task yields one instance.
    pub fn instances(&self, robot: Arc<Robot>) -> Result<Vec<TaskInstance>> {
        match self {
            TaskSpec::Single(s) => Ok(vec![s.instantiate(robot)?]),
            TaskSpec::Family(f) => f.to_family().discretize(robot),
        }
    }
}
