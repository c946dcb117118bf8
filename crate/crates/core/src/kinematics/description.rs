use std::path::Path;

use nalgebra::{DVector, Vector3};
use serde::{Deserialize, Serialize};

use super::{Joint, KinematicChain, PlanarChain, Pose};
use crate::error::{Error, Result};

/// On-disk robot description (JSON).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RobotDescription {
    Planar {
        link_lengths: Vec<f64>,
    },
    Chain {
        joints: Vec<JointDescription>,
        #[serde(default)]
        tool: OriginDescription,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ready: Option<Vec<f64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointDescription {
    pub axis: [f64; 3],
    #[serde(default)]
    pub origin: OriginDescription,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OriginDescription {
    #[serde(default)]
    pub translation: [f64; 3],
    #[serde(default)]
    pub rotation_rpy: [f64; 3],
}

impl OriginDescription {
    pub fn to_pose(&self) -> Pose {
        Pose::from_rpy(Vector3::from(self.translation), self.rotation_rpy)
    }
}

/// A robot whose kinematics the task layer can evaluate.
#[derive(Clone, Debug, PartialEq)]
pub enum Robot {
    Planar(PlanarChain),
    Chain(KinematicChain),
}

impl Robot {
    pub fn dof(&self) -> usize {
        match self {
            Robot::Planar(p) => p.dof(),
            Robot::Chain(c) => c.dof(),
        }
    }

    /// Nominal seed configuration: the description's ready pose, or zeros.
    pub fn ready(&self) -> DVector<f64> {
        match self {
            Robot::Chain(c) => c.ready().cloned().unwrap_or_else(|| DVector::zeros(c.dof())),
            Robot::Planar(p) => DVector::zeros(p.dof()),
        }
    }

    pub fn from_description(desc: &RobotDescription) -> Result<Self> {
        match desc {
            RobotDescription::Planar { link_lengths } => Ok(Robot::Planar(PlanarChain::new(link_lengths.clone())?)),
            RobotDescription::Chain { joints, tool, ready } => {
                let joints = joints
                    .iter()
                    .map(|j| Joint::new(Vector3::from(j.axis), j.origin.to_pose()))
                    .collect::<Result<Vec<_>>>()?;
                let mut chain = KinematicChain::new(joints, tool.to_pose())?;
                if let Some(r) = ready {
                    chain = chain.with_ready(DVector::from_column_slice(r))?;
                }
                Ok(Robot::Chain(chain))
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let desc: RobotDescription =
            serde_json::from_str(text).map_err(|e| Error::Input(format!("robot description: {e}")))?;
        Robot::from_description(&desc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let desc: RobotDescription = serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?;
        Robot::from_description(&desc)
    }

    /// The 7-joint Panda-like arm shipped in `data/panda.json`.
    pub fn panda() -> Self {
        Robot::from_json(PANDA_JSON).expect("bundled panda description is valid")
    }

    pub fn planar_unit3() -> Self {
        Robot::Planar(PlanarChain::unit_three_link())
    }
}

pub(crate) const PANDA_JSON: &str = include_str!("../../data/panda.json");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_planar_and_chain() {
        let r = Robot::from_json(r#"{"type":"planar","link_lengths":[1,1,1]}"#).unwrap();
        assert_eq!(r.dof(), 3);
        let r = Robot::from_json(
            r#"{"type":"chain","joints":[{"axis":[0,0,2],"origin":{"translation":[0,0,0.1],"rotation_rpy":[0,0,0]}}],
                "tool":{"translation":[1,0,0]}}"#,
        )
        .unwrap();
        match r {
            Robot::Chain(c) => {
                assert_eq!(c.dof(), 1);
                assert!((c.joints()[0].axis.norm() - 1.0).abs() < 1e-12);
            }
            _ => panic!("expected chain"),
        }
    }

    #[test]
    fn rejects_malformed() {
        assert!(Robot::from_json(r#"{"type":"planar","link_lengths":[]}"#).is_err());
        assert!(Robot::from_json(r#"{"type":"planar","link_lengths":[1,-1]}"#).is_err());
        assert!(Robot::from_json(r#"{"type":"chain","joints":[]}"#).is_err());
        assert!(Robot::from_json(r#"{"type":"wheel"}"#).is_err());
        assert!(Robot::from_json(r#"{"type":"chain","joints":[{"axis":[1,0,0]}],"ready":[0,0]}"#).is_err());
    }

    #[test]
    fn bundled_panda_loads() {
        let panda = Robot::panda();
        assert_eq!(panda.dof(), 7);
        assert_eq!(panda.ready().len(), 7);
    }
}
