use std::time::Instant;

use log::{info, warn};
use nalgebra::DVector;
use serde::Serialize;

use super::random_ik::{attempt_rng, random_configuration, RANDOM_IK_MAX_ITER};
use super::solve::gauss_newton_solve;
use super::traverse::newton_traverse;
use super::{Method, SampleSet, Termination, TraversalParams};
use crate::error::{Error, Result};
use crate::task::TaskInstance;

/// Random restarts tried when the warm-started seed solve fails.
const SEED_RESTARTS: u64 = 20;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceOutcome {
    pub index: usize,
    pub coordinate: Vec<f64>,
    pub samples: usize,
    pub termination: Option<Termination>,
    pub error: Option<String>,
}

impl InstanceOutcome {
    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct FamilyOutcome {
    pub samples: SampleSet,
    pub instances: Vec<InstanceOutcome>,
}

fn seed_solution(task: &TaskInstance, warm: &DVector<f64>, params: &TraversalParams, index: usize) -> Result<DVector<f64>> {
    match gauss_newton_solve(task, warm, params.eps_proj, RANDOM_IK_MAX_ITER) {
        Ok(s) => Ok(s.q),
        Err(first) => {
            for k in 0..SEED_RESTARTS {
                let mut rng = attempt_rng(params.seed.wrapping_add(index as u64), k);
                let guess = random_configuration(&mut rng, task.dof());
                if let Ok(s) = gauss_newton_solve(task, &guess, params.eps_proj, RANDOM_IK_MAX_ITER) {
                    return Ok(s.q);
                }
            }
            Err(first)
        }
    }
}

/// Newton traversal for each task of a family, in order.
///
/// Each instance is seeded by Gauss-Newton from the previous instance's first
/// sample (the first from `initial`), so neighboring instances land on the
/// same manifold branch. Samples are labeled with the instance's family
/// coordinate, or its index when it has none. Failed instances are
/// recorded and skipped.
pub fn sample_family(tasks: &[TaskInstance], params: &TraversalParams, initial: &DVector<f64>) -> Result<FamilyOutcome> {
    params.validate()?;
    let clock = Instant::now();
    let mut all = SampleSet::empty(Method::Newton, Some(params.beta));
    let mut instances = Vec::with_capacity(tasks.len());
    let mut warm = initial.clone();
    for (index, task) in tasks.iter().enumerate() {
        let coordinate = task
            .family_coordinate()
            .map(<[f64]>::to_vec)
            .unwrap_or_else(|| vec![index as f64]);
        let result = seed_solution(task, &warm, params, index).and_then(|q| newton_traverse(task, &q, params));
        match result {
            Ok(mut set) => {
                set.label_all(&coordinate);
                warm = set.samples[0].clone();
                info!("instance {index}: {} samples ({:?})", set.len(), set.termination);
                instances.push(InstanceOutcome {
                    index,
                    coordinate,
                    samples: set.len(),
                    termination: set.termination,
                    error: None,
                });
                all.extend(set);
            }
            Err(e) => {
                warn!("instance {index} failed: {e}");
                instances.push(InstanceOutcome { index, coordinate, samples: 0, termination: None, error: Some(e.to_string()) });
            }
        }
    }
    if all.is_empty() {
        return Err(Error::Sampling(format!("all {} family instances failed", tasks.len())));
    }
    all.sampling_time = clock.elapsed();
    Ok(FamilyOutcome { samples: all, instances })
}
