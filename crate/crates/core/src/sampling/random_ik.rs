use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::solve::{gauss_newton_solve, Solution};
use super::{Method, SampleSet};
use crate::error::{Error, Result};
use crate::task::TaskInstance;

/// Gauss-Newton iteration cap for a single random-start solve.
pub const RANDOM_IK_MAX_ITER: usize = 100;

/// Independent stream per attempt, so results do not depend on scheduling.
pub(crate) fn attempt_rng(seed: u64, attempt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(attempt);
    rng
}

/// Uniform draw from `[-π, π)ⁿ`.
pub fn random_configuration<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-PI..PI))
}

/// Solves IK `n` times from uniformly random starts. Failed starts are
/// retried with fresh draws, up to `10·n` attempts in total.
pub fn random_ik_sample(task: &TaskInstance, n: usize, eps: f64, seed: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::Parameter("random IK needs n >= 1".into()));
    }
    let clock = Instant::now();
    let budget = 10 * n;
    let dof = task.dof();
    let mut out = SampleSet::empty(Method::RandomIk, None);
    let mut attempted = 0;
    while out.len() < n && attempted < budget {
        let batch = (n - out.len()).min(budget - attempted);
        let solved: Vec<Option<Solution>> = (attempted..attempted + batch)
            .into_par_iter()
            .map(|a| {
                let q = random_configuration(&mut attempt_rng(seed, a as u64), dof);
                gauss_newton_solve(task, &q, eps, RANDOM_IK_MAX_ITER).ok()
            })
            .collect();
        attempted += batch;
        for s in solved.into_iter().flatten() {
            out.push(s.q, s.residual_norm);
        }
    }
    if out.len() < n {
        return Err(Error::Sampling(format!(
            "random IK found {} of {n} solutions in {budget} attempts",
            out.len()
        )));
    }
    out.sampling_time = clock.elapsed();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::Robot;
    use std::sync::Arc;

    #[test]
    fn fifteen_planar_solutions() {
        let task = TaskInstance::planar(Arc::new(Robot::planar_unit3()), 1.5, 0.5).unwrap();
        let s = random_ik_sample(&task, 15, 1e-6, 1).unwrap();
        assert_eq!(s.len(), 15);
        for q in &s.samples {
            assert!(task.residual_norm(q).unwrap() <= 1e-6);
            assert!(q.iter().all(|x| (-PI..PI).contains(x)));
        }
        assert!(s.residual_consistency(&task).unwrap() <= 1e-12);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let task = TaskInstance::planar(Arc::new(Robot::planar_unit3()), 1.5, 0.5).unwrap();
        let a = random_ik_sample(&task, 20, 1e-6, 99).unwrap();
        let b = random_ik_sample(&task, 20, 1e-6, 99).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.residual_norms, b.residual_norms);
    }

    #[test]
    fn unreachable_target_exhausts_budget() {
        let task = TaskInstance::planar(Arc::new(Robot::planar_unit3()), 4.0, 0.0).unwrap();
        assert!(matches!(random_ik_sample(&task, 2, 1e-6, 0), Err(Error::Sampling(_))));
        assert!(random_ik_sample(&task, 0, 1e-6, 0).is_err());
    }
}
