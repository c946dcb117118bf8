use std::time::Instant;

use log::warn;
use nalgebra::DVector;
use rand_chacha::ChaCha8Rng;

use super::random_ik::{attempt_rng, random_configuration, RANDOM_IK_MAX_ITER};
use super::solve::{correction_direction, gauss_newton_solve, null_space_basis, SINGULAR_TOL};
use super::{Method, SampleSet, Termination, TraversalParams};
use crate::error::{check_dim, Error, Result};
use crate::kinematics::{wrap_angles, wrap_angles_mut, wrapped_distance};
use crate::task::TaskInstance;

/// Newton-based traversal: tangent step, then Gauss-Newton projection.
pub fn newton_traverse(task: &TaskInstance, q_start: &DVector<f64>, params: &TraversalParams) -> Result<SampleSet> {
    traverse(task, q_start, params, Method::Newton)
}

/// Zigzag traversal: tangent step, then overshooting corrections until the
/// correction direction flips.
pub fn zigzag_traverse(task: &TaskInstance, q_start: &DVector<f64>, params: &TraversalParams) -> Result<SampleSet> {
    traverse(task, q_start, params, Method::Zigzag)
}

enum Tangent {
    Unit(DVector<f64>),
    Singular(usize),
}

fn tangent_at(task: &TaskInstance, q: &DVector<f64>) -> Result<Tangent> {
    let j = task.residual_jacobian(q)?;
    let basis = match null_space_basis(&j, SINGULAR_TOL) {
        Ok(b) => b,
        Err(Error::DegenerateTask) => return Ok(Tangent::Singular(0)),
        Err(e) => return Err(e),
    };
    if basis.ncols() != 1 {
        return Ok(Tangent::Singular(basis.ncols()));
    }
    Ok(Tangent::Unit(basis.column(0).into_owned()))
}

/// Fixes the SVD sign ambiguity of the first tangent: largest component positive.
fn canonical_sign(mut v: DVector<f64>) -> DVector<f64> {
    let imax = v.iamax();
    if v[imax] < 0.0 {
        v.neg_mut();
    }
    v
}

fn project_zigzag(task: &TaskInstance, predicted: DVector<f64>, params: &TraversalParams) -> Result<(DVector<f64>, f64)> {
    let mut q = predicted;
    let (mut d, initial) = correction_direction(task, &q)?;
    let mut residual = initial;
    if residual <= params.eps_proj {
        return Ok((q, residual));
    }
    let mut crossed = false;
    for _ in 0..params.max_proj_iters {
        q.axpy(params.gamma, &d, 1.0);
        let (d_next, r) = correction_direction(task, &q)?;
        residual = r;
        crossed = d.dot(&d_next) < 0.0;
        if residual <= params.eps_proj || crossed {
            break;
        }
        d = d_next;
    }
    // A crossing is accepted as is; without one the corrections must at least not diverge.
    if !residual.is_finite() || (!crossed && residual > initial) {
        return Err(Error::Convergence { iterations: params.max_proj_iters, residual });
    }
    Ok((q, residual))
}

fn closes_loop(branch: &[DVector<f64>], beta: f64, skip: usize) -> bool {
    let Some((current, earlier)) = branch.split_last() else { return false };
    if earlier.len() <= skip {
        return false;
    }
    earlier[..earlier.len() - skip]
        .iter()
        .any(|q| wrapped_distance(q, current) < beta)
}

/// Walks the one-dimensional manifold through `q_start` with the given corrector.
///
/// Stops on loop closure (an earlier sample, excluding the last
/// `termination_skip`, within β of the newest one) or after `max_steps`
/// tangent steps. With a joint box, a branch that leaves the box restarts
/// once from `q_start` in the opposite direction. Projection failures and
/// singular tangents end the walk early and return what was collected,
/// with a warning.
pub fn traverse(task: &TaskInstance, q_start: &DVector<f64>, params: &TraversalParams, method: Method) -> Result<SampleSet> {
    params.validate()?;
    if method == Method::RandomIk {
        return Err(Error::Parameter("random_ik is not a traversal method".into()));
    }
    check_dim(task.dof(), q_start.len())?;
    let clock = Instant::now();
    let q0 = wrap_angles(q_start);
    let r0 = task.residual_norm(&q0)?;
    if r0 > params.eps_proj {
        return Err(Error::Input(format!("start configuration is off the manifold (residual {r0:e})")));
    }
    if let Some(b) = &params.joint_box {
        check_dim(task.dof(), b.lower.len())?;
        if !b.contains(&q0) {
            return Err(Error::Input("start configuration lies outside the joint box".into()));
        }
    }
    let v0 = match tangent_at(task, &q0)? {
        Tangent::Unit(v) => canonical_sign(v),
        Tangent::Singular(k) => return Err(Error::NullSpaceDimension(k)),
    };

    let mut out = SampleSet::empty(method, Some(params.beta));
    out.push(q0.clone(), r0);
    let mut branch_start = 0;
    let mut reversed = false;
    let mut v_prev = v0.clone();
    let mut current = q0.clone();
    let mut termination = Termination::MaxSteps;

    for _ in 0..params.max_steps {
        let mut v = match tangent_at(task, &current)? {
            Tangent::Unit(v) => v,
            Tangent::Singular(k) => {
                out.warnings.push(format!("null space dimension {k} after {} samples", out.len()));
                termination = Termination::SingularTangent;
                break;
            }
        };
        if v.dot(&v_prev) < 0.0 {
            v.neg_mut();
        }
        let predicted = &current + &v * params.beta;
        let projected = match method {
            Method::Newton => gauss_newton_solve(task, &predicted, params.eps_proj, params.max_proj_iters)
                .map(|s| (s.q, s.residual_norm)),
            _ => project_zigzag(task, predicted, params),
        };
        let (mut next, residual) = match projected {
            Ok(p) => p,
            Err(e) => {
                out.warnings.push(format!("projection failed after {} samples: {e}", out.len()));
                termination = Termination::ProjectionFailure;
                break;
            }
        };
        wrap_angles_mut(&mut next);
        if let Some(b) = &params.joint_box {
            if !b.contains(&next) {
                if reversed {
                    termination = Termination::JointLimit;
                    break;
                }
                reversed = true;
                branch_start = out.len();
                current = q0.clone();
                v_prev = -&v0;
                continue;
            }
        }
        out.tangents.push(v.clone());
        out.push(next.clone(), residual);
        v_prev = v;
        current = next;
        if closes_loop(&out.samples[branch_start..], params.beta, params.termination_skip) {
            termination = Termination::LoopClosure;
            break;
        }
    }
    for w in &out.warnings {
        warn!("{method} traversal: {w}");
    }
    out.termination = Some(termination);
    out.sampling_time = clock.elapsed();
    Ok(out)
}

/// Traverses from `q_start`, then from up to `restarts` random IK solutions
/// lying farther than 2β from every existing sample (other components).
pub fn explore(
    task: &TaskInstance,
    q_start: &DVector<f64>,
    params: &TraversalParams,
    method: Method,
    restarts: usize,
) -> Result<SampleSet> {
    let mut out = traverse(task, q_start, params, method)?;
    for i in 0..restarts {
        let mut rng: ChaCha8Rng = attempt_rng(params.seed ^ 0x5eed_0fc0_ffee, i as u64);
        let guess = random_configuration(&mut rng, task.dof());
        let Ok(sol) = gauss_newton_solve(task, &guess, params.eps_proj, RANDOM_IK_MAX_ITER) else { continue };
        let isolated = out.samples.iter().all(|q| wrapped_distance(q, &sol.q) > 2.0 * params.beta);
        if !isolated {
            continue;
        }
        match traverse(task, &sol.q, params, method) {
            Ok(more) => out.extend(more),
            Err(e) => out.warnings.push(format!("restart {i}: {e}")),
        }
    }
    Ok(out)
}
