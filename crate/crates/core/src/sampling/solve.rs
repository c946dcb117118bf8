use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{Error, Result};
use crate::kinematics::wrap_angles_mut;
use crate::task::TaskInstance;

/// Relative singular-value cutoff for pseudo-inverses and null spaces.
pub const SINGULAR_TOL: f64 = 1e-8;

/// Result of a Gauss-Newton projection onto the manifold.
#[derive(Clone, Debug)]
pub struct Solution {
    pub q: DVector<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Minimum-norm least-squares solution of `J·x = b`, truncating singular
/// values below `SINGULAR_TOL·σ_max`.
pub fn pinv_solve(j: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let svd = SVD::new(j.clone(), true, true);
    let smax = svd.singular_values.max();
    if smax <= 0.0 {
        return DVector::zeros(j.ncols());
    }
    svd.solve(b, SINGULAR_TOL * smax)
        .expect("U and Vᵀ were requested")
}

/// Newton step toward the manifold: `d(q) = −J⁺ r`.
pub fn correction_direction(task: &TaskInstance, q: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let (r, j) = task.residual_and_jacobian(q)?;
    Ok((-pinv_solve(&j, &r), r.norm()))
}

/// Iterates `q ← wrap(q − J⁺ r)` until `‖r(q)‖ ≤ eps`.
pub fn gauss_newton_solve(task: &TaskInstance, q0: &DVector<f64>, eps: f64, max_iter: usize) -> Result<Solution> {
    if !(eps > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {eps}")));
    }
    let mut q = q0.clone();
    let mut residual = f64::INFINITY;
    for it in 0..=max_iter {
        let (r, j) = task.residual_and_jacobian(&q)?;
        residual = r.norm();
        if residual <= eps {
            return Ok(Solution { q, residual_norm: residual, iterations: it });
        }
        if it == max_iter || !residual.is_finite() {
            break;
        }
        q -= pinv_solve(&j, &r);
        wrap_angles_mut(&mut q);
    }
    Err(Error::Convergence { iterations: max_iter, residual })
}

/// Orthonormal basis (n×k) of the numerical null space of `j`: right
/// singular vectors whose singular value is below `tol·σ_max`.
pub fn null_space_basis(j: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    let (m, n) = j.shape();
    // A wide SVD only returns min(m, n) right singular vectors; pad to square.
    let padded = if m < n {
        let mut p = DMatrix::zeros(n, n);
        p.rows_mut(0, m).copy_from(j);
        p
    } else {
        j.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("Vᵀ was requested");
    let smax = svd.singular_values.max();
    let cutoff = tol * smax;
    let null: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| smax == 0.0 || svd.singular_values[i] < cutoff)
        .collect();
    if null.is_empty() {
        return Err(Error::DegenerateTask);
    }
    let mut basis = DMatrix::zeros(n, null.len());
    for (c, &i) in null.iter().enumerate() {
        basis.set_column(c, &v_t.row(i).transpose());
    }
    Ok(basis)
}
