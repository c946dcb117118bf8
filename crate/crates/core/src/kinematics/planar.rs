use nalgebra::{DVector, Matrix2xX, Vector2};

use crate::error::{check_dim, Error, Result};

/// Planar serial arm with revolute joints; joint angles are relative.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarChain {
    link_lengths: Vec<f64>,
}

impl PlanarChain {
    pub fn new(link_lengths: Vec<f64>) -> Result<Self> {
        if link_lengths.is_empty() {
            return Err(Error::Parameter("planar chain needs at least one link".into()));
        }
        if let Some(l) = link_lengths.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(Error::Parameter(format!("link length must be positive, got {l}")));
        }
        Ok(PlanarChain { link_lengths })
    }

    /// Three unit links, the default benchmark arm.
    pub fn unit_three_link() -> Self {
        PlanarChain { link_lengths: vec![1.0; 3] }
    }

    pub fn link_lengths(&self) -> &[f64] {
        &self.link_lengths
    }

    pub fn dof(&self) -> usize {
        self.link_lengths.len()
    }

    /// Sum of link lengths.
    pub fn reach(&self) -> f64 {
        self.link_lengths.iter().sum()
    }

    fn cumulative_angles<'a>(&self, q: &'a DVector<f64>) -> impl Iterator<Item = f64> + 'a {
        q.iter().scan(0.0, |acc, &qi| {
            *acc += qi;
            Some(*acc)
        })
    }

    /// End-effector position.
    pub fn fk(&self, q: &DVector<f64>) -> Result<Vector2<f64>> {
        check_dim(self.dof(), q.len())?;
        Ok(self
            .cumulative_angles(q)
            .zip(&self.link_lengths)
            .fold(Vector2::zeros(), |p, (theta, l)| p + Vector2::new(theta.cos(), theta.sin()) * *l))
    }

    /// 2×n position Jacobian.
    pub fn jacobian(&self, q: &DVector<f64>) -> Result<Matrix2xX<f64>> {
        check_dim(self.dof(), q.len())?;
        let n = self.dof();
        let links: Vec<Vector2<f64>> = self
            .cumulative_angles(q)
            .zip(&self.link_lengths)
            .map(|(theta, l)| Vector2::new(theta.cos(), theta.sin()) * *l)
            .collect();
        let mut jac = Matrix2xX::zeros(n);
        // column j collects every link at or beyond joint j, rotated by 90°
        let mut tail = Vector2::zeros();
        for j in (0..n).rev() {
            tail += links[j];
            jac[(0, j)] = -tail.y;
            jac[(1, j)] = tail.x;
        }
        Ok(jac)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::wrap_angles;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn q(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    #[test]
    fn fk_examples() {
        let arm = PlanarChain::unit_three_link();
        assert!((arm.fk(&q(&[0.0, 0.0, 0.0])).unwrap() - Vector2::new(3.0, 0.0)).norm() < 1e-15);
        assert!((arm.fk(&q(&[FRAC_PI_2, 0.0, 0.0])).unwrap() - Vector2::new(0.0, 3.0)).norm() < 1e-15);
        assert!((arm.fk(&q(&[FRAC_PI_2, -FRAC_PI_2, 0.0])).unwrap() - Vector2::new(2.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn jacobian_examples() {
        let arm = PlanarChain::unit_three_link();
        let j = arm.jacobian(&q(&[0.0, 0.0, 0.0])).unwrap();
        assert_eq!(j.row(0).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0, 0.0]);
        assert_eq!(j.row(1).iter().copied().collect::<Vec<_>>(), vec![3.0, 2.0, 1.0]);

        let one = PlanarChain::new(vec![1.0]).unwrap();
        let j = one.jacobian(&q(&[FRAC_PI_2])).unwrap();
        assert!((j[(0, 0)] + 1.0).abs() < 1e-15 && j[(1, 0)].abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        let arm = PlanarChain::unit_three_link();
        assert!(matches!(arm.fk(&q(&[0.0, 0.0])), Err(Error::Dimension { expected: 3, got: 2 })));
        assert!(arm.jacobian(&q(&[0.0; 4])).is_err());
        assert!(PlanarChain::new(vec![]).is_err());
        assert!(PlanarChain::new(vec![1.0, 0.0]).is_err());
        assert!(PlanarChain::new(vec![1.0, -2.0]).is_err());
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let arm = PlanarChain::new(vec![0.7, 1.3, 0.4, 1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = 1e-6;
        for _ in 0..100 {
            let x = DVector::from_fn(4, |_, _| rng.random_range(-PI..PI));
            let jac = arm.jacobian(&x).unwrap();
            for j in 0..4 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let fd = (arm.fk(&xp).unwrap() - arm.fk(&xm).unwrap()) / (2.0 * h);
                assert!((fd - jac.column(j)).abs().max() < 1e-7);
            }
        }
    }

    #[test]
    fn fk_invariant_under_wrapping() {
        let arm = PlanarChain::unit_three_link();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let x = DVector::from_fn(3, |_, _| rng.random_range(-20.0..20.0));
            let a = arm.fk(&x).unwrap();
            let b = arm.fk(&wrap_angles(&x)).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
    }
}
