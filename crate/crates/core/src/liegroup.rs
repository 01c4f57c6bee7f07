//! Unitary groups U(r), SU(r) and their Lie algebras.
//!
//! The bi-invariant metric is `<X, Y> = -kappa * Re tr(XY)`. With `kappa = 1` the
//! loop energy in [`crate::loopspace`] carries the factor `1 / (4 pi^2)`, which makes
//! the one-parameter subgroup `t -> exp(2 pi i t diag(d))` have energy `sum d_i^2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, op_norm, skew_defect, skew_part, unitary_defect, CMat, I};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_BRANCH_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub rank: usize,
    pub special: bool,
    pub metric_scale: f64,
    /// Operator-norm tolerance for skewness and unitarity checks.
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

impl GroupSpec {
    pub fn new(rank: usize, special: bool, metric_scale: f64) -> Result<Self> {
        let spec = GroupSpec {
            rank,
            special,
            metric_scale,
            tol: DEFAULT_TOL,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn unitary(rank: usize) -> Self {
        GroupSpec {
            rank: rank.max(1),
            special: false,
            metric_scale: 1.0,
            tol: DEFAULT_TOL,
        }
    }

    pub fn special_unitary(rank: usize) -> Self {
        GroupSpec {
            special: true,
            ..GroupSpec::unitary(rank)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::Validation("rank must be at least 1".into()));
        }
        if !(self.metric_scale > 0.0) || !self.metric_scale.is_finite() {
            return Err(Error::Validation(format!(
                "metric scale must be positive, got {}",
                self.metric_scale
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Validation("tolerance must be positive".into()));
        }
        Ok(())
    }

    /// Real dimension of the Lie algebra.
    pub fn algebra_dim(&self) -> usize {
        let r = self.rank;
        if self.special {
            r * r - 1
        } else {
            r * r
        }
    }

    /// Basis of the Lie algebra, orthonormal for `algebra_inner`.
    pub fn algebra_basis(&self) -> Vec<CMat> {
        let r = self.rank;
        let scale = c(1.0 / self.metric_scale.sqrt(), 0.0);
        let mut basis = Vec::with_capacity(self.algebra_dim());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for j in 0..r {
            for k in (j + 1)..r {
                let mut a = CMat::zeros(r, r);
                a[(j, k)] = c(h, 0.0);
                a[(k, j)] = c(-h, 0.0);
                basis.push(a * scale);
                let mut b = CMat::zeros(r, r);
                b[(j, k)] = c(0.0, h);
                b[(k, j)] = c(0.0, h);
                basis.push(b * scale);
            }
        }
        if self.special {
            for m in 1..r {
                let norm = ((m * (m + 1)) as f64).sqrt();
                let mut d = CMat::zeros(r, r);
                for j in 0..m {
                    d[(j, j)] = c(0.0, 1.0 / norm);
                }
                d[(m, m)] = c(0.0, -(m as f64) / norm);
                basis.push(d * scale);
            }
        } else {
            for j in 0..r {
                let mut d = CMat::zeros(r, r);
                d[(j, j)] = I;
                basis.push(d * scale);
            }
        }
        basis
    }

    pub fn check_algebra(&self, x: &CMat) -> Result<()> {
        self.check_shape(x)?;
        let defect = skew_defect(x);
        if defect > self.tol {
            return Err(Error::Validation(format!(
                "matrix is not skew-Hermitian (defect {defect:e})"
            )));
        }
        if self.special && x.trace().norm() > self.tol * (self.rank as f64) {
            return Err(Error::Validation(format!(
                "algebra element is not traceless (trace {})",
                x.trace()
            )));
        }
        Ok(())
    }

    pub fn check_group(&self, g: &CMat) -> Result<()> {
        self.check_shape(g)?;
        let defect = unitary_defect(g);
        if defect > self.tol {
            return Err(Error::Validation(format!(
                "matrix is not unitary (defect {defect:e})"
            )));
        }
        if self.special && (g.determinant() - c(1.0, 0.0)).norm() > self.tol * (self.rank as f64) {
            return Err(Error::Validation("determinant differs from 1".into()));
        }
        Ok(())
    }

    fn check_shape(&self, m: &CMat) -> Result<()> {
        if m.nrows() != self.rank || m.ncols() != self.rank {
            return Err(Error::Validation(format!(
                "expected {r}x{r} matrix, got {}x{}",
                m.nrows(),
                m.ncols(),
                r = self.rank
            )));
        }
        Ok(())
    }
}

/// `-kappa * Re tr(XY)`.
pub fn algebra_inner(x: &CMat, y: &CMat, spec: &GroupSpec) -> Result<f64> {
    spec.check_algebra(x)?;
    spec.check_algebra(y)?;
    Ok(inner_unchecked(x, y, spec.metric_scale))
}

pub(crate) fn inner_unchecked(x: &CMat, y: &CMat, kappa: f64) -> f64 {
    // -Re tr(XY) = Re tr(X^* Y) for skew-Hermitian X
    kappa * crate::linalg::frob_dot(x, y)
}

/// Matrix exponential of a skew-Hermitian matrix.
pub fn group_exp(x: &CMat) -> Result<CMat> {
    let defect = skew_defect(x);
    if defect > DEFAULT_TOL * (1.0 + op_norm(x)) {
        return Err(Error::Validation(format!(
            "exponential input is not skew-Hermitian (defect {defect:e})"
        )));
    }
    Ok(exp_skew(x))
}

/// Exponential without validation; the input is symmetrized to its skew part.
pub fn exp_skew(x: &CMat) -> CMat {
    let n = x.nrows();
    if n == 1 {
        return CMat::from_element(1, 1, (c(0.0, x[(0, 0)].im)).exp());
    }
    // X = iH with H Hermitian
    let h = skew_part(x) * (-I);
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        let phase = c(0.0, *lambda).exp();
        for i in 0..n {
            scaled[(i, j)] *= phase;
        }
    }
    scaled * v.adjoint()
}

/// Principal logarithm of a unitary matrix, with eigenvalue phases in (-pi, pi).
pub fn group_log(g: &CMat) -> Result<CMat> {
    let defect = unitary_defect(g);
    if defect > DEFAULT_TOL {
        return Err(Error::Validation(format!(
            "logarithm input is not unitary (defect {defect:e})"
        )));
    }
    log_unitary(g, DEFAULT_BRANCH_TOL)
}

/// Principal logarithm without the unitarity check.
///
/// Uses the Cayley transform `C = i (I - g)(I + g)^{-1}`, which is Hermitian with
/// eigenvalues `tan(phi/2)`, so that `log g = 2i atan(C)` is a function of a
/// Hermitian matrix. This stays well conditioned for clustered eigenvalues.
pub fn log_unitary(g: &CMat, branch_tol: f64) -> Result<CMat> {
    let n = g.nrows();
    if n == 1 {
        let phase = g[(0, 0)].arg();
        check_branch(phase, branch_tol)?;
        return Ok(CMat::from_element(1, 1, c(0.0, phase)));
    }
    let (v, phases) = unitary_eigen(g, branch_tol)?;
    let mut scaled = v.clone();
    for (j, phase) in phases.iter().enumerate() {
        for i in 0..n {
            scaled[(i, j)] *= c(0.0, *phase);
        }
    }
    Ok(skew_part(&(scaled * v.adjoint())))
}

/// Eigenvectors and principal phases of a unitary matrix.
fn unitary_eigen(g: &CMat, branch_tol: f64) -> Result<(CMat, Vec<f64>)> {
    let n = g.nrows();
    let id = CMat::identity(n, n);
    let plus = &id + g;
    let lu = plus.clone().lu();
    let inv = lu.try_inverse().ok_or(Error::BranchCut { phase: PI })?;
    let cay = (&id - g) * inv * I;
    let cay = (&cay + cay.adjoint()) * c(0.5, 0.0);
    let eig = cay.symmetric_eigen();
    let mut phases = Vec::with_capacity(n);
    for lambda in eig.eigenvalues.iter() {
        let phase = 2.0 * lambda.atan();
        check_branch(phase, branch_tol)?;
        phases.push(phase);
    }
    Ok((eig.eigenvectors, phases))
}

fn check_branch(phase: f64, branch_tol: f64) -> Result<()> {
    if PI - phase.abs() < branch_tol {
        Err(Error::BranchCut { phase })
    } else {
        Ok(())
    }
}

/// Eigenvalue phases of a unitary matrix in `(-pi, pi]`, unsorted.
pub fn unitary_phases(g: &CMat) -> Vec<f64> {
    match unitary_eigen(g, 0.0) {
        Ok((_, p)) => p,
        Err(_) => {
            // eigenvalue at -1: rotate by a generic phase and undo
            let shift = c(0.0, 0.5).exp();
            let (_, p) = unitary_eigen(&(g * shift), 0.0).unwrap_or((CMat::zeros(0, 0), vec![]));
            p.into_iter()
                .map(|x| {
                    let y = x - 0.5;
                    if y <= -PI {
                        y + 2.0 * PI
                    } else {
                        y
                    }
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, frob_norm_sq, identity, random_skew, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_pi_i_diag(d: &[f64]) -> CMat {
        diag(&d.iter().map(|x| c(0.0, 2.0 * PI * x)).collect::<Vec<_>>())
    }

    #[test]
    fn inner_examples() {
        let spec = GroupSpec::special_unitary(2);
        let z = CMat::zeros(2, 2);
        assert_eq!(algebra_inner(&z, &z, &spec).unwrap(), 0.0);
        let x = two_pi_i_diag(&[1.0, -1.0]);
        let v = algebra_inner(&x, &x, &spec).unwrap();
        assert!((v - 8.0 * PI * PI).abs() < 1e-10);
        let u = GroupSpec::unitary(2);
        let a = diag(&[I, c(0.0, 0.0)]);
        let b = diag(&[c(0.0, 0.0), I]);
        assert_eq!(algebra_inner(&a, &b, &u).unwrap(), 0.0);
    }

    #[test]
    fn inner_rejects_non_skew() {
        let spec = GroupSpec::unitary(2);
        let x = identity(2);
        assert!(matches!(
            algebra_inner(&x, &x, &spec),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn exp_examples() {
        assert!((group_exp(&CMat::zeros(2, 2)).unwrap() - identity(2)).norm() < 1e-14);
        let full = group_exp(&two_pi_i_diag(&[1.0, -1.0])).unwrap();
        assert!((full - identity(2)).norm() < 1e-12);
        let half = group_exp(&two_pi_i_diag(&[0.5, -0.5])).unwrap();
        assert!((half + identity(2)).norm() < 1e-12);
    }

    #[test]
    fn log_examples() {
        assert!(group_log(&identity(2)).unwrap().norm() < 1e-14);
        let g = diag(&[I, -I]);
        let x = group_log(&g).unwrap();
        let expected = diag(&[c(0.0, PI / 2.0), c(0.0, -PI / 2.0)]);
        assert!((x - expected).norm() < 1e-12);
        let cut = diag(&[c(-1.0, 0.0), c(-1.0, 0.0)]);
        assert!(matches!(group_log(&cut), Err(Error::BranchCut { .. })));
    }

    #[test]
    fn basis_is_orthonormal() {
        for spec in [
            GroupSpec::unitary(3),
            GroupSpec::special_unitary(3),
            GroupSpec::new(2, true, 2.5).unwrap(),
        ] {
            let basis = spec.algebra_basis();
            assert_eq!(basis.len(), spec.algebra_dim());
            for (a, x) in basis.iter().enumerate() {
                spec.check_algebra(x).unwrap();
                for (b, y) in basis.iter().enumerate() {
                    let v = algebra_inner(x, y, &spec).unwrap();
                    let expected = if a == b { 1.0 } else { 0.0 };
                    assert!((v - expected).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn special_exp_has_unit_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let mut x = random_skew(3, &mut rng) * c(2.0, 0.0);
            let tr = x.trace() / c(3.0, 0.0);
            for j in 0..3 {
                x[(j, j)] -= tr;
            }
            let g = group_exp(&x).unwrap();
            assert!((g.determinant() - c(1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn log_inverts_exp_inside_ball() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..5 {
            for _ in 0..10 {
                let x = random_skew(n, &mut rng) * c(2.5, 0.0);
                if op_norm(&x) > PI - 1e-3 {
                    continue;
                }
                let back = group_log(&group_exp(&x).unwrap()).unwrap();
                assert!((back - &x).norm() < 1e-10, "n = {n}");
            }
        }
    }

    #[test]
    fn inner_is_conjugation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let spec = GroupSpec::unitary(4);
        for _ in 0..20 {
            let x = random_skew(4, &mut rng);
            let y = random_skew(4, &mut rng);
            let q = random_unitary(4, &mut rng);
            let xq = &q * &x * q.adjoint();
            let yq = &q * &y * q.adjoint();
            let a = algebra_inner(&x, &y, &spec).unwrap();
            let b = algebra_inner(&xq, &yq, &spec).unwrap();
            assert!((a - b).abs() < 1e-10);
            assert!(algebra_inner(&x, &x, &spec).unwrap() > 0.0);
            assert!((frob_norm_sq(&x) - algebra_inner(&x, &x, &spec).unwrap()).abs() < 1e-12);
        }
    }
}
