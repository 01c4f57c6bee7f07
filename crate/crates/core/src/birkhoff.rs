//! Splitting types of matrix loops from block-Toeplitz kernel ranks.
//!
//! Convention: a loop `gamma = gamma_minus * diag(z^{d_1}, ..., z^{d_r}) * gamma_plus`,
//! with `gamma_minus` holomorphic and invertible in `1/z` and `gamma_plus` in `z`,
//! has splitting type `d`. Twisted sections are row vectors
//! `q(z) = sum_{j>=0} q_j z^{-j}` with `z^k q(z) gamma(z)` free of negative powers,
//! so `h0(O(d)(k)) = max(0, d + k + 1)` and the winding of `det gamma` is `+sum d_i`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liegroup::GroupSpec;
use crate::linalg::{c, identity, unitary_defect, CMat};
use crate::loopspace::{DiscreteLoop, WeightVector};

/// Sign relating `sum d_i` to the winding number of `det gamma`.
pub const WINDING_SIGN: i64 = 1;
pub const CONVENTION_TAG: &str = "gamma = gamma_minus diag(z^d) gamma_plus; det winding = +sum d";

pub const CHECK_SAMPLES: usize = 1024;
pub const DEFAULT_CONDITION_CAP: f64 = 1e8;
pub const RANK_RTOL: f64 = 1e-7;
pub const FOURIER_TAIL_TOL: f64 = 1e-8;

/// `gamma(z) = sum_{k=-m}^{m} A_k z^k`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LaurentLoop {
    pub rank: usize,
    pub degree: usize,
    /// `coeffs[k + degree] = A_k`
    #[serde(with = "crate::linalg::serde_cmat_vec")]
    pub coeffs: Vec<CMat>,
}

impl LaurentLoop {
    pub fn new(rank: usize, degree: usize, coeffs: Vec<CMat>) -> Result<Self> {
        let lp = LaurentLoop {
            rank,
            degree,
            coeffs,
        };
        lp.validate(DEFAULT_CONDITION_CAP)?;
        Ok(lp)
    }

    pub fn identity(rank: usize) -> Self {
        LaurentLoop {
            rank,
            degree: 0,
            coeffs: vec![identity(rank)],
        }
    }

    /// `diag(z^{e_1}, ..., z^{e_r})` with the given exponents in the given order.
    pub fn diagonal(exponents: &[i64]) -> Self {
        let r = exponents.len();
        let m = exponents.iter().map(|e| e.unsigned_abs() as usize).max().unwrap_or(0);
        let mut coeffs = vec![CMat::zeros(r, r); 2 * m + 1];
        for (i, e) in exponents.iter().enumerate() {
            coeffs[(*e + m as i64) as usize][(i, i)] = c(1.0, 0.0);
        }
        LaurentLoop {
            rank: r,
            degree: m,
            coeffs,
        }
    }

    pub fn coeff(&self, k: i64) -> Option<&CMat> {
        let idx = k + self.degree as i64;
        if idx < 0 {
            return None;
        }
        self.coeffs.get(idx as usize)
    }

    pub fn eval(&self, z: Complex64) -> CMat {
        let m = self.degree as i32;
        let mut out = CMat::zeros(self.rank, self.rank);
        for (idx, a) in self.coeffs.iter().enumerate() {
            out += a * z.powi(idx as i32 - m);
        }
        out
    }

    pub fn validate(&self, condition_cap: f64) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::Validation("rank must be positive".into()));
        }
        if self.coeffs.len() != 2 * self.degree + 1 {
            return Err(Error::Validation(format!(
                "expected {} coefficients for degree {}, got {}",
                2 * self.degree + 1,
                self.degree,
                self.coeffs.len()
            )));
        }
        for a in &self.coeffs {
            if a.nrows() != self.rank || a.ncols() != self.rank {
                return Err(Error::Validation("coefficient shape differs from rank".into()));
            }
        }
        for j in 0..CHECK_SAMPLES {
            let z = circle_point(j, CHECK_SAMPLES);
            let sv = self.eval(z).svd(false, false).singular_values;
            let hi = sv.max();
            let lo = sv.min();
            if !(lo > 0.0) || hi / lo > condition_cap {
                return Err(Error::Validation(format!(
                    "loop is not invertible on the circle (condition {:e} at sample {j})",
                    hi / lo
                )));
            }
        }
        Ok(())
    }

    /// Product of Laurent polynomials.
    pub fn mul(&self, other: &LaurentLoop) -> LaurentLoop {
        let m = self.degree + other.degree;
        let mut coeffs = vec![CMat::zeros(self.rank, self.rank); 2 * m + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        LaurentLoop {
            rank: self.rank,
            degree: m,
            coeffs,
        }
        .trimmed()
    }

    /// Drop vanishing outer coefficient pairs.
    pub fn trimmed(mut self) -> LaurentLoop {
        while self.degree > 0 {
            let lo = &self.coeffs[0];
            let hi = &self.coeffs[self.coeffs.len() - 1];
            if lo.norm() < 1e-14 && hi.norm() < 1e-14 {
                self.coeffs.remove(0);
                self.coeffs.pop();
                self.degree -= 1;
            } else {
                break;
            }
        }
        self
    }

    /// `q(z) gamma(z) r(z)` for constant matrices.
    pub fn sandwich(&self, left: &CMat, right: &CMat) -> LaurentLoop {
        LaurentLoop {
            rank: self.rank,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|a| left * a * right).collect(),
        }
    }
}

pub(crate) fn circle_point(j: usize, n: usize) -> Complex64 {
    c(0.0, 2.0 * PI * j as f64 / n as f64).exp()
}

/// Winding number of `det gamma(z)` along the unit circle.
pub fn det_winding(gamma: &LaurentLoop) -> Result<i64> {
    let samples = CHECK_SAMPLES.max(16 * gamma.rank * gamma.degree);
    let dets: Vec<Complex64> = (0..samples)
        .map(|j| gamma.eval(circle_point(j, samples)).determinant())
        .collect();
    let mut total = 0.0;
    for j in 0..samples {
        let inc = (dets[(j + 1) % samples] / dets[j]).arg();
        if inc.abs() >= PI / 2.0 {
            return Err(Error::Undersampled {
                index: j,
                increment: inc,
            });
        }
        total += inc;
    }
    let turns = total / (2.0 * PI);
    let w = turns.round();
    if (turns - w).abs() * 2.0 * PI > 1e-3 {
        return Err(Error::Validation(format!(
            "determinant phase sum {total:.6} is not a multiple of 2 pi"
        )));
    }
    Ok(w as i64)
}

/// Kernel dimension of the twisted section map with sections truncated at degree `K`.
fn h0_raw(gamma: &LaurentLoop, k: i64, big_k: usize) -> usize {
    let r = gamma.rank;
    let m = gamma.degree as i64;
    let unknowns = (big_k + 1) * r;
    let p_min = k - m - big_k as i64;
    if p_min >= 0 {
        return unknowns;
    }
    let neg = (-p_min) as usize;
    let mut mat = DMatrix::<Complex64>::zeros(neg * r, unknowns);
    for pi in 0..neg {
        let p = p_min + pi as i64;
        for j in 0..=big_k {
            let l = p - k + j as i64;
            if let Some(a) = gamma.coeff(l) {
                if l.abs() <= m {
                    let at = a.transpose();
                    mat.view_mut((pi * r, j * r), (r, r)).copy_from(&at);
                }
            }
        }
    }
    let sv = mat.svd(false, false).singular_values;
    let top = sv.max();
    let rank = if top == 0.0 {
        0
    } else {
        sv.iter().filter(|s| **s > RANK_RTOL * top).count()
    };
    unknowns - rank
}

/// `dim H^0` of the clutched bundle twisted by `k`, checked for stability under `K -> K + 2`.
pub fn h0_twisted(gamma: &LaurentLoop, k: i64, big_k: usize) -> Result<usize> {
    let small = h0_raw(gamma, k, big_k);
    let large = h0_raw(gamma, k, big_k + 2);
    if small != large {
        return Err(Error::Truncation {
            twist: k,
            small,
            large,
        });
    }
    Ok(small)
}

/// Default truncation for twist `k`.
pub fn default_truncation(gamma: &LaurentLoop, k: i64) -> usize {
    2 * gamma.degree + k.unsigned_abs() as usize + 1
}

/// Partial indices from the jump pattern of `h0` over twists.
pub fn splitting_type(gamma: &LaurentLoop) -> Result<WeightVector> {
    let r = gamma.rank;
    let m = gamma.degree as i64;
    let k0 = -(m + 2);
    let mut prev_h0 = h0_twisted(gamma, k0, default_truncation(gamma, k0))?;
    if prev_h0 != 0 {
        return Err(Error::NumericalRank { twists: vec![k0] });
    }
    let mut prev_jump = 0usize;
    let mut d = Vec::with_capacity(r);
    let mut k = k0 + 1;
    while prev_jump < r {
        if k > m + 2 {
            return Err(Error::NumericalRank {
                twists: vec![m + 2],
            });
        }
        let h0 = h0_twisted(gamma, k, default_truncation(gamma, k))?;
        if h0 < prev_h0 {
            return Err(Error::NumericalRank { twists: vec![k - 1, k] });
        }
        let jump = h0 - prev_h0;
        if jump < prev_jump || jump > r {
            return Err(Error::NumericalRank { twists: vec![k - 1, k] });
        }
        for _ in prev_jump..jump {
            d.push(-k);
        }
        prev_jump = jump;
        prev_h0 = h0;
        k += 1;
    }
    let w = WeightVector::new(d);
    Ok(w)
}

/// Discrete Fourier coefficients of a sampled loop, truncated to `[-m, m]`.
pub fn loop_to_laurent(gamma: &DiscreteLoop, m: usize) -> Result<LaurentLoop> {
    let n = gamma.len();
    if 2 * m + 1 > n {
        return Err(Error::Smoothness {
            degree: m,
            tol: FOURIER_TAIL_TOL,
            tail: f64::INFINITY,
        });
    }
    let all = fourier_coefficients(gamma);
    let half = n as i64 / 2;
    let mut tail: f64 = 0.0;
    for k in -half..=half {
        if k.unsigned_abs() as usize > m {
            tail = tail.max(all[k.rem_euclid(n as i64) as usize].norm());
        }
    }
    if tail > FOURIER_TAIL_TOL {
        return Err(Error::Smoothness {
            degree: m,
            tol: FOURIER_TAIL_TOL,
            tail,
        });
    }
    let coeffs = (-(m as i64)..=m as i64)
        .map(|k| all[k.rem_euclid(n as i64) as usize].clone())
        .collect();
    let lp = LaurentLoop {
        rank: gamma.rank(),
        degree: m,
        coeffs,
    };
    let mut recon: f64 = 0.0;
    for (j, g) in gamma.samples.iter().enumerate() {
        recon = recon.max((lp.eval(circle_point(j, n)) - g).norm());
    }
    if recon > 1e-6 {
        return Err(Error::Smoothness {
            degree: m,
            tol: FOURIER_TAIL_TOL,
            tail: recon,
        });
    }
    Ok(lp.trimmed())
}

/// Smallest truncation degree whose Fourier tail is below tolerance.
pub fn loop_to_laurent_auto(gamma: &DiscreteLoop) -> Result<LaurentLoop> {
    let n = gamma.len();
    let all = fourier_coefficients(gamma);
    let half = n / 2;
    let mut m = half;
    while m > 0 {
        let k = m as i64;
        let worst = all[k.rem_euclid(n as i64) as usize]
            .norm()
            .max(all[(-k).rem_euclid(n as i64) as usize].norm());
        if worst > FOURIER_TAIL_TOL {
            break;
        }
        m -= 1;
    }
    if 2 * m + 1 > n {
        return Err(Error::Smoothness {
            degree: m,
            tol: FOURIER_TAIL_TOL,
            tail: all[half].norm(),
        });
    }
    loop_to_laurent(gamma, m)
}

fn fourier_coefficients(gamma: &DiscreteLoop) -> Vec<CMat> {
    let n = gamma.len();
    let r = gamma.rank();
    (0..n)
        .map(|k| {
            let mut a = CMat::zeros(r, r);
            for (j, g) in gamma.samples.iter().enumerate() {
                a += g * circle_point((j * k) % n, n).conj();
            }
            a / c(n as f64, 0.0)
        })
        .collect()
}

/// Unitary based loop in the same double coset as `gamma`: `u = gamma b^{-1}`
/// where `gamma^* gamma = b^* b` with `b` holomorphic and invertible in the disk
/// (block-Toeplitz Cholesky spectral factorization), then rebased.
pub fn unitarize(gamma: &LaurentLoop, n: usize) -> Result<DiscreteLoop> {
    let r = gamma.rank;
    let m = gamma.degree as i64;
    let qdeg = 2 * m;
    let q = |k: i64| -> CMat {
        let mut acc = CMat::zeros(r, r);
        for l in -m..=m {
            if let (Some(a), Some(b)) = (gamma.coeff(l), gamma.coeff(l + k)) {
                if (l + k).abs() <= m {
                    acc += a.adjoint() * b;
                }
            }
        }
        acc
    };
    let qs: Vec<CMat> = (-qdeg..=qdeg).map(q).collect();
    let factor = |blocks: usize| -> Result<Vec<CMat>> {
        let dim = blocks * r;
        let mut t = DMatrix::<Complex64>::zeros(dim, dim);
        for i in 0..blocks {
            for j in 0..blocks {
                let k = j as i64 - i as i64;
                if k.abs() <= qdeg {
                    t.view_mut((i * r, j * r), (r, r))
                        .copy_from(&qs[(k + qdeg) as usize]);
                }
            }
        }
        let chol = t
            .cholesky()
            .ok_or_else(|| Error::Validation("Toeplitz matrix is not positive definite".into()))?;
        let l = chol.l();
        let last = blocks - 1;
        Ok((0..=qdeg as usize)
            .map(|s| {
                l.view((last * r, (last - s) * r), (r, r)).adjoint()
            })
            .collect())
    };
    let mut blocks = 16 * (qdeg as usize + 1);
    let mut b = factor(blocks)?;
    let mut converged = false;
    for _ in 0..4 {
        blocks *= 2;
        let b2 = factor(blocks)?;
        let diff = b.iter().zip(&b2).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        b = b2;
        if diff < 1e-11 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NotConverged(
            "spectral factorization did not settle; the loop is nearly singular".into(),
        ));
    }
    let eval_b = |z: Complex64| -> CMat {
        let mut acc = CMat::zeros(r, r);
        for (s, bs) in b.iter().enumerate() {
            acc += bs * z.powi(s as i32);
        }
        acc
    };
    let mut samples = Vec::with_capacity(n);
    for j in 0..n {
        let z = circle_point(j, n);
        let bz = eval_b(z);
        let inv = bz
            .try_inverse()
            .ok_or_else(|| Error::Validation("spectral factor is singular".into()))?;
        samples.push(gamma.eval(z) * inv);
    }
    for u in &samples {
        let defect = unitary_defect(u);
        if defect > 1e-8 {
            return Err(Error::NotConverged(format!(
                "unitarized loop has unitarity defect {defect:e}"
            )));
        }
    }
    let base = samples[0].adjoint();
    let samples = samples.into_iter().map(|u| u * &base).collect();
    let spec = GroupSpec::unitary(r);
    DiscreteLoop::new(spec, samples)
}

/// Which triangular factors to plant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorShape {
    /// Unipotent triangular factors with arbitrary off-diagonal entries.
    Generic,
    /// Off-diagonal entries only between equal weights.
    Levi,
}

/// `gamma_minus diag(z^d) gamma_plus` with random unipotent triangular polynomial
/// factors of degree `p`, conjugated by random constant unitaries.
pub fn planted_loop<R: Rng + ?Sized>(
    d: &WeightVector,
    p: usize,
    amplitude: f64,
    shape: FactorShape,
    rng: &mut R,
) -> LaurentLoop {
    let r = d.rank();
    let mut order: Vec<i64> = d.as_slice().to_vec();
    // random permutation of the diagonal
    for i in (1..r).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let allowed = |i: usize, j: usize| match shape {
        FactorShape::Generic => true,
        FactorShape::Levi => order[i] == order[j],
    };
    let gauss = |rng: &mut R| -> Complex64 {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * amplitude
    };
    let mut minus = vec![CMat::zeros(r, r); 2 * p + 1];
    let mut plus = vec![CMat::zeros(r, r); 2 * p + 1];
    minus[p] = identity(r);
    plus[p] = identity(r);
    for i in 0..r {
        for j in 0..r {
            if i == j || !allowed(i, j) {
                continue;
            }
            for s in 0..=p {
                if i > j {
                    minus[p - s][(i, j)] = gauss(rng);
                } else {
                    plus[p + s][(i, j)] = gauss(rng);
                }
            }
        }
    }
    let gm = LaurentLoop {
        rank: r,
        degree: p,
        coeffs: minus,
    };
    let gp = LaurentLoop {
        rank: r,
        degree: p,
        coeffs: plus,
    };
    let diag = LaurentLoop::diagonal(&order);
    let left = crate::linalg::random_unitary(r, rng);
    let right = crate::linalg::random_unitary(r, rng);
    gm.mul(&diag).mul(&gp).sandwich(&left, &right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, random_unitary};
    use crate::loopspace::geodesic_loop;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn wv(d: &[i64]) -> WeightVector {
        WeightVector::new(d.to_vec())
    }

    fn triangular() -> LaurentLoop {
        // [[z, 1], [0, 1/z]]
        let mut coeffs = vec![CMat::zeros(2, 2); 3];
        coeffs[2][(0, 0)] = c(1.0, 0.0);
        coeffs[1][(0, 1)] = c(1.0, 0.0);
        coeffs[0][(1, 1)] = c(1.0, 0.0);
        LaurentLoop::new(2, 1, coeffs).unwrap()
    }

    #[test]
    fn winding_examples() {
        assert_eq!(det_winding(&LaurentLoop::identity(2)).unwrap(), 0);
        assert_eq!(det_winding(&LaurentLoop::diagonal(&[1, -1])).unwrap(), 0);
        assert_eq!(det_winding(&LaurentLoop::diagonal(&[2, 0])).unwrap(), 2);
    }

    #[test]
    fn h0_examples() {
        assert_eq!(h0_twisted(&LaurentLoop::identity(2), 0, 4).unwrap(), 2);
        let g = LaurentLoop::diagonal(&[-1, 1]);
        assert_eq!(h0_twisted(&g, 0, 5).unwrap(), 2);
        let t = triangular();
        assert_eq!(h0_twisted(&t, 0, 6).unwrap(), 2);
        assert_eq!(h0_twisted(&t, -1, 6).unwrap(), 0);
        assert_eq!(splitting_type(&t).unwrap(), wv(&[0, 0]));
    }

    #[test]
    fn h0_counts_line_bundle_sections() {
        for d in -3i64..=3 {
            let g = LaurentLoop::diagonal(&[d]);
            for k in -4i64..=4 {
                let expected = (d + k + 1).max(0) as usize;
                let big_k = default_truncation(&g, k) + 4;
                assert_eq!(h0_twisted(&g, k, big_k).unwrap(), expected, "d={d} k={k}");
            }
        }
    }

    #[test]
    fn diagonal_types() {
        assert_eq!(splitting_type(&LaurentLoop::identity(3)).unwrap(), wv(&[0, 0, 0]));
        assert_eq!(splitting_type(&LaurentLoop::diagonal(&[-2, 2])).unwrap(), wv(&[2, -2]));
        assert_eq!(splitting_type(&LaurentLoop::diagonal(&[3, -1, 0, -2])).unwrap(), wv(&[3, 0, -1, -2]));
    }

    #[test]
    fn planted_factorizations_are_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for case in 0..40 {
            let r = 2 + case % 3;
            let d: Vec<i64> = (0..r).map(|_| rng.random_range(-3..=3)).collect();
            let d = WeightVector::new(d);
            let shape = if case % 2 == 0 { FactorShape::Generic } else { FactorShape::Levi };
            let g = planted_loop(&d, 1 + case % 2, 0.5, shape, &mut rng);
            assert_eq!(splitting_type(&g).unwrap(), d, "case {case}");
            assert_eq!(det_winding(&g).unwrap(), WINDING_SIGN * d.sum());
        }
    }

    #[test]
    fn laurent_of_sampled_loops() {
        let spec = GroupSpec::special_unitary(2);
        let lp = loop_to_laurent(&DiscreteLoop::constant(spec, 16), 2).unwrap();
        assert_eq!(lp.degree, 0);
        assert!((&lp.coeffs[0] - identity(2)).norm() < 1e-14);
        let g = geodesic_loop(&wv(&[1, -1]), &identity(2), 32, true).unwrap();
        let lp = loop_to_laurent(&g, 3).unwrap();
        assert_eq!(lp.degree, 1);
        assert!((lp.coeff(1).unwrap()[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((lp.coeff(-1).unwrap()[(1, 1)] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(lp.coeff(0).unwrap().norm() < 1e-12);
        assert_eq!(splitting_type(&lp).unwrap(), wv(&[1, -1]));
    }

    #[test]
    fn rough_loops_fail_the_decay_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let spec = GroupSpec::special_unitary(2);
        let g = DiscreteLoop::constant(spec, 32)
            .retract(&crate::loopspace::LoopTangent::random(&spec, 32, &mut rng).scaled(0.3))
            .unwrap();
        assert!(matches!(loop_to_laurent(&g, 4), Err(Error::Smoothness { .. })));
    }

    #[test]
    fn type_is_invariant_under_constant_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = planted_loop(&wv(&[2, 0, -1]), 1, 0.4, FactorShape::Generic, &mut rng);
        let q1 = random_unitary(3, &mut rng);
        let q2 = random_unitary(3, &mut rng);
        assert_eq!(splitting_type(&g.sandwich(&q1, &identity(3))).unwrap(), wv(&[2, 0, -1]));
        assert_eq!(splitting_type(&g.sandwich(&identity(3), &q2)).unwrap(), wv(&[2, 0, -1]));
    }

    #[test]
    fn unitarization_keeps_the_type() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [wv(&[1, -1]), wv(&[2, -1, -1]), wv(&[1, 0, 0, -1])] {
            let g = planted_loop(&d, 1, 0.4, FactorShape::Generic, &mut rng);
            let u = unitarize(&g, 128).unwrap();
            let lp = loop_to_laurent_auto(&u).unwrap();
            assert_eq!(splitting_type(&lp).unwrap(), d);
        }
        let u = unitarize(&LaurentLoop::diagonal(&[2, -2]), 64).unwrap();
        let expected = diag(&[circle_point(2, 64), circle_point(62, 64)]);
        assert!((&u.samples[1] - expected).norm() < 1e-10);
    }

    #[test]
    fn jump_counts_are_monotone_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = planted_loop(&wv(&[3, 1, -2]), 2, 0.3, FactorShape::Generic, &mut rng);
        let mut prev_h0 = 0;
        let mut prev_jump = 0;
        let m = g.degree as i64;
        for k in -(m + 2)..=(m + 2) {
            let h = h0_twisted(&g, k, default_truncation(&g, k)).unwrap();
            let jump = h - prev_h0;
            if k > -(m + 2) {
                assert!(jump >= prev_jump && jump <= 3);
                prev_jump = jump;
            }
            prev_h0 = h;
        }
    }
}
