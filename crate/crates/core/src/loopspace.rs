//! Discretized based loops in U(r)/SU(r), the energy functional, its gradient,
//! second variation, and geodesic (one-parameter subgroup) loops.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liegroup::{exp_skew, inner_unchecked, log_unitary, GroupSpec, DEFAULT_BRANCH_TOL};
use crate::linalg::{c, frob_norm_sq, identity, op_norm, random_skew, skew_defect, unitary_defect, CMat};

/// Largest admissible geodesic distance between adjacent samples.
pub const ADJACENT_LIMIT: f64 = PI / 2.0;

/// A based loop sampled at `t_k = k / N`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscreteLoop {
    pub spec: GroupSpec,
    #[serde(with = "crate::linalg::serde_cmat_vec")]
    pub samples: Vec<CMat>,
}

/// Variation field along a loop; `fields[0]` is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopTangent {
    pub fields: Vec<CMat>,
}

/// Splitting type / weights of a circle subgroup, sorted descending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<i64>);

impl WeightVector {
    pub fn new(mut d: Vec<i64>) -> Self {
        d.sort_unstable_by(|a, b| b.cmp(a));
        WeightVector(d)
    }

    pub fn zero(r: usize) -> Self {
        WeightVector(vec![0; r])
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn sum(&self) -> i64 {
        self.0.iter().sum()
    }

    /// `sum d_i^2`
    pub fn energy(&self) -> i64 {
        self.0.iter().map(|d| d * d).sum()
    }

    /// `max |d_i|`
    pub fn sup_norm(&self) -> i64 {
        self.0.iter().map(|d| d.abs()).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }

    pub fn is_trivial(&self) -> bool {
        self.0.iter().all(|d| *d == 0)
    }

    pub fn check_for(&self, spec: &GroupSpec) -> Result<()> {
        if self.rank() != spec.rank {
            return Err(Error::Validation(format!(
                "weight vector {self} has length {} but rank is {}",
                self.rank(),
                spec.rank
            )));
        }
        if spec.special && self.sum() != 0 {
            return Err(Error::Validation(format!(
                "weights {self} are not traceless"
            )));
        }
        Ok(())
    }

    /// Block-embed by appending `k` zero weights.
    pub fn stabilized(&self, k: usize) -> Self {
        let mut d = self.0.clone();
        d.extend(std::iter::repeat_n(0, k));
        WeightVector::new(d)
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        f.pad(&format!("({})", inner.join(",")))
    }
}

impl std::str::FromStr for WeightVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let d = trimmed
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|e| Error::Argument(format!("bad weight '{t}': {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if d.is_empty() {
            return Err(Error::Argument("empty weight vector".into()));
        }
        Ok(WeightVector::new(d))
    }
}

impl DiscreteLoop {
    /// Validating constructor.
    pub fn new(spec: GroupSpec, samples: Vec<CMat>) -> Result<Self> {
        let lp = DiscreteLoop { spec, samples };
        lp.validate()?;
        Ok(lp)
    }

    pub(crate) fn new_unchecked(spec: GroupSpec, samples: Vec<CMat>) -> Self {
        DiscreteLoop { spec, samples }
    }

    pub fn constant(spec: GroupSpec, n: usize) -> Self {
        DiscreteLoop {
            spec,
            samples: vec![identity(spec.rank); n],
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        let n = self.samples.len();
        if n < 2 {
            return Err(Error::Validation("a loop needs at least two samples".into()));
        }
        if (&self.samples[0] - identity(self.spec.rank)).norm() > self.spec.tol {
            return Err(Error::Validation("loop is not based at the identity".into()));
        }
        for g in &self.samples {
            self.spec.check_group(g)?;
        }
        let worst = self.max_adjacent_distance()?;
        if worst >= ADJACENT_LIMIT {
            return Err(Error::Discretization(format!(
                "adjacent samples are {worst:.3} apart (limit pi/2); increase N"
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.spec.rank
    }

    /// `log(g_k^{-1} g_{k+1})` for `k = 0..N`, indices periodic.
    pub fn increments(&self) -> Result<Vec<CMat>> {
        let n = self.samples.len();
        (0..n)
            .map(|k| {
                let step = self.samples[k].adjoint() * &self.samples[(k + 1) % n];
                log_unitary(&step, DEFAULT_BRANCH_TOL)
            })
            .collect()
    }

    pub fn max_adjacent_distance(&self) -> Result<f64> {
        Ok(self
            .increments()?
            .iter()
            .map(op_norm)
            .fold(0.0, f64::max))
    }

    /// Pointwise right translation `g_k exp(xi_k)`.
    pub fn retract(&self, xi: &LoopTangent) -> Result<DiscreteLoop> {
        if xi.fields.len() != self.samples.len() {
            return Err(Error::Validation("tangent length differs from loop length".into()));
        }
        let samples = self
            .samples
            .iter()
            .zip(&xi.fields)
            .map(|(g, x)| g * exp_skew(x))
            .collect();
        Ok(DiscreteLoop::new_unchecked(self.spec, samples))
    }

    /// `q gamma q^{-1}`
    pub fn conjugate(&self, q: &CMat) -> DiscreteLoop {
        let qi = q.adjoint();
        let samples = self.samples.iter().map(|g| q * g * &qi).collect();
        DiscreteLoop::new_unchecked(self.spec, samples)
    }

    /// Block-diagonal embedding `diag(g, I_k)` into rank `r + k`.
    pub fn stabilized(&self, k: usize) -> DiscreteLoop {
        let r = self.rank();
        let spec = GroupSpec {
            rank: r + k,
            ..self.spec
        };
        let samples = self
            .samples
            .iter()
            .map(|g| {
                let mut m = identity(r + k);
                m.view_mut((0, 0), (r, r)).copy_from(g);
                m
            })
            .collect();
        DiscreteLoop::new_unchecked(spec, samples)
    }

    /// Keep every `factor`-th sample.
    pub fn subsample(&self, factor: usize) -> Result<DiscreteLoop> {
        if factor == 0 || !self.len().is_multiple_of(factor) {
            return Err(Error::Validation(format!(
                "cannot subsample {} points by {factor}",
                self.len()
            )));
        }
        let samples = self.samples.iter().step_by(factor).cloned().collect();
        DiscreteLoop::new(self.spec, samples)
    }
}

impl LoopTangent {
    pub fn zero(n: usize, r: usize) -> Self {
        LoopTangent {
            fields: vec![CMat::zeros(r, r); n],
        }
    }

    /// Random based tangent with unit-Frobenius entries (zero at the basepoint).
    pub fn random<R: Rng + ?Sized>(spec: &GroupSpec, n: usize, rng: &mut R) -> Self {
        let mut fields = vec![CMat::zeros(spec.rank, spec.rank); n];
        for f in fields.iter_mut().skip(1) {
            let mut x = random_skew(spec.rank, rng);
            if spec.special {
                remove_trace(&mut x);
            }
            *f = x;
        }
        LoopTangent { fields }
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// L^2 pairing `(1/N) sum <xi_k, eta_k>`.
    pub fn pairing(&self, other: &LoopTangent, spec: &GroupSpec) -> f64 {
        let n = self.fields.len().max(1) as f64;
        self.fields
            .iter()
            .zip(&other.fields)
            .map(|(a, b)| inner_unchecked(a, b, spec.metric_scale))
            .sum::<f64>()
            / n
    }

    pub fn norm(&self, spec: &GroupSpec) -> f64 {
        self.pairing(self, spec).max(0.0).sqrt()
    }

    pub fn scaled(&self, s: f64) -> LoopTangent {
        LoopTangent {
            fields: self.fields.iter().map(|x| x * c(s, 0.0)).collect(),
        }
    }

    pub fn validate(&self, spec: &GroupSpec) -> Result<()> {
        if let Some(x0) = self.fields.first() {
            if x0.norm() > spec.tol {
                return Err(Error::Validation("tangent is not based (xi_0 != 0)".into()));
            }
        }
        for x in &self.fields {
            if skew_defect(x) > spec.tol * (1.0 + x.norm()) {
                return Err(Error::Validation("tangent entry is not skew-Hermitian".into()));
            }
        }
        Ok(())
    }
}

pub(crate) fn remove_trace(x: &mut CMat) {
    let r = x.nrows();
    let tr = x.trace() / c(r as f64, 0.0);
    for j in 0..r {
        x[(j, j)] -= tr;
    }
}

/// `(N / 4 pi^2) sum_k |log(g_k^{-1} g_{k+1})|^2`
pub fn loop_energy(gamma: &DiscreteLoop) -> Result<f64> {
    let incs = gamma.increments()?;
    Ok(energy_from_increments(&incs, gamma.spec.metric_scale))
}

pub(crate) fn energy_from_increments(incs: &[CMat], kappa: f64) -> f64 {
    let n = incs.len() as f64;
    n / (4.0 * PI * PI) * incs.iter().map(|x| kappa * frob_norm_sq(x)).sum::<f64>()
}

/// L^2 gradient: `G_k = (N^2 / 2 pi^2) (X_{k-1} - X_k)`, `G_0 = 0`.
pub fn energy_gradient(gamma: &DiscreteLoop) -> Result<LoopTangent> {
    let incs = gamma.increments()?;
    Ok(gradient_from_increments(&incs))
}

pub(crate) fn gradient_from_increments(incs: &[CMat]) -> LoopTangent {
    let n = incs.len();
    let scale = c((n * n) as f64 / (2.0 * PI * PI), 0.0);
    let mut fields = Vec::with_capacity(n);
    fields.push(CMat::zeros(incs[0].nrows(), incs[0].ncols()));
    for k in 1..n {
        fields.push((&incs[k - 1] - &incs[k]) * scale);
    }
    LoopTangent { fields }
}

/// Samples of `t -> q exp(2 pi i t diag(d)) q^{-1}` at `t = k/N`.
pub fn geodesic_loop(d: &WeightVector, conjugator: &CMat, n: usize, special: bool) -> Result<DiscreteLoop> {
    let r = d.rank();
    let spec = GroupSpec {
        rank: r,
        special,
        metric_scale: 1.0,
        tol: crate::liegroup::DEFAULT_TOL,
    };
    spec.validate()?;
    d.check_for(&spec)?;
    let min_n = 8 * (d.sup_norm() as usize + 1);
    if n < min_n {
        return Err(Error::Discretization(format!(
            "N = {n} is below 8 (max|d| + 1) = {min_n}"
        )));
    }
    if conjugator.nrows() != r || unitary_defect(conjugator) > spec.tol {
        return Err(Error::Validation("conjugator must be an r x r unitary".into()));
    }
    let qi = conjugator.adjoint();
    let samples = (0..n)
        .map(|k| {
            let t = k as f64 / n as f64;
            let mut m = CMat::zeros(r, r);
            for (j, dj) in d.as_slice().iter().enumerate() {
                m[(j, j)] = c(0.0, 2.0 * PI * t * *dj as f64).exp();
            }
            conjugator * m * &qi
        })
        .collect();
    Ok(DiscreteLoop::new_unchecked(spec, samples))
}

/// Which reading of the printed index formula `sum_{i<j} 2|a_i - a_j| - 2` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormulaReading {
    /// `(sum_{i<j} 2|a_i - a_j|) - 2`
    GlobalOffset,
    /// `sum_{i<j} (2|a_i - a_j| - 2)`
    PerPair,
    /// `sum_{i<j, a_i != a_j} (2|a_i - a_j| - 2)`
    PerDistinctPair,
}

impl FormulaReading {
    pub const ALL: [FormulaReading; 3] = [
        FormulaReading::GlobalOffset,
        FormulaReading::PerPair,
        FormulaReading::PerDistinctPair,
    ];

    pub fn evaluate(self, d: &WeightVector) -> Result<i64> {
        if d.is_constant() {
            return Err(Error::FormulaUndefined(d.as_slice().to_vec()));
        }
        let a = d.as_slice();
        let mut total = 0;
        let mut sum_abs = 0;
        for i in 0..a.len() {
            for j in (i + 1)..a.len() {
                let diff = (a[i] - a[j]).abs();
                sum_abs += 2 * diff;
                match self {
                    FormulaReading::GlobalOffset => {}
                    FormulaReading::PerPair => total += 2 * diff - 2,
                    FormulaReading::PerDistinctPair => {
                        if diff != 0 {
                            total += 2 * diff - 2
                        }
                    }
                }
            }
        }
        Ok(match self {
            FormulaReading::GlobalOffset => sum_abs - 2,
            _ => total,
        })
    }

    /// Readings that reproduce every `(weights, oracle index)` observation.
    pub fn consistent_with(observations: &[(WeightVector, usize)]) -> Vec<FormulaReading> {
        FormulaReading::ALL
            .into_iter()
            .filter(|reading| {
                observations.iter().all(|(d, idx)| match reading.evaluate(d) {
                    Ok(v) => v == *idx as i64,
                    Err(_) => *idx == 0,
                })
            })
            .collect()
    }
}

/// Reading selected by calibration against the Hessian oracle
/// (checked by the test suite on SU(2) weights a = 1, 2, 3 and SU(3)
/// weights (1,0,-1), (2,-1,-1), (1,1,-2)).
pub const CALIBRATED_READING: FormulaReading = FormulaReading::PerDistinctPair;

pub fn formula_morse_index(d: &WeightVector) -> Result<i64> {
    CALIBRATED_READING.evaluate(d)
}

/// Calibrated index, with 0 for the constant class.
pub fn calibrated_index(d: &WeightVector) -> i64 {
    formula_morse_index(d).unwrap_or(0)
}

/// Traceless weight vectors of rank `r` with calibrated index at most `bound`.
pub fn enumerate_low_index_weights(r: usize, bound: usize) -> Vec<WeightVector> {
    let limit = bound as i64 + 2;
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(r);
    enumerate_rec(r, limit, limit, &mut current, &mut out);
    let mut res: Vec<WeightVector> = out
        .into_iter()
        .map(WeightVector::new)
        .filter(|d| d.sum() == 0 && calibrated_index(d) <= bound as i64)
        .collect();
    res.sort_by(|a, b| calibrated_index(a).cmp(&calibrated_index(b)).then(b.cmp(a)));
    res.dedup();
    res
}

fn enumerate_rec(r: usize, limit: i64, upper: i64, current: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if current.len() == r {
        out.push(current.clone());
        return;
    }
    let mut v = upper;
    while v >= -limit {
        current.push(v);
        enumerate_rec(r, limit, v, current, out);
        current.pop();
        v -= 1;
    }
}

/// Spectrum summary of the second variation at a critical loop.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HessianReport {
    pub negative: usize,
    pub near_zero: usize,
    /// Dimension of the conjugation orbit through the loop, when it is a geodesic.
    pub expected_null: Option<usize>,
    pub threshold: f64,
    pub smallest: f64,
    pub warning: Option<String>,
}

/// Count of second-variation eigenvalues below `-1e-6 N`.
pub fn loop_hessian_negative_count(gamma: &DiscreteLoop) -> Result<usize> {
    Ok(hessian_report(gamma, None)?.negative)
}

/// Assemble the second variation on the based tangent space (in an L^2-orthonormal
/// basis) by central differences of the gradient and count its signs.
pub fn hessian_report(gamma: &DiscreteLoop, expected_null: Option<usize>) -> Result<HessianReport> {
    let spec = gamma.spec;
    let n = gamma.len();
    let incs = gamma.increments()?;
    let grad = gradient_from_increments(&incs);
    let gnorm = grad.norm(&spec);
    let crit_tol = 1e-6 * (n as f64);
    if gnorm > crit_tol {
        return Err(Error::Precondition(format!(
            "loop is not critical (gradient norm {gnorm:e})"
        )));
    }
    let basis = spec.algebra_basis();
    let m = basis.len();
    let dim = (n - 1) * m;
    let kappa = spec.metric_scale;
    let eps = 1e-5;
    let scale_basis = (n as f64).sqrt();
    let gscale = (n * n) as f64 / (2.0 * PI * PI);
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    let step_log = |a: &CMat, b: &CMat| log_unitary(&(a.adjoint() * b), DEFAULT_BRANCH_TOL);
    for j in 1..n {
        let prev = &gamma.samples[j - 1];
        let next = &gamma.samples[(j + 1) % n];
        for (a, e) in basis.iter().enumerate() {
            let col = (j - 1) * m + a;
            let mut diffs: [Option<(CMat, CMat)>; 2] = [None, None];
            for (slot, sign) in [1.0, -1.0].into_iter().enumerate() {
                let pert = &gamma.samples[j] * exp_skew(&(e * c(sign * eps * scale_basis, 0.0)));
                let x_prev = step_log(prev, &pert)?;
                let x_here = step_log(&pert, next)?;
                diffs[slot] = Some((x_prev, x_here));
            }
            let (xp_plus, xh_plus) = diffs[0].take().unwrap();
            let (xp_minus, xh_minus) = diffs[1].take().unwrap();
            let d_prev = (&xp_plus - &xp_minus) * c(1.0 / (2.0 * eps), 0.0);
            let d_here = (&xh_plus - &xh_minus) * c(1.0 / (2.0 * eps), 0.0);
            // G_i = gscale (X_{i-1} - X_i); X_{j-1} and X_j move.
            let mut touch = |i: usize, dg: CMat| {
                if i == 0 || i >= n {
                    return;
                }
                for (b, f) in basis.iter().enumerate() {
                    let row = (i - 1) * m + b;
                    h[(row, col)] += scale_basis * inner_unchecked(f, &dg, kappa) / (n as f64);
                }
            };
            touch(j - 1, -(&d_prev) * c(gscale, 0.0));
            touch(j, (&d_prev - &d_here) * c(gscale, 0.0));
            touch(j + 1, &d_here * c(gscale, 0.0));
        }
    }
    let sym = (&h + h.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    let threshold = 1e-6 * n as f64;
    let negative = eig.iter().filter(|v| **v < -threshold).count();
    let near_zero = eig.iter().filter(|v| v.abs() <= threshold).count();
    let smallest = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let warning = match expected_null {
        Some(e) if near_zero > e => Some(format!(
            "{near_zero} eigenvalues within {threshold:e} of zero, expected {e}; refine N"
        )),
        _ => None,
    };
    Ok(HessianReport {
        negative,
        near_zero,
        expected_null,
        threshold,
        smallest,
        warning,
    })
}

/// Real dimension of the conjugation orbit of `exp(2 pi i t diag(d))`.
pub fn orbit_dimension(d: &WeightVector) -> usize {
    let a = d.as_slice();
    let mut dim = 0;
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            if a[i] != a[j] {
                dim += 2;
            }
        }
    }
    dim
}
