//! Negative gradient flow of the loop energy and extraction of limiting weights.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, op_norm, CMat, I};
use crate::loopspace::{
    energy_from_increments, gradient_from_increments, DiscreteLoop, LoopTangent, WeightVector,
    ADJACENT_LIMIT,
};

/// Metric in which the gradient is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowMetric {
    /// Plain L^2 gradient. Stable steps scale like `1 / N^2`.
    L2,
    /// L^2 gradient smoothed by the inverse (Dirichlet) Laplacian on the based
    /// tangent space; steps of order one are stable for any `N`.
    Sobolev,
    /// Half-derivative metric `sum |n| |xi_n|^2` (the Kahler metric of the loop
    /// Grassmannian). Its continuum flow preserves Birkhoff strata. Stable steps
    /// scale like `1 / N`.
    Kahler,
}

impl std::str::FromStr for FlowMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" => Ok(FlowMetric::L2),
            "sobolev" | "h1" => Ok(FlowMetric::Sobolev),
            "kahler" => Ok(FlowMetric::Kahler),
            other => Err(Error::Argument(format!("unknown flow metric '{other}' (l2, sobolev, kahler)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub step_size: f64,
    pub max_steps: usize,
    pub grad_tol: f64,
    pub snap_tol: f64,
    pub adaptive: bool,
    #[serde(default = "default_metric")]
    pub metric: FlowMetric,
}

fn default_metric() -> FlowMetric {
    FlowMetric::Sobolev
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            step_size: 0.5,
            max_steps: 4000,
            grad_tol: 1e-6,
            snap_tol: 0.05,
            adaptive: true,
            metric: FlowMetric::Sobolev,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) {
            return Err(Error::Validation("step size must be positive".into()));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::Validation("gradient tolerance must be positive".into()));
        }
        if !(self.snap_tol > 0.0 && self.snap_tol < 0.5) {
            return Err(Error::Validation("snap tolerance must lie in (0, 0.5)".into()));
        }
        Ok(())
    }

    /// L^2 configuration with the largest step that is stable at `n` samples.
    pub fn l2_for(n: usize) -> Self {
        FlowConfig {
            step_size: 0.9 * PI * PI / (n * n) as f64,
            max_steps: 40 * n * n,
            metric: FlowMetric::L2,
            ..FlowConfig::default()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowTrace {
    pub energies: Vec<f64>,
    pub final_loop: DiscreteLoop,
    pub steps_taken: usize,
    pub converged: bool,
    pub final_grad_norm: f64,
}

impl FlowTrace {
    pub fn final_energy(&self) -> f64 {
        *self.energies.last().unwrap_or(&0.0)
    }

    pub fn is_monotone(&self) -> bool {
        self.energies.windows(2).all(|w| w[1] <= w[0] + 1e-12)
    }
}

/// Descent direction for the chosen metric.
fn direction(grad: &LoopTangent, metric: FlowMetric) -> LoopTangent {
    match metric {
        FlowMetric::L2 => grad.clone(),
        FlowMetric::Sobolev => sobolev_smooth(grad),
        FlowMetric::Kahler => kahler_smooth(grad),
    }
}

/// Largest step that keeps the explicit scheme contractive for the metric.
fn step_cap(metric: FlowMetric, n: usize) -> f64 {
    match metric {
        FlowMetric::Kahler => 1.9 * PI / n as f64,
        _ => f64::INFINITY,
    }
}

/// Divide Fourier mode `n` of the periodic gradient by `2 (N/pi) sin(pi |n| / N)`
/// and rebase. The periodic gradient has the basepoint entry
/// `G_0 = (N^2 / 2 pi^2)(X_{N-1} - X_0)`, recovered from the sum rule.
fn kahler_smooth(grad: &LoopTangent) -> LoopTangent {
    let n = grad.fields.len();
    let r = grad.fields[0].nrows();
    let mut full = grad.fields.clone();
    let mut total = CMat::zeros(r, r);
    for g in grad.fields.iter().skip(1) {
        total += g;
    }
    full[0] = -total;
    let twiddle: Vec<num_complex::Complex64> =
        (0..n).map(|j| c(0.0, -2.0 * PI * j as f64 / n as f64).exp()).collect();
    let mut modes = vec![CMat::zeros(r, r); n];
    for (k, mode) in modes.iter_mut().enumerate().skip(1) {
        let mut acc = CMat::zeros(r, r);
        for (j, f) in full.iter().enumerate() {
            acc += f * twiddle[(j * k) % n];
        }
        let s = (n as f64 / PI) * (PI * k as f64 / n as f64).sin();
        *mode = acc / c(2.0 * s * n as f64, 0.0);
    }
    let mut out = vec![CMat::zeros(r, r); n];
    for (j, o) in out.iter_mut().enumerate() {
        let mut acc = CMat::zeros(r, r);
        for (k, mode) in modes.iter().enumerate().skip(1) {
            acc += mode * twiddle[(j * k) % n].conj();
        }
        *o = acc;
    }
    let base = out[0].clone();
    for o in out.iter_mut() {
        *o -= &base;
        *o = crate::linalg::skew_part(o);
    }
    LoopTangent { fields: out }
}

/// Solve `N^2 (2 y_k - y_{k-1} - y_{k+1}) = 2 pi^2 g_k` for `k = 1..N-1` with
/// `y_0 = y_N = 0`, entrywise (Thomas algorithm on the constant tridiagonal).
fn sobolev_smooth(grad: &LoopTangent) -> LoopTangent {
    let n = grad.fields.len();
    let r = grad.fields[0].nrows();
    let mut out = vec![CMat::zeros(r, r); n];
    if n < 3 {
        return LoopTangent { fields: out };
    }
    let m = n - 1;
    let scale = 2.0 * PI * PI / (n * n) as f64;
    // forward sweep coefficients for diag 2, off-diag -1
    let mut cp = vec![0.0; m];
    cp[0] = -0.5;
    for i in 1..m {
        cp[i] = -1.0 / (2.0 + cp[i - 1]);
    }
    let mut dp = vec![c(0.0, 0.0); m];
    for a in 0..r {
        for b in 0..r {
            dp[0] = grad.fields[1][(a, b)] * scale / 2.0;
            for i in 1..m {
                let denom = 2.0 + cp[i - 1];
                dp[i] = (grad.fields[i + 1][(a, b)] * scale + dp[i - 1]) / denom;
            }
            let mut y = dp[m - 1];
            out[m][(a, b)] = y;
            for i in (0..m - 1).rev() {
                y = dp[i] - cp[i] * y;
                out[i + 1][(a, b)] = y;
            }
        }
    }
    LoopTangent { fields: out }
}

/// Explicit descent `gamma <- gamma exp(-step * D)` with optional step halving.
pub fn run_flow(gamma0: &DiscreteLoop, cfg: &FlowConfig) -> Result<FlowTrace> {
    cfg.validate()?;
    gamma0.validate()?;
    let spec = gamma0.spec;
    let mut gamma = gamma0.clone();
    let mut incs = gamma.increments()?;
    let mut energy = energy_from_increments(&incs, spec.metric_scale);
    let mut grad = gradient_from_increments(&incs);
    let mut gnorm = grad.norm(&spec);
    let mut energies = vec![energy];
    let max_step = cfg.step_size.min(step_cap(cfg.metric, gamma.len()));
    let mut step = max_step;
    let mut steps = 0;
    let min_step = max_step * 1e-12;
    while gnorm >= cfg.grad_tol && steps < cfg.max_steps {
        let dir = direction(&grad, cfg.metric);
        let mut accepted = None;
        loop {
            let trial = gamma.retract(&dir.scaled(-step))?;
            let outcome = trial.increments().ok().and_then(|ti| {
                let far = ti.iter().map(op_norm).fold(0.0, f64::max);
                let e = energy_from_increments(&ti, spec.metric_scale);
                (far < ADJACENT_LIMIT && e <= energy + 1e-14 * (1.0 + energy)).then_some((ti, e))
            });
            match outcome {
                Some((ti, e)) => {
                    accepted = Some((trial, ti, e));
                    break;
                }
                None if cfg.adaptive && step > min_step => step *= 0.5,
                None => break,
            }
        }
        let Some((trial, ti, e)) = accepted else {
            if cfg.adaptive {
                // no admissible decrease at machine precision: the loop is as critical
                // as floating point allows
                break;
            }
            return Err(Error::Discretization(
                "fixed step raised the energy or broke sample adjacency; lower the step or refine N"
                    .into(),
            ));
        };
        gamma = trial;
        incs = ti;
        // monotone up to rounding; store the clamped value
        energy = e.min(energy);
        energies.push(energy);
        grad = gradient_from_increments(&incs);
        gnorm = grad.norm(&spec);
        steps += 1;
        if cfg.adaptive && step < max_step {
            step = (step * 1.5).min(max_step);
        }
    }
    let final_loop = DiscreteLoop::new_unchecked(spec, gamma.samples);
    Ok(FlowTrace {
        energies,
        final_loop,
        steps_taken: steps,
        converged: gnorm < cfg.grad_tol,
        final_grad_norm: gnorm,
    })
}

/// Weights of a (numerically) geodesic loop from its averaged logarithmic velocity.
pub fn extract_weights(gamma: &DiscreteLoop, snap_tol: f64) -> Result<WeightVector> {
    let n = gamma.len() as f64;
    let incs = gamma.increments()?;
    let r = gamma.rank();
    let mut mean = CMat::zeros(r, r);
    for x in &incs {
        mean += x * c(n, 0.0);
    }
    mean /= c(n, 0.0);
    let spread = incs
        .iter()
        .map(|x| op_norm(&(x * c(n, 0.0) - &mean)))
        .fold(0.0, f64::max);
    let scale = 2.0 * PI;
    if spread > scale * snap_tol {
        return Err(Error::NotConverged(format!(
            "logarithmic velocity varies by {spread:.3e} along the loop"
        )));
    }
    // mean = 2 pi i H with H Hermitian
    let h = (&mean * (-I)) / c(scale, 0.0);
    let h = (&h + h.adjoint()) * c(0.5, 0.0);
    let eig = h.symmetric_eigen().eigenvalues;
    let mut d = Vec::with_capacity(r);
    for v in eig.iter() {
        let snapped = v.round();
        if (v - snapped).abs() > snap_tol {
            return Err(Error::NotConverged(format!(
                "eigenvalue {v:.4} is not within {snap_tol} of an integer"
            )));
        }
        d.push(snapped as i64);
    }
    Ok(WeightVector::new(d))
}

/// Outcome of flowing one loop to its limit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowOutcome {
    pub weights: WeightVector,
    pub energy: f64,
    pub start_energy: f64,
    pub steps: usize,
    pub monotone: bool,
}

/// Flow a single loop and snap its limit.
pub fn flow_to_weights(gamma: &DiscreteLoop, cfg: &FlowConfig) -> Result<FlowOutcome> {
    let trace = run_flow(gamma, cfg)?;
    if !trace.converged {
        return Err(Error::NotConverged(format!(
            "gradient norm {:.3e} after {} steps",
            trace.final_grad_norm, trace.steps_taken
        )));
    }
    let weights = extract_weights(&trace.final_loop, cfg.snap_tol)?;
    Ok(FlowOutcome {
        energy: trace.final_energy(),
        start_energy: trace.energies[0],
        steps: trace.steps_taken,
        monotone: trace.is_monotone(),
        weights,
    })
}

/// Per-sample `(weights, sum d_i^2)`; failures are kept per sample.
pub fn energy_profile_of_family(
    family: &[DiscreteLoop],
    cfg: &FlowConfig,
) -> Vec<Result<(WeightVector, i64)>> {
    family
        .par_iter()
        .map(|g| {
            let out = flow_to_weights(g, cfg)?;
            let e = out.weights.energy();
            Ok((out.weights, e))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liegroup::GroupSpec;
    use crate::linalg::{identity, random_unitary};
    use crate::loopspace::{energy_gradient, geodesic_loop, loop_energy};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn wv(d: &[i64]) -> WeightVector {
        WeightVector::new(d.to_vec())
    }

    #[test]
    fn sobolev_direction_inverts_the_laplacian() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = GroupSpec::unitary(2);
        let g = LoopTangent::random(&spec, 12, &mut rng);
        let y = sobolev_smooth(&g);
        let n = 12usize;
        for k in 1..n {
            let next = if k + 1 == n { CMat::zeros(2, 2) } else { y.fields[k + 1].clone() };
            let lhs = (&y.fields[k] * c(2.0, 0.0) - &y.fields[k - 1] - next) * c((n * n) as f64, 0.0);
            let rhs = &g.fields[k] * c(2.0 * PI * PI, 0.0);
            assert!((lhs - rhs).norm() < 1e-10);
        }
        assert_eq!(y.fields[0].norm(), 0.0);
    }

    #[test]
    fn critical_start_does_not_move() {
        let g = geodesic_loop(&wv(&[1, -1]), &identity(2), 64, true).unwrap();
        let trace = run_flow(&g, &FlowConfig::default()).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.steps_taken, 0);
        assert!((trace.final_energy() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn small_perturbation_of_constant_flows_to_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let spec = GroupSpec::special_unitary(2);
        let start = DiscreteLoop::constant(spec, 32)
            .retract(&LoopTangent::random(&spec, 32, &mut rng).scaled(0.2))
            .unwrap();
        for cfg in [FlowConfig::default(), FlowConfig::l2_for(32)] {
            let trace = run_flow(&start, &cfg).unwrap();
            assert!(trace.converged, "{:?}", cfg.metric);
            assert!(trace.is_monotone());
            assert!(trace.final_energy() < 1e-6);
            assert_eq!(extract_weights(&trace.final_loop, 0.05).unwrap(), wv(&[0, 0]));
        }
    }

    #[test]
    fn perturbed_geodesic_returns_to_its_type_in_the_levi_directions() {
        // perturbations inside the maximal torus keep the type
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = geodesic_loop(&wv(&[2, -1]), &identity(2), 64, false).unwrap();
        let mut xi = LoopTangent::zero(64, 2);
        for (k, f) in xi.fields.iter_mut().enumerate().skip(1) {
            let t = k as f64 / 64.0;
            f[(0, 0)] = c(0.0, 0.3 * (2.0 * PI * t).sin() + 0.1 * rand::Rng::random::<f64>(&mut rng));
            f[(1, 1)] = c(0.0, 0.2 * (4.0 * PI * t).cos() - 0.2);
        }
        let start = g.retract(&xi).unwrap();
        let out = flow_to_weights(&start, &FlowConfig::default()).unwrap();
        assert_eq!(out.weights, wv(&[2, -1]));
        assert!((out.energy - 5.0).abs() < 1e-5);
    }

    #[test]
    fn extraction_inverts_construction() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q = random_unitary(3, &mut rng);
        let g = geodesic_loop(&wv(&[3, -1, -2]), &q, 512, true).unwrap();
        assert_eq!(extract_weights(&g, 0.05).unwrap(), wv(&[3, -1, -2]));
        let spec = GroupSpec::special_unitary(3);
        assert_eq!(
            extract_weights(&DiscreteLoop::constant(spec, 8), 0.05).unwrap(),
            wv(&[0, 0, 0])
        );
    }

    #[test]
    fn extraction_rejects_random_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spec = GroupSpec::special_unitary(2);
        let g = DiscreteLoop::constant(spec, 32)
            .retract(&LoopTangent::random(&spec, 32, &mut rng).scaled(1.0))
            .unwrap();
        assert!(matches!(extract_weights(&g, 0.05), Err(Error::NotConverged(_))));
    }

    #[test]
    fn family_profile_reports_each_sample() {
        let fam = vec![
            geodesic_loop(&wv(&[1, -1]), &identity(2), 64, true).unwrap(),
            geodesic_loop(&wv(&[2, -2]), &identity(2), 64, true).unwrap(),
            DiscreteLoop::constant(GroupSpec::special_unitary(2), 64),
        ];
        let prof = energy_profile_of_family(&fam, &FlowConfig::default());
        let e: Vec<i64> = prof.iter().map(|r| r.as_ref().unwrap().1).collect();
        assert_eq!(e, vec![2, 8, 0]);
    }

    #[test]
    fn limit_energy_matches_gradient_vanishing() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let spec = GroupSpec::unitary(3);
        let g = geodesic_loop(&wv(&[1, 1, 0]), &random_unitary(3, &mut rng), 48, false).unwrap();
        let start = g
            .retract(&LoopTangent::random(&spec, 48, &mut rng).scaled(0.05))
            .unwrap();
        let trace = run_flow(&start, &FlowConfig::default()).unwrap();
        assert!(trace.converged);
        assert!(energy_gradient(&trace.final_loop).unwrap().norm(&spec) < 1e-6);
        let d = extract_weights(&trace.final_loop, 0.05).unwrap();
        assert_eq!(d, wv(&[1, 1, 0]));
        assert!((loop_energy(&trace.final_loop).unwrap() - d.energy() as f64).abs() < 1e-5);
    }
}
