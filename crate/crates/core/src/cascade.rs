//! Morse-Bott cascade complexes on two-dimensional model manifolds, and the symbolic
//! perfect complex of the loop-space critical structure for small rank.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loopspace::{calibrated_index, enumerate_low_index_weights, WeightVector};

/// Torus points are `(theta, phi, 0)` in `[0, 1)^2`; sphere points are unit vectors.
pub type Point = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    FlatTorus,
    RoundSphere,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    /// `h = cos(2 pi theta)` on the flat torus; max circle `theta = 0`, min circle `theta = 1/2`.
    Torus,
    /// Height `h = z` on the round sphere; two nondegenerate points.
    SpherePerfect,
    /// `h = z^2` on the round sphere; poles are maxima, the equator is the minimum circle.
    SphereEquator,
}

impl Builtin {
    pub const ALL: [Builtin; 3] = [Builtin::Torus, Builtin::SpherePerfect, Builtin::SphereEquator];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Torus => "torus",
            Builtin::SpherePerfect => "sphere-perfect",
            Builtin::SphereEquator => "sphere-equator",
        }
    }

    /// Mod-2 Betti numbers of the underlying manifold.
    pub fn singular_betti(self) -> Vec<usize> {
        match self {
            Builtin::Torus => vec![1, 2, 1],
            Builtin::SpherePerfect | Builtin::SphereEquator => vec![1, 0, 1],
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown problem '{s}' (torus, sphere-perfect, sphere-equator)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Point { at: Point },
    /// Torus circle `theta = const`, coordinate `phi`.
    TorusCircle { theta: f64 },
    /// Sphere equator, coordinate `atan2(y, x) / 2 pi`.
    Equator,
}

/// Critical point of an auxiliary function, by circle coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuxPoint {
    pub coord: f64,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalManifold {
    pub shape: Shape,
    pub level: f64,
    pub ind_mb: usize,
    /// `aux = cos(2 pi (s - aux_phase))` on circles; maximum at the phase.
    pub aux_phase: f64,
    pub aux_points: Vec<AuxPoint>,
}

impl CriticalManifold {
    fn point(at: Point, level: f64, ind_mb: usize) -> Self {
        CriticalManifold {
            shape: Shape::Point { at },
            level,
            ind_mb,
            aux_phase: 0.0,
            aux_points: vec![AuxPoint { coord: 0.0, index: 0 }],
        }
    }

    fn circle(shape: Shape, level: f64, ind_mb: usize, aux_phase: f64) -> Self {
        CriticalManifold {
            shape,
            level,
            ind_mb,
            aux_phase,
            aux_points: vec![
                AuxPoint {
                    coord: wrap01(aux_phase + 0.5),
                    index: 0,
                },
                AuxPoint {
                    coord: wrap01(aux_phase),
                    index: 1,
                },
            ],
        }
    }

    pub fn is_circle(&self) -> bool {
        !matches!(self.shape, Shape::Point { .. })
    }

    fn distance(&self, x: &Point) -> f64 {
        match self.shape {
            Shape::Point { at } => dist3(&at, x),
            Shape::TorusCircle { theta } => wrap_signed(x[0] - theta).abs(),
            Shape::Equator => x[2].abs(),
        }
    }

    /// Circle coordinate of a point on or near the manifold.
    fn coord(&self, x: &Point) -> f64 {
        match self.shape {
            Shape::Point { .. } => 0.0,
            Shape::TorusCircle { .. } => wrap01(x[1]),
            Shape::Equator => wrap01(x[1].atan2(x[0]) / (2.0 * PI)),
        }
    }

    fn at_coord(&self, s: f64) -> Point {
        match self.shape {
            Shape::Point { at } => at,
            Shape::TorusCircle { theta } => [theta, wrap01(s), 0.0],
            Shape::Equator => {
                let a = 2.0 * PI * s;
                [a.cos(), a.sin(), 0.0]
            }
        }
    }

    fn aux_derivative(&self, s: f64) -> f64 {
        -2.0 * PI * (2.0 * PI * (s - self.aux_phase)).sin()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseBottProblem {
    pub builtin: Builtin,
    pub model: Model,
    pub critical: Vec<CriticalManifold>,
    pub grad_tol: f64,
    pub arc_cap: f64,
    /// Samples along one-parameter shooting families.
    pub shooting_samples: usize,
}

/// Critical point `aux_points[aux]` of manifold `manifold`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub manifold: usize,
    pub aux: usize,
    pub degree: usize,
}

fn wrap01(x: f64) -> f64 {
    x - x.floor()
}

fn wrap_signed(x: f64) -> f64 {
    x - x.round()
}

fn dist3(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

impl MorseBottProblem {
    pub fn builtin(b: Builtin) -> Self {
        let critical = match b {
            Builtin::Torus => vec![
                CriticalManifold::circle(Shape::TorusCircle { theta: 0.0 }, 1.0, 1, 0.0),
                CriticalManifold::circle(Shape::TorusCircle { theta: 0.5 }, -1.0, 0, 0.0),
            ],
            Builtin::SpherePerfect => vec![
                CriticalManifold::point([0.0, 0.0, 1.0], 1.0, 2),
                CriticalManifold::point([0.0, 0.0, -1.0], -1.0, 0),
            ],
            Builtin::SphereEquator => vec![
                CriticalManifold::point([0.0, 0.0, 1.0], 1.0, 2),
                CriticalManifold::point([0.0, 0.0, -1.0], 1.0, 2),
                CriticalManifold::circle(Shape::Equator, 0.0, 0, 0.0),
            ],
        };
        MorseBottProblem {
            builtin: b,
            model: match b {
                Builtin::Torus => Model::FlatTorus,
                _ => Model::RoundSphere,
            },
            critical,
            grad_tol: 1e-8,
            arc_cap: 50.0,
            shooting_samples: 128,
        }
    }

    pub fn h(&self, x: &Point) -> f64 {
        match self.builtin {
            Builtin::Torus => (2.0 * PI * x[0]).cos(),
            Builtin::SpherePerfect => x[2],
            Builtin::SphereEquator => x[2] * x[2],
        }
    }

    pub fn grad(&self, x: &Point) -> Point {
        match self.builtin {
            Builtin::Torus => [-2.0 * PI * (2.0 * PI * x[0]).sin(), 0.0, 0.0],
            Builtin::SpherePerfect | Builtin::SphereEquator => {
                let scale = if self.builtin == Builtin::SpherePerfect {
                    1.0
                } else {
                    2.0 * x[2]
                };
                [-scale * x[2] * x[0], -scale * x[2] * x[1], scale * (1.0 - x[2] * x[2])]
            }
        }
    }

    fn retract(&self, x: Point) -> Point {
        match self.model {
            Model::FlatTorus => [wrap01(x[0]), wrap01(x[1]), 0.0],
            Model::RoundSphere => {
                let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                [x[0] / n, x[1] / n, x[2] / n]
            }
        }
    }

    pub fn generators(&self) -> Vec<Generator> {
        let mut out = Vec::new();
        for (m, c) in self.critical.iter().enumerate() {
            for (a, p) in c.aux_points.iter().enumerate() {
                out.push(Generator {
                    manifold: m,
                    aux: a,
                    degree: c.ind_mb + p.index,
                });
            }
        }
        out.sort_by_key(|g| (g.degree, g.manifold, g.aux));
        out
    }

    pub fn generator_point(&self, g: &Generator) -> Point {
        let c = &self.critical[g.manifold];
        c.at_coord(c.aux_points[g.aux].coord)
    }

    fn nearest_manifold(&self, x: &Point, tol: f64) -> Option<usize> {
        self.critical
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.distance(x)))
            .filter(|(_, d)| *d < tol)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }

    /// `h` is critical exactly on the listed manifolds and each aux is Morse with the
    /// listed indices.
    pub fn validate(&self) -> Result<()> {
        let grid = 60;
        for a in 0..grid {
            for b in 0..grid {
                let (s, t) = ((a as f64 + 0.37) / grid as f64, (b as f64 + 0.11) / grid as f64);
                let x = match self.model {
                    Model::FlatTorus => [s, t, 0.0],
                    Model::RoundSphere => {
                        let z = 2.0 * s - 1.0;
                        let r = (1.0 - z * z).sqrt();
                        [r * (2.0 * PI * t).cos(), r * (2.0 * PI * t).sin(), z]
                    }
                };
                let g = norm3(&self.grad(&x));
                let near = self.nearest_manifold(&x, 0.05).is_some();
                if g < 1e-3 && !near {
                    return Err(Error::Validation(format!("unlisted critical point near {x:?}")));
                }
            }
        }
        for c in &self.critical {
            let samples: Vec<f64> = if c.is_circle() {
                (0..16).map(|k| k as f64 / 16.0).collect()
            } else {
                vec![0.0]
            };
            for s in samples {
                let x = c.at_coord(s);
                if norm3(&self.grad(&x)) > 1e-12 || (self.h(&x) - c.level).abs() > 1e-12 {
                    return Err(Error::Validation("listed manifold is not critical".into()));
                }
            }
            if c.is_circle() {
                for p in &c.aux_points {
                    let second = -(2.0 * PI).powi(2) * (2.0 * PI * (p.coord - c.aux_phase)).cos();
                    let index = usize::from(second < 0.0);
                    if c.aux_derivative(p.coord).abs() > 1e-12 || index != p.index {
                        return Err(Error::Validation("aux critical data inconsistent".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

fn norm3(x: &Point) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// Sampled trajectory of `-grad h` (`direction = -1` follows `+grad h`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<Point>,
    pub values: Vec<f64>,
    pub length: f64,
    pub arrival: Option<usize>,
}

impl Trajectory {
    pub fn end(&self) -> Point {
        *self.points.last().expect("trajectory has a start point")
    }

    /// Strict decrease of `h` between samples (increase for `direction = -1`), up to
    /// rounding once the trajectory has settled next to the critical set.
    pub fn is_strictly_monotone(&self, direction: i32) -> bool {
        let s = if direction >= 0 { 1.0 } else { -1.0 };
        self.values.windows(2).all(|w| {
            let step = s * (w[1] - w[0]);
            step < 0.0 || step.abs() <= 4.0 * f64::EPSILON * w[0].abs().max(1.0)
        })
    }
}

/// Adaptive RK4 (step doubling) until `|grad h| < grad_tol` or the arc-length cap.
pub fn gradient_trajectory(problem: &MorseBottProblem, x0: Point, direction: i32) -> Result<Trajectory> {
    let s = if direction >= 0 { -1.0 } else { 1.0 };
    let field = |x: &Point| {
        let g = problem.grad(x);
        [s * g[0], s * g[1], s * g[2]]
    };
    let rk4 = |x: &Point, dt: f64| -> Point {
        let add = |a: &Point, b: &Point, t: f64| [a[0] + t * b[0], a[1] + t * b[1], a[2] + t * b[2]];
        let k1 = field(x);
        let k2 = field(&add(x, &k1, dt / 2.0));
        let k3 = field(&add(x, &k2, dt / 2.0));
        let k4 = field(&add(x, &k3, dt));
        let mut out = *x;
        for i in 0..3 {
            out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        problem.retract(out)
    };
    let mut x = problem.retract(x0);
    let mut traj = Trajectory {
        points: vec![x],
        values: vec![problem.h(&x)],
        length: 0.0,
        arrival: None,
    };
    let mut dt = 0.01;
    loop {
        let g = norm3(&problem.grad(&x));
        if g < problem.grad_tol {
            traj.arrival = problem.nearest_manifold(&x, 1e-3);
            if traj.arrival.is_none() {
                return Err(Error::NotConverged(format!("stalled off the critical set at {x:?}")));
            }
            return Ok(traj);
        }
        if traj.length > problem.arc_cap {
            return Err(Error::NotConverged(format!(
                "arc length cap {} exceeded from {x0:?}",
                problem.arc_cap
            )));
        }
        // step doubling error control, in the ambient coordinates
        loop {
            let full = rk4(&x, dt);
            let half = rk4(&rk4(&x, dt / 2.0), dt / 2.0);
            let err = match problem.model {
                Model::FlatTorus => wrap_signed(full[0] - half[0]).hypot(wrap_signed(full[1] - half[1])),
                Model::RoundSphere => dist3(&full, &half),
            };
            if err < 1e-10 || dt < 1e-8 {
                let step = match problem.model {
                    Model::FlatTorus => wrap_signed(half[0] - x[0]).hypot(wrap_signed(half[1] - x[1])),
                    Model::RoundSphere => dist3(&half, &x),
                };
                x = half;
                traj.length += step;
                traj.points.push(x);
                traj.values.push(problem.h(&x));
                if err < 1e-12 {
                    dt = (dt * 2.0).min(1.0);
                }
                break;
            }
            dt /= 2.0;
        }
    }
}

/// Descend `aux` on a circle manifold from coordinate `s`; returns the limiting aux point.
fn aux_descend(c: &CriticalManifold, s: f64) -> usize {
    let mut x = s;
    for _ in 0..100_000 {
        let d = c.aux_derivative(x);
        if d.abs() < 1e-12 {
            break;
        }
        x -= 0.01 * d;
    }
    let x = wrap01(x);
    c.aux_points
        .iter()
        .enumerate()
        .min_by(|a, b| wrap_signed(a.1.coord - x).abs().total_cmp(&wrap_signed(b.1.coord - x).abs()))
        .map(|(i, _)| i)
        .expect("circle has aux points")
}

const SHOOT_EPS: f64 = 1e-6;

/// Starting point displaced from manifold point `base` into the descending normal
/// direction `param` (a sign for circles, an angle in `[0, 1)` for points).
fn shoot_start(problem: &MorseBottProblem, c: &CriticalManifold, base: &Point, param: f64) -> Point {
    match (problem.model, c.shape) {
        (Model::FlatTorus, _) => [wrap01(base[0] + param.signum() * SHOOT_EPS), base[1], 0.0],
        (Model::RoundSphere, Shape::Point { at }) => {
            let a = 2.0 * PI * param;
            let z = at[2].signum() * (1.0 - SHOOT_EPS * SHOOT_EPS).sqrt();
            [SHOOT_EPS * a.cos(), SHOOT_EPS * a.sin(), z]
        }
        (Model::RoundSphere, _) => {
            let v = [base[0], base[1], base[2] + param.signum() * SHOOT_EPS];
            problem.retract(v)
        }
    }
}

/// Where a shot ends: manifold, coordinate there, and limiting aux point.
fn land(problem: &MorseBottProblem, start: Point) -> Result<(usize, f64, usize)> {
    let t = gradient_trajectory(problem, start, 1)?;
    let m = t.arrival.expect("converged trajectories have an arrival");
    let c = &problem.critical[m];
    let s = c.coord(&t.end());
    let aux = if c.is_circle() { aux_descend(c, s) } else { 0 };
    Ok((m, s, aux))
}

/// Mod-2 count of cascade lines from `p` to `q` (`deg p = deg q + 1`).
pub fn count_cascades(problem: &MorseBottProblem, p: &Generator, q: &Generator) -> Result<u8> {
    if p.degree != q.degree + 1 {
        return Err(Error::Precondition(format!(
            "degrees {} and {} do not differ by one",
            p.degree, q.degree
        )));
    }
    let cp = &problem.critical[p.manifold];
    let cq = &problem.critical[q.manifold];
    if p.manifold == q.manifold {
        // flow lines of aux alone
        if !cp.is_circle() {
            return Ok(0);
        }
        let s = cp.aux_points[p.aux].coord;
        let hits = [-1.0, 1.0]
            .iter()
            .filter(|sign| aux_descend(cp, s + *sign * SHOOT_EPS) == q.aux)
            .count();
        return Ok((hits % 2) as u8);
    }
    if cp.level <= cq.level {
        return Ok(0);
    }
    let base = cp.at_coord(cp.aux_points[p.aux].coord);
    let aux_index = cp.aux_points[p.aux].index;
    // finite shooting sets
    if cp.is_circle() && cp.ind_mb == 1 && aux_index == 0 {
        let mut hits = 0;
        for sign in [-1.0, 1.0] {
            let (m, _, a) = land(problem, shoot_start(problem, cp, &base, sign))?;
            if m == q.manifold && a == q.aux {
                hits += 1;
            }
        }
        return Ok((hits % 2) as u8);
    }
    // one-parameter families; the target must have a point stable set on a circle
    let family: Vec<(Point, f64)> = if !cp.is_circle() && cp.ind_mb == 2 {
        let n = problem.shooting_samples;
        (0..n).map(|k| (base, k as f64 / n as f64)).collect()
    } else if cp.is_circle() && cp.ind_mb == 1 && aux_index == 1 {
        // the aux-unstable set of p is the circle minus the aux minimum
        let n = problem.shooting_samples;
        let start = cp.aux_points.iter().find(|a| a.index == 0).map(|a| a.coord).unwrap_or(0.0);
        let mut out = Vec::with_capacity(2 * n);
        for sign in [-1.0, 1.0] {
            for k in 1..n {
                out.push((cp.at_coord(start + k as f64 / n as f64), sign));
            }
        }
        out
    } else {
        return Err(Error::Precondition(format!(
            "shooting from a manifold of dimension {} and index {} is not implemented",
            usize::from(cp.is_circle()),
            cp.ind_mb
        )));
    };
    if !(cq.is_circle() && cq.aux_points[q.aux].index == 1) {
        return Err(Error::Precondition(
            "one-parameter shooting needs a target with a point stable set".into(),
        ));
    }
    let target = cq.aux_points[q.aux].coord;
    let periodic = !cp.is_circle();
    let offsets: Vec<Option<f64>> = family
        .iter()
        .map(|(b, param)| {
            land(problem, shoot_start(problem, cp, b, *param))
                .map(|(m, s, _)| (m == q.manifold).then(|| wrap_signed(s - target)))
        })
        .collect::<Result<_>>()?;
    let n = offsets.len();
    let pairs: Vec<(usize, usize)> = if periodic {
        (0..n).map(|i| (i, (i + 1) % n)).collect()
    } else {
        let half = n / 2;
        (0..n - 1).filter(|i| i + 1 != half).map(|i| (i, i + 1)).collect()
    };
    let mut crossings = 0usize;
    for (i, j) in pairs {
        if let (Some(a), Some(b)) = (offsets[i], offsets[j]) {
            if a.abs() < 1e-9 && b.abs() < 1e-9 {
                return Err(Error::Resolution(format!(
                    "non-isolated landing on generator {q:?}; refine the shooting grid"
                )));
            }
            if a.signum() != b.signum() && a.abs() + b.abs() < 0.25 {
                crossings += 1;
            }
        }
    }
    Ok((crossings % 2) as u8)
}

/// Generators, grading, mod-2 differential and homology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeComplexData {
    pub labels: Vec<String>,
    pub degrees: Vec<usize>,
    /// `differential[i][j]` is the coefficient of generator `j` in `d(generator i)`.
    pub differential: Vec<Vec<u8>>,
    pub betti: Vec<usize>,
}

impl CascadeComplexData {
    fn from_parts(labels: Vec<String>, degrees: Vec<usize>, differential: Vec<Vec<u8>>) -> Result<Self> {
        let n = labels.len();
        for i in 0..n {
            for k in 0..n {
                let mut acc = 0u8;
                for j in 0..n {
                    acc ^= differential[i][j] & differential[j][k];
                }
                if acc != 0 {
                    return Err(Error::BoundarySquare { degree: degrees[i] });
                }
            }
            for j in 0..n {
                if differential[i][j] != 0 && degrees[i] != degrees[j] + 1 {
                    return Err(Error::Precondition("differential does not lower degree by one".into()));
                }
            }
        }
        let top = degrees.iter().copied().max().unwrap_or(0);
        let rank_of = |deg: usize| -> usize {
            // rank of d: C_deg -> C_{deg-1}
            let rows: Vec<Vec<u8>> = (0..n).filter(|i| degrees[*i] == deg).map(|i| differential[i].clone()).collect();
            gf2_rank(rows)
        };
        let betti = (0..=top)
            .map(|k| {
                let count = degrees.iter().filter(|d| **d == k).count();
                count - rank_of(k) - if k < top { rank_of(k + 1) } else { 0 }
            })
            .collect();
        Ok(CascadeComplexData {
            labels,
            degrees,
            differential,
            betti,
        })
    }

    pub fn generators_in_degree(&self, k: usize) -> usize {
        self.degrees.iter().filter(|d| **d == k).count()
    }
}

pub fn gf2_rank(mut rows: Vec<Vec<u8>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        if let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] & 1 == 1) {
            rows.swap(rank, pivot);
            for r in 0..rows.len() {
                if r != rank && rows[r][col] & 1 == 1 {
                    let pr = rows[rank].clone();
                    for (x, y) in rows[r].iter_mut().zip(pr) {
                        *x ^= y;
                    }
                }
            }
            rank += 1;
        }
    }
    rank
}

/// Full complex of a built-in problem.
pub fn cascade_complex(problem: &MorseBottProblem) -> Result<CascadeComplexData> {
    problem.validate()?;
    let gens = problem.generators();
    let n = gens.len();
    let mut d = vec![vec![0u8; n]; n];
    for i in 0..n {
        for j in 0..n {
            if gens[i].degree == gens[j].degree + 1 {
                d[i][j] = count_cascades(problem, &gens[i], &gens[j])?;
            }
        }
    }
    let labels = gens
        .iter()
        .map(|g| {
            let c = &problem.critical[g.manifold];
            format!("C{}[{}] aux {:.2}", g.manifold, c.ind_mb, c.aux_points[g.aux].coord)
        })
        .collect();
    CascadeComplexData::from_parts(labels, gens.iter().map(|g| g.degree).collect(), d)
}

pub fn cascade_homology(problem: &MorseBottProblem) -> Result<Vec<usize>> {
    Ok(cascade_complex(problem)?.betti)
}

/// Coefficients of the Gaussian multinomial `[r; m_1, .., m_k]_q`, i.e. the number of
/// Schubert cells of each complex dimension in `U(r) / (U(m_1) x .. x U(m_k))`.
pub fn q_multinomial(parts: &[usize]) -> Vec<usize> {
    // product over j of [1 + q + .. + q^{j-1}] for j up to r, divided by the same for each part
    let q_factorial = |n: usize| -> Vec<i64> {
        let mut p = vec![1i64];
        for j in 1..=n {
            let mut next = vec![0i64; p.len() + j - 1];
            for (a, &x) in p.iter().enumerate() {
                for b in 0..j {
                    next[a + b] += x;
                }
            }
            p = next;
        }
        p
    };
    let r: usize = parts.iter().sum();
    let mut num = q_factorial(r);
    for &m in parts {
        let den = q_factorial(m);
        // exact polynomial division by a monic polynomial with constant term 1
        let mut quotient = vec![0i64; num.len() - den.len() + 1];
        for k in (0..quotient.len()).rev() {
            let coef = num[k + den.len() - 1] / den[den.len() - 1];
            quotient[k] = coef;
            for (t, &dv) in den.iter().enumerate() {
                num[k + t] -= coef * dv;
            }
        }
        debug_assert!(num.iter().all(|&x| x == 0));
        num = quotient;
    }
    num.into_iter().map(|x| x as usize).collect()
}

/// Multiplicities of the distinct entries of `d`.
pub fn multiplicities(d: &WeightVector) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    let s = d.as_slice();
    let mut i = 0;
    while i < s.len() {
        let mut j = i;
        while j < s.len() && s[j] == s[i] {
            j += 1;
        }
        out.push(j - i);
        i = j;
    }
    out
}

/// Symbolic complex: one generator per Schubert cell of each critical flag manifold,
/// graded by index plus real cell dimension; zero differential.
pub fn perfect_complex_for_weights(r: usize, index_bound: usize) -> Result<CascadeComplexData> {
    if r == 0 || r > 3 {
        return Err(Error::Validation(format!("perfect complex tabulated for rank 1..=3, got {r}")));
    }
    let mut labels = Vec::new();
    let mut degrees = Vec::new();
    for d in enumerate_low_index_weights(r, index_bound) {
        let index = calibrated_index(&d) as usize;
        for (cdim, count) in q_multinomial(&multiplicities(&d)).into_iter().enumerate() {
            for k in 0..count {
                labels.push(format!("{d} cell {} #{k}", 2 * cdim));
                degrees.push(index + 2 * cdim);
            }
        }
    }
    let n = labels.len();
    CascadeComplexData::from_parts(labels, degrees, vec![vec![0; n]; n])
}
