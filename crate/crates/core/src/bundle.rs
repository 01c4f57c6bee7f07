//! Unitary connections on rank-r bundles over the round two-sphere in two polar charts.
//!
//! Chart N uses colatitude `rho` in `[0, 0.6 pi]` from the north pole (the `0` pole of
//! the radial trivialization), chart S uses `sigma = pi - rho` in `[0, 0.6 pi]`; both
//! share the azimuth `theta`. Frames are related by `s_S = s_N g` on the overlap
//! annulus, so `A_S = g^{-1} A_N g + g^{-1} dg`. Rows of the two grids coincide on
//! the overlap.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liegroup::{inner_unchecked, GroupSpec};
use crate::linalg::{c, frob_norm_sq, identity, op_norm, skew_defect, unitary_defect, CMat, I};
use crate::loopspace::{remove_trace, DiscreteLoop, WeightVector};

pub const CAP: f64 = 0.6 * PI;
pub const OVERLAP_START: f64 = 0.4 * PI;
pub const GAUGE_TOL: f64 = 1e-5;
pub const TRANSPORT_TOL: f64 = 1e-6;
pub const CHERN_RESIDUE_TOL: f64 = 1e-3;
pub const CONDITION_CAP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    North,
    South,
}

impl Chart {
    pub const BOTH: [Chart; 2] = [Chart::North, Chart::South];

    /// Orientation of `(u, theta)` relative to the outward normal.
    fn orientation(self) -> f64 {
        match self {
            Chart::North => 1.0,
            Chart::South => -1.0,
        }
    }
}

/// Polar sample grid shared by both charts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub n_rho: usize,
    pub n_theta: usize,
}

impl Default for PolarGrid {
    fn default() -> Self {
        PolarGrid {
            n_rho: 145,
            n_theta: 64,
        }
    }
}

impl PolarGrid {
    /// `n_rho - 1` must be a multiple of 24 so that the overlap edge, the equator and
    /// the transport steps land on grid rows.
    pub fn new(n_rho: usize, n_theta: usize) -> Result<Self> {
        let g = PolarGrid { n_rho, n_theta };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rho < 25 || !(self.n_rho - 1).is_multiple_of(24) {
            return Err(Error::Validation(format!(
                "n_rho = {} must be 1 + a positive multiple of 24",
                self.n_rho
            )));
        }
        if self.n_theta < 8 || !self.n_theta.is_multiple_of(2) {
            return Err(Error::Validation(format!(
                "n_theta = {} must be even and at least 8",
                self.n_theta
            )));
        }
        Ok(())
    }

    pub fn delta(&self) -> f64 {
        CAP / (self.n_rho - 1) as f64
    }

    pub fn u(&self, i: usize) -> f64 {
        i as f64 * self.delta()
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_theta as f64
    }

    /// Row at `u = 0.4 pi`.
    pub fn overlap_row(&self) -> usize {
        2 * (self.n_rho - 1) / 3
    }

    /// Row at `u = pi / 2`.
    pub fn mid_row(&self) -> usize {
        5 * (self.n_rho - 1) / 6
    }

    /// South row matching north row `i` on the overlap.
    pub fn partner_row(&self, i: usize) -> usize {
        5 * (self.n_rho - 1) / 3 - i
    }

    pub fn len(&self) -> usize {
        self.n_rho * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_theta + j
    }

    /// Doubled resolution in both directions.
    pub fn refined(&self) -> PolarGrid {
        PolarGrid {
            n_rho: 2 * (self.n_rho - 1) + 1,
            n_theta: 2 * self.n_theta,
        }
    }
}

/// Round sphere of the given radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereMetric {
    pub radius: f64,
}

impl SphereMetric {
    pub fn round(radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Validation(format!("radius must be positive, got {radius}")));
        }
        Ok(SphereMetric { radius })
    }

    pub fn unit() -> Self {
        SphereMetric { radius: 1.0 }
    }

    pub fn area(&self) -> f64 {
        4.0 * PI * self.radius * self.radius
    }

    /// Area density `R^2 sin u` in polar coordinates.
    pub fn area_factor(&self, u: f64) -> f64 {
        self.radius * self.radius * u.sin()
    }

    /// Area density sampled on the rows of a grid (identical for both charts).
    pub fn conformal_factor(&self, grid: &PolarGrid) -> Vec<f64> {
        (0..grid.n_rho).map(|i| self.area_factor(grid.u(i))).collect()
    }
}

/// Potential components on one chart, indexed by `grid.idx(i, j)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChartField {
    #[serde(with = "crate::linalg::serde_cmat_vec")]
    pub a_u: Vec<CMat>,
    #[serde(with = "crate::linalg::serde_cmat_vec")]
    pub a_theta: Vec<CMat>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoChartConnection {
    pub spec: GroupSpec,
    pub grid: PolarGrid,
    pub north: ChartField,
    pub south: ChartField,
    /// `g` on north rows `overlap_row..n_rho`, indexed `(i - overlap_row) * n_theta + j`.
    #[serde(with = "crate::linalg::serde_cmat_vec")]
    pub transition: Vec<CMat>,
    #[serde(default)]
    pub label: Option<WeightVector>,
    #[serde(default)]
    pub convention: String,
    #[serde(default)]
    pub description: String,
}

impl TwoChartConnection {
    pub fn chart(&self, chart: Chart) -> &ChartField {
        match chart {
            Chart::North => &self.north,
            Chart::South => &self.south,
        }
    }

    pub fn transition_at(&self, i_north: usize, j: usize) -> &CMat {
        let ov = self.grid.overlap_row();
        &self.transition[(i_north - ov) * self.grid.n_theta + j]
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.grid.validate()?;
        let n = self.grid.len();
        let r = self.spec.rank;
        let rows = self.grid.n_rho - self.grid.overlap_row();
        for (name, field) in [("north", &self.north), ("south", &self.south)] {
            if field.a_u.len() != n || field.a_theta.len() != n {
                return Err(Error::InvalidConnection(format!("{name} chart has wrong sample count")));
            }
            for a in field.a_u.iter().chain(&field.a_theta) {
                if a.nrows() != r || a.ncols() != r {
                    return Err(Error::InvalidConnection("potential has wrong shape".into()));
                }
                if skew_defect(a) > 1e-8 * (1.0 + a.norm()) {
                    return Err(Error::InvalidConnection(format!(
                        "{name} potential is not skew-Hermitian"
                    )));
                }
            }
        }
        if self.transition.len() != rows * self.grid.n_theta {
            return Err(Error::InvalidConnection("transition has wrong sample count".into()));
        }
        for g in &self.transition {
            if g.nrows() != r || unitary_defect(g) > 1e-8 {
                return Err(Error::InvalidConnection("transition is not unitary".into()));
            }
        }
        let mismatch = self.gauge_mismatch();
        if mismatch > GAUGE_TOL {
            return Err(Error::InvalidConnection(format!(
                "potentials differ from the gauge action of the transition by {mismatch:e}"
            )));
        }
        Ok(())
    }

    /// Largest deviation from `A_S = g^{-1} A_N g + g^{-1} dg` on the overlap,
    /// relative to the potential scale.
    pub fn gauge_mismatch(&self) -> f64 {
        let grid = &self.grid;
        let ov = grid.overlap_row();
        let rows = grid.n_rho - ov;
        let nt = grid.n_theta;
        let h = grid.delta();
        let g_row = |k: usize| -> Vec<CMat> { self.transition[k * nt..(k + 1) * nt].to_vec() };
        let g_rho: Vec<Vec<CMat>> = {
            let cols: Vec<Vec<CMat>> = (0..nt)
                .map(|j| (0..rows).map(|k| self.transition[k * nt + j].clone()).collect())
                .collect();
            let dcols: Vec<Vec<CMat>> = cols.iter().map(|col| fd_derivative(col, h)).collect();
            (0..rows).map(|k| (0..nt).map(|j| dcols[j][k].clone()).collect()).collect()
        };
        let mut worst: f64 = 0.0;
        for k in 0..rows {
            let i = ov + k;
            let is = grid.partner_row(i);
            let gr = g_row(k);
            let g_theta = spectral_derivative(&gr);
            for j in 0..nt {
                let g = &gr[j];
                let gi = g.adjoint();
                let an_u = &self.north.a_u[grid.idx(i, j)];
                let an_t = &self.north.a_theta[grid.idx(i, j)];
                let exp_s_u = -(&gi * an_u * g + &gi * &g_rho[k][j]);
                let exp_s_t = &gi * an_t * g + &gi * &g_theta[j];
                let as_u = &self.south.a_u[grid.idx(is, j)];
                let as_t = &self.south.a_theta[grid.idx(is, j)];
                let scale = 1.0 + an_u.norm() + an_t.norm();
                worst = worst
                    .max((exp_s_u - as_u).norm() / scale)
                    .max((exp_s_t - as_t).norm() / scale);
            }
        }
        worst
    }
}

/// Fourth-order finite differences along a uniformly spaced column.
pub(crate) fn fd_derivative(f: &[CMat], h: f64) -> Vec<CMat> {
    let n = f.len();
    assert!(n >= 5, "need at least five samples");
    let s = c(1.0 / (12.0 * h), 0.0);
    (0..n)
        .map(|i| {
            let v = if i >= 2 && i + 2 < n {
                &f[i - 2] - &f[i - 1] * c(8.0, 0.0) + &f[i + 1] * c(8.0, 0.0) - &f[i + 2]
            } else if i == 0 {
                -&f[0] * c(25.0, 0.0) + &f[1] * c(48.0, 0.0) - &f[2] * c(36.0, 0.0)
                    + &f[3] * c(16.0, 0.0)
                    - &f[4] * c(3.0, 0.0)
            } else if i == 1 {
                -&f[0] * c(3.0, 0.0) - &f[1] * c(10.0, 0.0) + &f[2] * c(18.0, 0.0)
                    - &f[3] * c(6.0, 0.0)
                    + &f[4]
            } else if i == n - 1 {
                &f[n - 1] * c(25.0, 0.0) - &f[n - 2] * c(48.0, 0.0) + &f[n - 3] * c(36.0, 0.0)
                    - &f[n - 4] * c(16.0, 0.0)
                    + &f[n - 5] * c(3.0, 0.0)
            } else {
                &f[n - 1] * c(3.0, 0.0) + &f[n - 2] * c(10.0, 0.0) - &f[n - 3] * c(18.0, 0.0)
                    + &f[n - 4] * c(6.0, 0.0)
                    - &f[n - 5]
            };
            v * s
        })
        .collect()
}

/// Spectral derivative in `theta` of a periodic row.
pub(crate) fn spectral_derivative(row: &[CMat]) -> Vec<CMat> {
    let n = row.len();
    let (r, cc) = (row[0].nrows(), row[0].ncols());
    let tw: Vec<Complex64> = (0..n).map(|j| c(0.0, -2.0 * PI * j as f64 / n as f64).exp()).collect();
    let modes: Vec<CMat> = (0..n)
        .map(|k| {
            let kk = if k < n / 2 {
                k as f64
            } else if k == n / 2 {
                0.0
            } else {
                k as f64 - n as f64
            };
            if kk == 0.0 {
                return CMat::zeros(r, cc);
            }
            let mut acc = CMat::zeros(r, cc);
            for (j, f) in row.iter().enumerate() {
                acc += f * tw[(j * k) % n];
            }
            acc * c(0.0, kk / n as f64)
        })
        .collect();
    (0..n)
        .map(|j| {
            let mut acc = CMat::zeros(r, cc);
            for (k, m) in modes.iter().enumerate() {
                acc += m * tw[(j * k) % n].conj();
            }
            acc
        })
        .collect()
}

/// Curvature `F_{u theta}` per chart and grid point.
#[derive(Debug, Clone)]
pub struct CurvatureField {
    pub grid: PolarGrid,
    pub north: Vec<CMat>,
    pub south: Vec<CMat>,
}

impl CurvatureField {
    pub fn chart(&self, chart: Chart) -> &[CMat] {
        match chart {
            Chart::North => &self.north,
            Chart::South => &self.south,
        }
    }
}

fn chart_curvature(grid: &PolarGrid, field: &ChartField) -> Vec<CMat> {
    let (nr, nt) = (grid.n_rho, grid.n_theta);
    let h = grid.delta();
    let mut out = vec![CMat::zeros(0, 0); grid.len()];
    let mut d_u_at = vec![CMat::zeros(0, 0); grid.len()];
    for j in 0..nt {
        let col: Vec<CMat> = (0..nr).map(|i| field.a_theta[grid.idx(i, j)].clone()).collect();
        for (i, d) in fd_derivative(&col, h).into_iter().enumerate() {
            d_u_at[grid.idx(i, j)] = d;
        }
    }
    for i in 0..nr {
        let row: Vec<CMat> = (0..nt).map(|j| field.a_u[grid.idx(i, j)].clone()).collect();
        let d_t_au = spectral_derivative(&row);
        for j in 0..nt {
            let k = grid.idx(i, j);
            let au = &field.a_u[k];
            let at = &field.a_theta[k];
            out[k] = &d_u_at[k] - &d_t_au[j] + au * at - at * au;
        }
    }
    out
}

/// `F = d_u A_theta - d_theta A_u + [A_u, A_theta]` by fourth-order differences in `u`
/// and spectral differences in `theta`; checks chart agreement on the overlap.
pub fn curvature_field(a: &TwoChartConnection) -> Result<CurvatureField> {
    let grid = a.grid;
    let north = chart_curvature(&grid, &a.north);
    let south = chart_curvature(&grid, &a.south);
    let ov = grid.overlap_row();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    // skip the two outermost rows where one-sided stencils are used
    for i in ov..grid.n_rho - 2 {
        let is = grid.partner_row(i);
        if is + 2 >= grid.n_rho {
            continue;
        }
        for j in 0..grid.n_theta {
            let g = a.transition_at(i, j);
            let fn_ = &north[grid.idx(i, j)];
            let expected = -(g.adjoint() * fn_ * g);
            worst = worst.max((expected - &south[grid.idx(is, j)]).norm());
            scale = scale.max(fn_.norm());
        }
    }
    if worst > 1e-4 * (1.0 + scale) {
        return Err(Error::InvalidConnection(format!(
            "chart curvatures disagree on the overlap by {worst:e}"
        )));
    }
    Ok(CurvatureField { grid, north, south })
}

/// Partition of unity weight of the north chart at colatitude `rho`.
pub fn north_weight(rho: f64) -> f64 {
    if rho <= OVERLAP_START {
        1.0
    } else if rho >= CAP {
        0.0
    } else {
        let t = (rho - OVERLAP_START) / (CAP - OVERLAP_START);
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

fn chart_weight(chart: Chart, u: f64) -> f64 {
    match chart {
        Chart::North => north_weight(u),
        Chart::South => 1.0 - north_weight(PI - u),
    }
}

fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let w = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect()
}

/// `int ||F||^2 dvol`
pub fn ym_energy(a: &TwoChartConnection, g: &SphereMetric) -> Result<f64> {
    let f = curvature_field(a)?;
    Ok(ym_from_curvature(&f, a.spec.metric_scale, g))
}

fn ym_from_curvature(f: &CurvatureField, kappa: f64, g: &SphereMetric) -> f64 {
    let grid = f.grid;
    let sw = simpson_weights(grid.n_rho, grid.delta());
    let dtheta = 2.0 * PI / grid.n_theta as f64;
    let r2 = g.radius * g.radius;
    let mut total = 0.0;
    for chart in Chart::BOTH {
        let vals = f.chart(chart);
        for i in 1..grid.n_rho {
            let u = grid.u(i);
            let w = chart_weight(chart, u);
            if w == 0.0 {
                continue;
            }
            let row: f64 = (0..grid.n_theta)
                .map(|j| kappa * frob_norm_sq(&vals[grid.idx(i, j)]))
                .sum();
            total += sw[i] * w * row * dtheta / (r2 * u.sin());
        }
    }
    total
}

/// `sup |F(v, w)|` over unit bivectors, i.e. `max ||F_{u theta}||_op / (R^2 sin u)`.
pub fn curvature_sup_norm(a: &TwoChartConnection, g: &SphereMetric) -> Result<f64> {
    let f = curvature_field(a)?;
    Ok(sup_from_curvature(&f, g))
}

fn sup_from_curvature(f: &CurvatureField, g: &SphereMetric) -> f64 {
    let grid = f.grid;
    let mid = grid.mid_row();
    let mut best: f64 = 0.0;
    for chart in Chart::BOTH {
        let last = match chart {
            Chart::North => mid,
            Chart::South => mid - 1,
        };
        for i in 1..=last {
            let u = grid.u(i);
            for j in 0..grid.n_theta {
                let v = op_norm(&f.chart(chart)[grid.idx(i, j)]) / g.area_factor(u);
                best = best.max(v);
            }
        }
    }
    best
}

/// Unrounded `(i / 2 pi) int tr F`.
pub fn chern_integral(a: &TwoChartConnection) -> Result<f64> {
    let f = curvature_field(a)?;
    Ok(chern_from_curvature(&f))
}

fn chern_from_curvature(f: &CurvatureField) -> f64 {
    let grid = f.grid;
    let sw = simpson_weights(grid.n_rho, grid.delta());
    let dtheta = 2.0 * PI / grid.n_theta as f64;
    let mut total = c(0.0, 0.0);
    for chart in Chart::BOTH {
        for i in 0..grid.n_rho {
            let w = chart_weight(chart, grid.u(i));
            if w == 0.0 {
                continue;
            }
            let row: Complex64 = (0..grid.n_theta).map(|j| f.chart(chart)[grid.idx(i, j)].trace()).sum();
            total += row * c(sw[i] * w * dtheta * chart.orientation(), 0.0);
        }
    }
    (I * total / c(2.0 * PI, 0.0)).re
}

pub fn chern_number(a: &TwoChartConnection) -> Result<i64> {
    let x = chern_integral(a)?;
    let n = x.round();
    let residue = (x - n).abs();
    if residue >= CHERN_RESIDUE_TOL {
        return Err(Error::Quadrature { residue });
    }
    Ok(n as i64)
}

/// Transport `dv/du = -A_u v` along column `j` from row `from` to row `to` with RK4
/// steps of `stride` grid rows; returns the transport matrix.
fn transport(field: &ChartField, grid: &PolarGrid, j: usize, from: usize, to: usize, stride: usize) -> CMat {
    let r = field.a_u[0].nrows();
    let mut p = identity(r);
    let h = grid.delta() * stride as f64;
    let a = |i: usize| &field.a_u[grid.idx(i, j)];
    let mut i = from;
    let half = stride / 2;
    if to > from {
        while i < to {
            let (a0, a1, a2) = (a(i), a(i + half), a(i + stride));
            let k1 = -(a0 * &p);
            let k2 = -(a1 * (&p + &k1 * c(h / 2.0, 0.0)));
            let k3 = -(a1 * (&p + &k2 * c(h / 2.0, 0.0)));
            let k4 = -(a2 * (&p + &k3 * c(h, 0.0)));
            p += (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * c(h / 6.0, 0.0);
            i += stride;
        }
    } else {
        let h = -h;
        while i > to {
            let (a0, a1, a2) = (a(i), a(i - half), a(i - stride));
            let k1 = -(a0 * &p);
            let k2 = -(a1 * (&p + &k1 * c(h / 2.0, 0.0)));
            let k3 = -(a1 * (&p + &k2 * c(h / 2.0, 0.0)));
            let k4 = -(a2 * (&p + &k3 * c(h, 0.0)));
            p += (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * c(h / 6.0, 0.0);
            i -= stride;
        }
    }
    p
}

/// Pole-to-pole transport along the ray at column `j`, in the frames at the poles.
fn ray_transport(a: &TwoChartConnection, j: usize) -> Result<CMat> {
    let grid = &a.grid;
    let mid = grid.mid_row();
    let fine = |stride: usize| {
        let pn = transport(&a.north, grid, j, 0, mid, stride);
        let ps = transport(&a.south, grid, j, grid.partner_row(mid), 0, stride);
        ps * a.transition_at(mid, j).adjoint() * pn
    };
    let t2 = fine(2);
    let t4 = fine(4);
    let estimate = (&t2 - &t4).norm() / 15.0;
    if estimate > TRANSPORT_TOL {
        return Err(Error::Integration { ray: j, estimate });
    }
    // RK4 is not exactly unitary; snap to the polar factor
    let svd = t2.svd(true, true);
    match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => Ok(u * v_t),
        _ => Err(Error::Integration { ray: j, estimate }),
    }
}

/// Based loop `theta -> T(theta)^{-1} T(0)` from pole-to-pole parallel transport.
pub fn radial_trivialization(a: &TwoChartConnection, n: usize) -> Result<DiscreteLoop> {
    let nt = a.grid.n_theta;
    if n == 0 || !nt.is_multiple_of(n) {
        return Err(Error::Discretization(format!(
            "loop size {n} must divide the angular resolution {nt}"
        )));
    }
    let stride = nt / n;
    let t0 = ray_transport(a, 0)?;
    let mut samples = Vec::with_capacity(n);
    samples.push(identity(a.spec.rank));
    for m in 1..n {
        let t = ray_transport(a, m * stride)?;
        samples.push(t.adjoint() * &t0);
    }
    DiscreteLoop::new(a.spec, samples)
}

/// Direct sum of the constant-curvature line-bundle connections of degrees `d`.
pub fn make_split_connection(d: &WeightVector, grid: PolarGrid) -> Result<TwoChartConnection> {
    grid.validate()?;
    let r = d.rank();
    let spec = GroupSpec {
        rank: r,
        special: d.sum() == 0,
        ..GroupSpec::unitary(r)
    };
    let n = grid.len();
    let mut north = ChartField {
        a_u: vec![CMat::zeros(r, r); n],
        a_theta: vec![CMat::zeros(r, r); n],
    };
    let mut south = north.clone();
    for i in 0..grid.n_rho {
        let u = grid.u(i);
        for j in 0..grid.n_theta {
            let k = grid.idx(i, j);
            for (l, dl) in d.as_slice().iter().enumerate() {
                let half = *dl as f64 / 2.0;
                north.a_theta[k][(l, l)] = c(0.0, -half * (1.0 - u.cos()));
                south.a_theta[k][(l, l)] = c(0.0, half * (1.0 - u.cos()));
            }
        }
    }
    let ov = grid.overlap_row();
    let mut transition = Vec::with_capacity((grid.n_rho - ov) * grid.n_theta);
    for _ in ov..grid.n_rho {
        for j in 0..grid.n_theta {
            let th = grid.theta(j);
            let entries: Vec<Complex64> = d.as_slice().iter().map(|dl| c(0.0, *dl as f64 * th).exp()).collect();
            transition.push(crate::linalg::diag(&entries));
        }
    }
    let conn = TwoChartConnection {
        spec,
        grid,
        north,
        south,
        transition,
        label: Some(d.clone()),
        convention: crate::birkhoff::CONVENTION_TAG.to_string(),
        description: format!("split {d}"),
    };
    conn.validate()?;
    Ok(conn)
}

/// Closed-form curvature of the split connection: `F_{rho theta} = -i (d/2) sin rho` on chart N.
pub fn split_curvature_reference(d: &WeightVector, rho: f64) -> CMat {
    let entries: Vec<Complex64> = d
        .as_slice()
        .iter()
        .map(|dl| c(0.0, -(*dl as f64) / 2.0 * rho.sin()))
        .collect();
    crate::linalg::diag(&entries)
}

/// `pi sum d_i^2 / R^2`
pub fn split_ym_reference(d: &WeightVector, g: &SphereMetric) -> f64 {
    PI * d.energy() as f64 / (g.radius * g.radius)
}

/// Complexified gauge transformation sampled on both charts with its derivatives.
#[derive(Debug, Clone)]
pub struct ComplexGauge {
    pub grid: PolarGrid,
    /// `[north, south]`, each with `(h, d_u h, d_theta h)` per grid point.
    pub h: [Vec<CMat>; 2],
    pub h_u: [Vec<CMat>; 2],
    pub h_theta: [Vec<CMat>; 2],
}

impl ComplexGauge {
    /// Sample an analytic gauge `f(chart, u, theta)`; derivatives by central differences.
    pub fn from_fn<F>(grid: PolarGrid, f: F) -> ComplexGauge
    where
        F: Fn(Chart, f64, f64) -> CMat,
    {
        let eps = 1e-5;
        let mut h: [Vec<CMat>; 2] = [Vec::new(), Vec::new()];
        let mut h_u: [Vec<CMat>; 2] = [Vec::new(), Vec::new()];
        let mut h_theta: [Vec<CMat>; 2] = [Vec::new(), Vec::new()];
        for (slot, chart) in Chart::BOTH.into_iter().enumerate() {
            for i in 0..grid.n_rho {
                let u = grid.u(i);
                for j in 0..grid.n_theta {
                    let th = grid.theta(j);
                    h[slot].push(f(chart, u, th));
                    let du = (f(chart, u + eps, th) - f(chart, u - eps, th)) / c(2.0 * eps, 0.0);
                    let dt = (f(chart, u, th + eps) - f(chart, u, th - eps)) / c(2.0 * eps, 0.0);
                    h_u[slot].push(du);
                    h_theta[slot].push(dt);
                }
            }
        }
        ComplexGauge {
            grid,
            h,
            h_u,
            h_theta,
        }
    }

    pub fn identity(grid: PolarGrid, r: usize) -> ComplexGauge {
        ComplexGauge::from_fn(grid, |_, _, _| identity(r))
    }
}

/// Act on the `(0,1)` part of `A` by `h` and return the Chern connection of the
/// result for the standard Hermitian metric:
/// `B = h A^{0,1} h^{-1} - (dbar h) h^{-1}`, `A' = B - B^dagger`.
pub fn complex_gauge_perturb(a: &TwoChartConnection, h: &ComplexGauge) -> Result<TwoChartConnection> {
    let grid = a.grid;
    if h.grid != grid {
        return Err(Error::Validation("gauge grid differs from connection grid".into()));
    }
    let r = a.spec.rank;
    for (slot, hs) in h.h.iter().enumerate() {
        for (k, m) in hs.iter().enumerate() {
            if m.nrows() != r {
                return Err(Error::Validation("gauge has wrong rank".into()));
            }
            let sv = m.clone().svd(false, false).singular_values;
            let cond = sv.max() / sv.min();
            if !(cond <= CONDITION_CAP) {
                return Err(Error::IllConditionedGauge(cond));
            }
            if k < grid.n_theta && (m - identity(r)).norm() > 1e-12 {
                return Err(Error::Validation(format!(
                    "gauge must be the identity at the {} pole",
                    if slot == 0 { "north" } else { "south" }
                )));
            }
        }
    }
    let ov = grid.overlap_row();
    for i in ov..grid.n_rho {
        let is = grid.partner_row(i);
        for j in 0..grid.n_theta {
            let g = a.transition_at(i, j);
            let hn = &h.h[0][grid.idx(i, j)];
            let hs = &h.h[1][grid.idx(is, j)];
            if (g.adjoint() * hn * g - hs).norm() > 1e-8 * (1.0 + hn.norm()) {
                return Err(Error::InvalidConnection(
                    "gauge charts are not related by the transition on the overlap".into(),
                ));
            }
        }
    }
    let mut out = a.clone();
    for (slot, chart) in Chart::BOTH.into_iter().enumerate() {
        let eps = chart.orientation();
        let src = a.chart(chart);
        let mut dst = src.clone();
        for i in 1..grid.n_rho {
            let s = grid.u(i).sin();
            for j in 0..grid.n_theta {
                let k = grid.idx(i, j);
                let hm = &h.h[slot][k];
                let hinv = hm
                    .clone()
                    .try_inverse()
                    .ok_or(Error::IllConditionedGauge(f64::INFINITY))?;
                let p_u = (&src.a_u[k] + &src.a_theta[k] * c(0.0, eps / s)) * c(0.5, 0.0);
                let dbar_h = (&h.h_u[slot][k] + &h.h_theta[slot][k] * c(0.0, eps / s)) * c(0.5, 0.0);
                let b_u = hm * p_u * &hinv - dbar_h * &hinv;
                let b_adj = b_u.adjoint();
                dst.a_u[k] = &b_u - &b_adj;
                dst.a_theta[k] = (&b_u + &b_adj) * c(0.0, -eps * s);
            }
        }
        match chart {
            Chart::North => out.north = dst,
            Chart::South => out.south = dst,
        }
    }
    out.description = format!("{} + complex gauge", a.description);
    out.validate()?;
    Ok(out)
}

/// Unitary gauge transformation `A -> u^{-1} A u + u^{-1} du`, `g -> u_N^{-1} g u_S`.
pub fn gauge_transform<F>(a: &TwoChartConnection, u: F) -> Result<TwoChartConnection>
where
    F: Fn(Chart, f64, f64) -> CMat,
{
    let grid = a.grid;
    let eps = 1e-5;
    let mut out = a.clone();
    for chart in Chart::BOTH {
        let src = a.chart(chart);
        let mut dst = src.clone();
        for i in 0..grid.n_rho {
            let x = grid.u(i);
            for j in 0..grid.n_theta {
                let th = grid.theta(j);
                let k = grid.idx(i, j);
                let um = u(chart, x, th);
                let ui = um.adjoint();
                let du = (u(chart, x + eps, th) - u(chart, x - eps, th)) / c(2.0 * eps, 0.0);
                let dt = (u(chart, x, th + eps) - u(chart, x, th - eps)) / c(2.0 * eps, 0.0);
                dst.a_u[k] = crate::linalg::skew_part(&(&ui * &src.a_u[k] * &um + &ui * du));
                dst.a_theta[k] = crate::linalg::skew_part(&(&ui * &src.a_theta[k] * &um + &ui * dt));
            }
        }
        match chart {
            Chart::North => out.north = dst,
            Chart::South => out.south = dst,
        }
    }
    let ov = grid.overlap_row();
    for i in ov..grid.n_rho {
        let is = grid.partner_row(i);
        let rho = grid.u(i);
        let sigma = grid.u(is);
        for j in 0..grid.n_theta {
            let th = grid.theta(j);
            let k = (i - ov) * grid.n_theta + j;
            out.transition[k] = u(Chart::North, rho, th).adjoint() * &a.transition[k] * u(Chart::South, sigma, th);
        }
    }
    out.description = format!("{} + unitary gauge", a.description);
    out.validate()?;
    Ok(out)
}

/// `sin^8` bump on `[lo, hi]`, equal to 1 at the midpoint. Seven continuous
/// derivatives keep finite differences on the default grid accurate.
pub fn bump(x: f64, lo: f64, hi: f64) -> f64 {
    if x <= lo || x >= hi {
        return 0.0;
    }
    let t = (x - lo) / (hi - lo);
    (PI * t).sin().powi(8)
}

/// Support of gauge perturbations in either chart, away from poles and overlap.
pub const BUMP_SUPPORT: (f64, f64) = (0.08 * PI, 0.38 * PI);

/// Which directions a random complex gauge may mix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaugeShape {
    /// Arbitrary `gl(r)` (`sl(r)` for special groups) directions.
    Generic,
    /// Only between frame directions of equal weight (commutes with the split transition).
    Levi,
    /// Diagonal directions only.
    Torus,
}

/// Random `h = exp(beta(u) M(theta))` per chart, with `M` a trigonometric polynomial
/// of degree 2 and `sup ||beta M||_op <= amplitude`.
pub fn random_complex_gauge<R: Rng + ?Sized>(
    d: &WeightVector,
    grid: PolarGrid,
    amplitude: f64,
    shape: GaugeShape,
    special: bool,
    rng: &mut R,
) -> ComplexGauge {
    let r = d.rank();
    let w = d.as_slice().to_vec();
    let allowed = |i: usize, j: usize| match shape {
        GaugeShape::Generic => true,
        GaugeShape::Levi => w[i] == w[j],
        GaugeShape::Torus => i == j,
    };
    let draw = |rng: &mut R| -> Vec<CMat> {
        let mut modes: Vec<CMat> = (0..5)
            .map(|_| {
                let mut m = CMat::from_fn(r, r, |i, j| {
                    if allowed(i, j) {
                        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
                    } else {
                        c(0.0, 0.0)
                    }
                });
                if special {
                    remove_trace(&mut m);
                }
                m
            })
            .collect();
        let total: f64 = modes.iter().map(op_norm).sum();
        if total > 0.0 {
            for m in modes.iter_mut() {
                *m *= c(amplitude / total, 0.0);
            }
        }
        modes
    };
    let charts = [draw(rng), draw(rng)];
    ComplexGauge::from_fn(grid, move |chart, u, th| {
        let slot = match chart {
            Chart::North => 0,
            Chart::South => 1,
        };
        let beta = bump(u, BUMP_SUPPORT.0, BUMP_SUPPORT.1);
        if beta == 0.0 {
            return identity(r);
        }
        let mut m = CMat::zeros(r, r);
        for (k, mode) in charts[slot].iter().enumerate() {
            let n = k as f64 - 2.0;
            m += mode * c(0.0, n * th).exp();
        }
        (m * c(beta, 0.0)).exp()
    })
}

/// Result of the curvature lower-bound check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GromovRecord {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    pub sup_norm: f64,
    pub area: f64,
}

/// `sup |F| * area >= max |d_i|` up to `1e-3`.
pub fn gromov_check(a: &TwoChartConnection, g: &SphereMetric, d: &WeightVector) -> Result<GromovRecord> {
    let sup_norm = curvature_sup_norm(a, g)?;
    let area = g.area();
    let lhs = sup_norm * area;
    let rhs = d.sup_norm() as f64;
    Ok(GromovRecord {
        lhs,
        rhs,
        satisfied: lhs >= rhs - 1e-3,
        sup_norm,
        area,
    })
}

/// All curvature diagnostics from one curvature evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSummary {
    pub ym_energy: f64,
    pub sup_norm: f64,
    pub chern_integral: f64,
}

pub fn curvature_summary(a: &TwoChartConnection, g: &SphereMetric) -> Result<CurvatureSummary> {
    let f = curvature_field(a)?;
    Ok(CurvatureSummary {
        ym_energy: ym_from_curvature(&f, a.spec.metric_scale, g),
        sup_norm: sup_from_curvature(&f, g),
        chern_integral: chern_from_curvature(&f),
    })
}

/// Pointwise `<F, F>` density, handy for plots.
pub fn curvature_density(f: &CurvatureField, chart: Chart, kappa: f64, g: &SphereMetric) -> DMatrix<f64> {
    let grid = f.grid;
    DMatrix::from_fn(grid.n_rho, grid.n_theta, |i, j| {
        if i == 0 {
            return f64::NAN;
        }
        let v = &f.chart(chart)[grid.idx(i, j)];
        inner_unchecked(v, v, kappa).sqrt() / g.area_factor(grid.u(i))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::birkhoff::{det_winding, loop_to_laurent_auto, splitting_type};
    use crate::flow::{flow_to_weights, FlowConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn wv(d: &[i64]) -> WeightVector {
        WeightVector::new(d.to_vec())
    }

    fn small() -> PolarGrid {
        PolarGrid::new(49, 32).unwrap()
    }

    #[test]
    fn grid_rows_line_up() {
        let g = PolarGrid::default();
        assert!((g.u(g.overlap_row()) - OVERLAP_START).abs() < 1e-12);
        assert!((g.u(g.mid_row()) - PI / 2.0).abs() < 1e-12);
        assert_eq!(g.partner_row(g.mid_row()), g.mid_row());
        assert!((g.u(g.partner_row(g.n_rho - 1)) - OVERLAP_START).abs() < 1e-12);
        assert!(PolarGrid::new(50, 32).is_err());
    }

    #[test]
    fn trivial_connection_is_flat() {
        let a = make_split_connection(&wv(&[0, 0]), small()).unwrap();
        let m = SphereMetric::unit();
        let s = curvature_summary(&a, &m).unwrap();
        assert_eq!(s.ym_energy, 0.0);
        assert_eq!(s.sup_norm, 0.0);
        assert_eq!(chern_number(&a).unwrap(), 0);
        let lp = radial_trivialization(&a, 16).unwrap();
        for g in &lp.samples {
            assert!((g - identity(2)).norm() < 1e-14);
        }
    }

    #[test]
    fn split_curvature_matches_closed_form() {
        let d = wv(&[1, -1]);
        let a = make_split_connection(&d, PolarGrid::default()).unwrap();
        let f = curvature_field(&a).unwrap();
        let grid = a.grid;
        for i in [1, 10, 40, 60, 72, 144] {
            let expected = split_curvature_reference(&d, grid.u(i));
            assert!((&f.north[grid.idx(i, 5)] - &expected).norm() < 1e-7, "row {i}");
        }
        let m = SphereMetric::unit();
        let ym = ym_energy(&a, &m).unwrap();
        assert!((ym - split_ym_reference(&d, &m)).abs() < 1e-6 * ym);
        let sup = curvature_sup_norm(&a, &m).unwrap();
        assert!((sup - 0.5).abs() < 1e-6);
        assert_eq!(chern_number(&a).unwrap(), 0);
    }

    #[test]
    fn curvature_scales_with_weights_and_radius() {
        let m = SphereMetric::round(2.0).unwrap();
        let one = curvature_sup_norm(&make_split_connection(&wv(&[1, -1]), small()).unwrap(), &m).unwrap();
        let two = curvature_sup_norm(&make_split_connection(&wv(&[2, -2]), small()).unwrap(), &m).unwrap();
        assert!((two / one - 2.0).abs() < 1e-3);
        assert!((one - 0.5 / 4.0).abs() < 1e-6);
        let a = make_split_connection(&wv(&[2, 0]), small()).unwrap();
        assert_eq!(chern_number(&a).unwrap(), 2);
        let rec = gromov_check(&a, &m, &wv(&[2, 0])).unwrap();
        assert!(rec.satisfied);
        assert!((rec.lhs - 2.0 * PI * 2.0).abs() < 1e-4);
    }

    #[test]
    fn rad_of_split_connection_is_the_geodesic() {
        let d = wv(&[2, -1, -1]);
        let a = make_split_connection(&d, small()).unwrap();
        let lp = radial_trivialization(&a, 32).unwrap();
        let out = flow_to_weights(&lp, &FlowConfig::default()).unwrap();
        assert_eq!(out.steps, 0);
        assert_eq!(out.weights, d);
        let lr = loop_to_laurent_auto(&lp).unwrap();
        assert_eq!(splitting_type(&lr).unwrap(), d);
        assert_eq!(det_winding(&lr).unwrap(), chern_number(&a).unwrap());
    }

    #[test]
    fn identity_gauge_changes_nothing() {
        let a = make_split_connection(&wv(&[1, -1]), small()).unwrap();
        let b = complex_gauge_perturb(&a, &ComplexGauge::identity(a.grid, 2)).unwrap();
        for (x, y) in a.north.a_u.iter().zip(&b.north.a_u).chain(a.south.a_theta.iter().zip(&b.south.a_theta)) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    fn unitary_bump(r: usize, seed: u64) -> impl Fn(Chart, f64, f64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || {
            let x = crate::linalg::random_skew(r, &mut rng);
            let s = 0.3 / op_norm(&x);
            x * c(s, 0.0)
        };
        let x1 = draw();
        let x2 = draw();
        move |chart, u, th| {
            let beta = bump(u, BUMP_SUPPORT.0, BUMP_SUPPORT.1);
            let x = match chart {
                Chart::North => &x1,
                Chart::South => &x2,
            };
            crate::liegroup::exp_skew(&(x * c(beta * (1.0 + 0.5 * th.cos()), 0.0)))
        }
    }

    #[test]
    fn unitary_complex_gauge_keeps_the_energy() {
        let a = make_split_connection(&wv(&[1, -1]), PolarGrid::default()).unwrap();
        let h = ComplexGauge::from_fn(a.grid, unitary_bump(2, 3));
        let b = complex_gauge_perturb(&a, &h).unwrap();
        let m = SphereMetric::unit();
        let (ea, eb) = (ym_energy(&a, &m).unwrap(), ym_energy(&b, &m).unwrap());
        assert!((ea - eb).abs() < 1e-6 * ea, "{ea} vs {eb}");
    }

    #[test]
    fn unitary_gauge_invariance() {
        let a = make_split_connection(&wv(&[2, -1, -1]), PolarGrid::default()).unwrap();
        let m = SphereMetric::unit();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let y = crate::linalg::random_skew(3, &mut rng);
        let z = crate::linalg::random_skew(3, &mut rng);
        // nontrivial on the overlap and at the south pole, identity at the north pole
        let u = move |chart: Chart, x: f64, th: f64| match chart {
            Chart::North => crate::liegroup::exp_skew(&(&y * c((x / 2.0).sin().powi(2) * (1.0 + th.sin()), 0.0))),
            Chart::South => crate::liegroup::exp_skew(&(&z * c(0.7 + 0.2 * x.sin() * th.cos(), 0.0))),
        };
        let b = gauge_transform(&a, u).unwrap();
        let sa = curvature_summary(&a, &m).unwrap();
        let sb = curvature_summary(&b, &m).unwrap();
        assert!((sa.ym_energy - sb.ym_energy).abs() < 1e-6 * sa.ym_energy);
        assert!((sa.sup_norm - sb.sup_norm).abs() < 1e-6 * sa.sup_norm);
        assert!((sa.chern_integral - sb.chern_integral).abs() < 1e-6);
        let la = radial_trivialization(&a, 16).unwrap();
        let lb = radial_trivialization(&b, 16).unwrap();
        for (x, y) in la.samples.iter().zip(&lb.samples) {
            assert!((x - y).norm() < 1e-5);
        }
    }

    #[test]
    fn gauge_transformed_trivial_connection_is_flat() {
        let a = make_split_connection(&wv(&[0, 0]), PolarGrid::default()).unwrap();
        let b = gauge_transform(&a, unitary_bump(2, 8)).unwrap();
        let f = curvature_field(&b).unwrap();
        let worst = f.north.iter().chain(&f.south).map(|x| x.norm()).fold(0.0, f64::max);
        let h = b.grid.delta();
        assert!(worst < h * h, "{worst}");
    }

    #[test]
    fn torus_complex_gauge_raises_energy_and_keeps_type() {
        let d = wv(&[1, -1]);
        let a = make_split_connection(&d, PolarGrid::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = random_complex_gauge(&d, a.grid, 0.3, GaugeShape::Torus, true, &mut rng);
        let b = complex_gauge_perturb(&a, &h).unwrap();
        let m = SphereMetric::unit();
        assert!(ym_energy(&b, &m).unwrap() > split_ym_reference(&d, &m) + 1e-3);
        let lp = radial_trivialization(&b, 32).unwrap();
        let out = flow_to_weights(&lp, &FlowConfig::default()).unwrap();
        assert_eq!(out.weights, d);
        assert_eq!(splitting_type(&loop_to_laurent_auto(&lp).unwrap()).unwrap(), d);
        assert!(gromov_check(&b, &m, &d).unwrap().satisfied);
    }

    #[test]
    fn json_round_trip() {
        let d = wv(&[1, -1]);
        let a = make_split_connection(&d, small()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = random_complex_gauge(&d, a.grid, 0.2, GaugeShape::Torus, true, &mut rng);
        let b = complex_gauge_perturb(&a, &h).unwrap();
        let text = serde_json::to_string(&b).unwrap();
        let back: TwoChartConnection = serde_json::from_str(&text).unwrap();
        back.validate().unwrap();
        assert_eq!(back.label, Some(d));
        for (x, y) in b.north.a_u.iter().zip(&back.north.a_u) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_gauges() {
        let a = make_split_connection(&wv(&[1, -1]), small()).unwrap();
        let bad = ComplexGauge::from_fn(a.grid, |_, _, _| crate::linalg::diag(&[c(2.0, 0.0), c(0.5, 0.0)]));
        assert!(complex_gauge_perturb(&a, &bad).is_err());
        let singular = ComplexGauge::from_fn(a.grid, |_, u, _| {
            if u > 0.5 {
                crate::linalg::diag(&[c(1e-9, 0.0), c(1.0, 0.0)])
            } else {
                identity(2)
            }
        });
        assert!(matches!(
            complex_gauge_perturb(&a, &singular),
            Err(Error::IllConditionedGauge(_))
        ));
    }
}
