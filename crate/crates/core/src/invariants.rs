//! Families of loops over parameter spheres, their energy profiles, and upper bounds
//! for the minimax energy of a represented class.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::birkhoff::{loop_to_laurent_auto, splitting_type};
use crate::bundle::{radial_trivialization, TwoChartConnection};
use crate::error::{Error, Result};
use crate::flow::{flow_to_weights, FlowConfig};
use crate::liegroup::GroupSpec;
use crate::linalg::{c, identity, random_unitary, CMat};
use crate::loopspace::{enumerate_low_index_weights, geodesic_loop, DiscreteLoop, WeightVector};

/// One member of a family.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySample {
    Loop(DiscreteLoop),
    Connection(Box<TwoChartConnection>),
}

/// Maps from a parameter sphere `S^n` (`n <= 2`) to based loops.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConnectionFamily {
    pub name: String,
    /// Free-form description of the homotopy class the family represents.
    pub class_tag: String,
    pub dim: usize,
    /// Parameter points on the unit sphere in `R^{dim+1}`.
    pub params: Vec<Vec<f64>>,
    pub basepoint: usize,
    /// Loop resolution used when a sample is a connection.
    pub loop_samples: usize,
    pub samples: Vec<FamilySample>,
}

impl ConnectionFamily {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_loop(&self, i: usize) -> Result<DiscreteLoop> {
        match &self.samples[i] {
            FamilySample::Loop(l) => Ok(l.clone()),
            FamilySample::Connection(a) => radial_trivialization(a, self.loop_samples),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim > 2 {
            return Err(Error::Validation(format!("parameter sphere S^{} not supported", self.dim)));
        }
        if self.samples.is_empty() || self.params.len() != self.samples.len() {
            return Err(Error::Validation("family needs one parameter point per sample".into()));
        }
        if self.basepoint >= self.samples.len() {
            return Err(Error::Validation("basepoint out of range".into()));
        }
        for p in &self.params {
            let norm: f64 = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            if p.len() != self.dim + 1 || (norm - 1.0).abs() > 1e-9 {
                return Err(Error::Validation("parameter point is not on the unit sphere".into()));
            }
        }
        for s in &self.samples {
            match s {
                FamilySample::Loop(l) => l.validate()?,
                FamilySample::Connection(a) => a.validate()?,
            }
        }
        let base = self.sample_loop(self.basepoint)?;
        let r = base.rank();
        if base.samples.iter().any(|g| (g - identity(r)).norm() > 1e-8) {
            return Err(Error::Validation("basepoint sample is not the constant loop".into()));
        }
        Ok(())
    }

    /// Block-embed every sample into rank `r + k`.
    pub fn stabilized(&self, k: usize) -> Result<ConnectionFamily> {
        let samples = (0..self.len())
            .map(|i| self.sample_loop(i).map(|l| FamilySample::Loop(l.stabilized(k))))
            .collect::<Result<Vec<_>>>()?;
        Ok(ConnectionFamily {
            name: format!("{} + trivial rank {k}", self.name),
            class_tag: format!("{} (stabilized by {k})", self.class_tag),
            samples,
            ..self.clone()
        })
    }
}

/// Vertices of the octahedron subdivided `res` times along each edge, projected to
/// the sphere; the basepoint `(0, 0, 1)` comes first.
pub fn octahedral_grid(res: usize) -> Vec<[f64; 3]> {
    let n = res as i64;
    let mut pts: Vec<[i64; 3]> = Vec::new();
    for a in -n..=n {
        for b in -(n - a.abs())..=(n - a.abs()) {
            let rest = n - a.abs() - b.abs();
            if rest == 0 {
                pts.push([a, b, 0]);
            } else {
                pts.push([a, b, rest]);
                pts.push([a, b, -rest]);
            }
        }
    }
    pts.sort_by_key(|p| (p != &[0, 0, n], *p));
    pts.into_iter()
        .map(|p| {
            let v = [p[0] as f64, p[1] as f64, p[2] as f64];
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            [v[0] / norm, v[1] / norm, v[2] / norm]
        })
        .collect()
}

/// `n` equally spaced points on the circle starting at `(1, 0)`.
pub fn circle_grid(n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            [t.cos(), t.sin()]
        })
        .collect()
}

/// Unit quaternion `a + b i + c j + d k` as an element of SU(2).
pub fn quaternion_to_su2(q: [f64; 4]) -> CMat {
    let [a, b, cc, d] = q;
    CMat::from_row_slice(2, 2, &[c(a, b), c(cc, d), c(-cc, d), c(a, -b)])
}

/// Circle in `S^3` through 1 with tangent `i`, tilted towards `cos(phi) j + sin(phi) k`,
/// of angular radius `rho` (`rho = pi/2` is the great circle `exp(2 pi i t)`).
pub fn small_circle_loop(rho: f64, phi: f64, n: usize) -> Result<DiscreteLoop> {
    let (sr, cr) = rho.sin_cos();
    let samples = (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            let (st, ct) = t.sin_cos();
            let e1 = cr * cr + sr * sr * ct;
            let e2 = sr * st;
            let e3 = sr * cr * (1.0 - ct);
            let norm = (e1 * e1 + e2 * e2 + e3 * e3).sqrt();
            quaternion_to_su2([e1 / norm, e2 / norm, e3 * phi.cos() / norm, e3 * phi.sin() / norm])
        })
        .collect();
    DiscreteLoop::new(GroupSpec::special_unitary(2), samples)
}

/// Degree-one family `S^2 -> Omega SU(2)`: the point at polar angle `alpha` from the
/// basepoint and azimuth `phi` goes to the circle of radius `alpha / 2`. The basepoint
/// gives the constant loop, the antipode the `(1,-1)` geodesic, and every other
/// sample has energy `2 sin^2(alpha/2) < 2`.
pub fn su2_degree_generator_family(resolution: usize) -> Result<ConnectionFamily> {
    su2_degree_generator_family_with(resolution, 32)
}

pub fn su2_degree_generator_family_with(resolution: usize, n: usize) -> Result<ConnectionFamily> {
    if resolution < 16 {
        return Err(Error::Validation(format!("resolution {resolution} below 16")));
    }
    let grid = octahedral_grid(resolution);
    let mut samples = Vec::with_capacity(grid.len());
    for p in &grid {
        let alpha = p[2].clamp(-1.0, 1.0).acos();
        let phi = p[1].atan2(p[0]);
        let lp = if alpha == 0.0 {
            DiscreteLoop::constant(GroupSpec::special_unitary(2), n)
        } else {
            small_circle_loop(alpha / 2.0, phi, n)?
        };
        samples.push(FamilySample::Loop(lp));
    }
    Ok(ConnectionFamily {
        name: format!("su2 generator (octahedral {resolution})"),
        class_tag: "generator of pi_2(Omega SU(2)), l = 2".into(),
        dim: 2,
        params: grid.iter().map(|p| p.to_vec()).collect(),
        basepoint: 0,
        loop_samples: n,
        samples,
    })
}

/// Constant loops over a circle grid.
pub fn constant_family(r: usize, count: usize, n: usize) -> ConnectionFamily {
    let spec = GroupSpec::special_unitary(r);
    ConnectionFamily {
        name: format!("constant SU({r})"),
        class_tag: "trivial class".into(),
        dim: 1,
        params: circle_grid(count).iter().map(|p| p.to_vec()).collect(),
        basepoint: 0,
        loop_samples: n,
        samples: (0..count)
            .map(|_| FamilySample::Loop(DiscreteLoop::constant(spec, n)))
            .collect(),
    }
}

/// Sample set over a circle: the constant loop followed by randomly conjugated
/// geodesics of the given weights.
pub fn geodesic_family<R: Rng + ?Sized>(
    name: &str,
    weights: &[WeightVector],
    n: usize,
    rng: &mut R,
) -> Result<ConnectionFamily> {
    let r = weights
        .first()
        .map(|d| d.rank())
        .ok_or_else(|| Error::Argument("no weights given".into()))?;
    let mut samples = vec![FamilySample::Loop(DiscreteLoop::constant(GroupSpec::special_unitary(r), n))];
    for d in weights {
        let q = random_unitary(r, rng);
        samples.push(FamilySample::Loop(geodesic_loop(d, &q, n, d.sum() == 0)?));
    }
    Ok(ConnectionFamily {
        name: name.into(),
        class_tag: "sample set".into(),
        dim: 1,
        params: circle_grid(samples.len()).iter().map(|p| p.to_vec()).collect(),
        basepoint: 0,
        loop_samples: n,
        samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEnergy {
    pub index: usize,
    pub weights: Option<WeightVector>,
    /// `|u|_A = sum d_i^2`
    pub energy: Option<i64>,
    /// `|u|_{A,inf} = max |d_i|`
    pub sup: Option<i64>,
    pub oracle: Option<WeightVector>,
    pub oracle_agrees: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyEnergy {
    pub per_sample: Vec<SampleEnergy>,
    pub sup_a: i64,
    pub sup_inf: i64,
    /// Fraction of samples whose flow succeeded.
    pub completeness: f64,
    /// Samples where the Toeplitz oracle ran and disagreed with the flow.
    pub disagreements: usize,
}

fn sample_energy(f: &ConnectionFamily, i: usize, cfg: &FlowConfig) -> SampleEnergy {
    let mut rec = SampleEnergy {
        index: i,
        weights: None,
        energy: None,
        sup: None,
        oracle: None,
        oracle_agrees: None,
        error: None,
    };
    let lp = match f.sample_loop(i) {
        Ok(l) => l,
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    match flow_to_weights(&lp, cfg) {
        Ok(out) => {
            rec.energy = Some(out.weights.energy());
            rec.sup = Some(out.weights.sup_norm());
            rec.weights = Some(out.weights);
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    // the oracle needs enough Fourier decay; skip silently where it refuses
    if let Ok(d) = loop_to_laurent_auto(&lp).and_then(|l| splitting_type(&l)) {
        rec.oracle_agrees = rec.weights.as_ref().map(|w| *w == d);
        rec.oracle = Some(d);
    }
    rec
}

/// Per-sample splitting data and the sups of `sum d_i^2` and `max |d_i|`.
pub fn family_sup_energy(f: &ConnectionFamily, cfg: &FlowConfig) -> Result<FamilyEnergy> {
    f.validate()?;
    cfg.validate()?;
    let per_sample: Vec<SampleEnergy> = (0..f.len())
        .into_par_iter()
        .map(|i| sample_energy(f, i, cfg))
        .collect();
    let ok: Vec<&SampleEnergy> = per_sample.iter().filter(|s| s.weights.is_some()).collect();
    if ok.is_empty() {
        return Err(Error::NotConverged(format!("no sample of {} produced weights", f.name)));
    }
    let sup_a = ok.iter().filter_map(|s| s.energy).max().unwrap_or(0);
    let sup_inf = ok.iter().filter_map(|s| s.sup).max().unwrap_or(0);
    let disagreements = per_sample.iter().filter(|s| s.oracle_agrees == Some(false)).count();
    Ok(FamilyEnergy {
        completeness: ok.len() as f64 / per_sample.len() as f64,
        per_sample,
        sup_a,
        sup_inf,
        disagreements,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkeletonEnergy {
    pub weights: Vec<WeightVector>,
    pub energy: i64,
}

/// Critical types of index at most `bound_index` and their largest energy.
pub fn skeleton_energy(bound_index: usize, r: usize) -> SkeletonEnergy {
    let weights = enumerate_low_index_weights(r, bound_index);
    let energy = weights.iter().map(|d| d.energy()).max().unwrap_or(0);
    SkeletonEnergy { weights, energy }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub name: String,
    pub class_tag: String,
    pub sup_a: i64,
    pub sup_inf: i64,
    pub completeness: f64,
}

/// Minimum over families of the family sup energy. This bounds the minimax energy of
/// the represented class from above only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaBound {
    pub upper_bound: i64,
    pub kind: String,
    pub families: Vec<FamilySummary>,
}

/// Families with failed samples are reported but do not enter the minimum, since a
/// partial sup could undershoot.
pub fn zeta_upper_bound(families: &[ConnectionFamily], cfg: &FlowConfig) -> Result<ZetaBound> {
    let energies = families
        .iter()
        .map(|f| family_sup_energy(f, cfg))
        .collect::<Result<Vec<_>>>()?;
    zeta_from_energies(families, &energies)
}

/// Same bound from already computed family energies.
pub fn zeta_from_energies(families: &[ConnectionFamily], energies: &[FamilyEnergy]) -> Result<ZetaBound> {
    if families.is_empty() || families.len() != energies.len() {
        return Err(Error::Argument("need one energy record per family, and at least one family".into()));
    }
    let summaries: Vec<FamilySummary> = families
        .iter()
        .zip(energies)
        .map(|(f, e)| FamilySummary {
            name: f.name.clone(),
            class_tag: f.class_tag.clone(),
            sup_a: e.sup_a,
            sup_inf: e.sup_inf,
            completeness: e.completeness,
        })
        .collect();
    let upper_bound = summaries
        .iter()
        .filter(|s| s.completeness == 1.0)
        .map(|s| s.sup_a)
        .min()
        .ok_or_else(|| Error::NotConverged("no family was evaluated completely".into()))?;
    Ok(ZetaBound {
        upper_bound,
        kind: "upper bound".into(),
        families: summaries,
    })
}
