//! Labelled test objects with planted splitting types, and the three-way check
//! label = flow limit = Toeplitz type.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::birkhoff::{det_winding, loop_to_laurent_auto, planted_loop, splitting_type, unitarize, FactorShape, LaurentLoop};
use crate::bundle::{
    complex_gauge_perturb, curvature_summary, make_split_connection, radial_trivialization, random_complex_gauge,
    GaugeShape, PolarGrid, SphereMetric, TwoChartConnection, CHERN_RESIDUE_TOL,
};
use crate::error::{Error, Result};
use crate::flow::{extract_weights, run_flow, FlowConfig};
use crate::loopspace::{DiscreteLoop, WeightVector};

/// Loop size used for radial trivializations and unitarized Laurent loops.
pub const CORPUS_LOOP_SAMPLES: usize = 64;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorpusObject {
    Loop {
        data: DiscreteLoop,
    },
    Laurent {
        data: LaurentLoop,
        samples: usize,
    },
    Connection {
        data: Box<TwoChartConnection>,
    },
    /// Split connection of type `weights`, built on demand.
    Split {
        weights: WeightVector,
        grid: PolarGrid,
    },
    /// Split connection moved by the random complex gauge drawn from `seed`.
    ComplexGauge {
        weights: WeightVector,
        grid: PolarGrid,
        shape: GaugeShape,
        amplitude: f64,
        seed: u64,
    },
}

impl CorpusObject {
    /// The connection this object describes, if it is one.
    pub fn connection(&self) -> Result<Option<TwoChartConnection>> {
        match self {
            CorpusObject::Connection { data } => Ok(Some((**data).clone())),
            CorpusObject::Split { weights, grid } => make_split_connection(weights, *grid).map(Some),
            CorpusObject::ComplexGauge {
                weights,
                grid,
                shape,
                amplitude,
                seed,
            } => {
                let a = make_split_connection(weights, *grid)?;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let h = random_complex_gauge(weights, *grid, *amplitude, *shape, a.spec.special, &mut rng);
                let mut b = complex_gauge_perturb(&a, &h)?;
                b.label = Some(weights.clone());
                Ok(Some(b))
            }
            _ => Ok(None),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub name: String,
    /// Planted type, if known from the construction.
    pub label: Option<WeightVector>,
    pub object: CorpusObject,
}

impl CorpusEntry {
    pub fn is_connection(&self) -> bool {
        matches!(
            self.object,
            CorpusObject::Connection { .. } | CorpusObject::Split { .. } | CorpusObject::ComplexGauge { .. }
        )
    }

    /// Complex-gauge perturbed connection of nontrivial type.
    pub fn is_perturbed_jumping(&self) -> bool {
        self.is_connection() && self.name.starts_with("complex gauge") && self.label.as_ref().is_some_and(|d| !d.is_trivial())
    }

    pub fn to_loop(&self) -> Result<DiscreteLoop> {
        match &self.object {
            CorpusObject::Loop { data } => Ok(data.clone()),
            CorpusObject::Laurent { data, samples } => unitarize(data, *samples),
            other => match other.connection()? {
                Some(a) => radial_trivialization(&a, CORPUS_LOOP_SAMPLES),
                None => unreachable!("every other object is a connection"),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Corpus {
    pub seed: u64,
    pub entries: Vec<CorpusEntry>,
}

fn wv(d: &[i64]) -> WeightVector {
    WeightVector::new(d.to_vec())
}

pub const SPLIT_TYPES: [&[i64]; 12] = [
    &[0, 0],
    &[1, -1],
    &[2, -2],
    &[3, -3],
    &[2, 0],
    &[1, 0, -1],
    &[2, -1, -1],
    &[1, 1, -2],
    &[3, -1, -2],
    &[1, 0, 0, -1],
    &[1, 1, -1, -1],
    &[2, 1, 0, -3],
];

/// Unbalanced types for complex-gauge perturbations, with `max |d_i|` 1 or 2.
pub const JUMPING_TYPES: [&[i64]; 8] = [
    &[1, -1],
    &[1, 0, -1],
    &[1, 0, 0, -1],
    &[1, 1, -1, -1],
    &[2, -2],
    &[2, -1, -1],
    &[1, 1, -2],
    &[2, 0],
];

/// Balanced types; any complex gauge keeps these in the open stratum.
pub const BALANCED_TYPES: [&[i64]; 4] = [&[0, 0], &[0, 0, 0], &[1, 1], &[0, 0, 0, 0]];

pub const PLANTED_TYPES: [&[i64]; 10] = [
    &[1, -1],
    &[2, -2],
    &[3, -3],
    &[1, 0, -1],
    &[2, -1, -1],
    &[1, 1, -2],
    &[2, 0, -2],
    &[1, 0, 0, -1],
    &[1, 1, -1, -1],
    &[2, 1, -1, -2],
];

/// Whether a gauge or factor of generic shape keeps the type detectable through Rad
/// and the flow; only the open stratum does.
fn shape_for(d: &WeightVector) -> bool {
    let s = d.as_slice();
    s[0] - s[s.len() - 1] <= 1
}

/// The standard corpus: split connections, complex-gauge perturbations (amplitude
/// 0.3) and planted Birkhoff factorizations. Gauges and factors mix only equal
/// weights unless the type is balanced.
pub fn standard_corpus(seed: u64) -> Result<Corpus> {
    let grid = PolarGrid::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for d in SPLIT_TYPES {
        let d = wv(d);
        entries.push(CorpusEntry {
            name: format!("split {d}"),
            label: Some(d.clone()),
            object: CorpusObject::Split {
                weights: d.clone(),
                grid,
            },
        });
    }
    for round in 0..2 {
        for d in JUMPING_TYPES {
            let d = wv(d);
            let shape = if round == 0 { GaugeShape::Torus } else { GaugeShape::Levi };
            entries.push(gauge_entry(&d, grid, shape, &mut rng));
        }
    }
    for d in BALANCED_TYPES {
        let d = wv(d);
        entries.push(gauge_entry(&d, grid, GaugeShape::Generic, &mut rng));
    }
    for round in 0..2 {
        for d in PLANTED_TYPES {
            let d = wv(d);
            let shape = if shape_for(&d) { FactorShape::Generic } else { FactorShape::Levi };
            let p = 1 + round;
            let amp = if round == 0 { 0.3 } else { 0.5 };
            entries.push(CorpusEntry {
                name: format!("planted {d} ({shape:?}, degree {p})"),
                label: Some(d.clone()),
                object: CorpusObject::Laurent {
                    data: planted_loop(&d, p, amp, shape, &mut rng),
                    samples: CORPUS_LOOP_SAMPLES,
                },
            });
        }
    }
    for d in [&[1i64, 1, 0][..], &[1, 0, 0], &[0, 0, 0, 0]] {
        let d = wv(d);
        entries.push(CorpusEntry {
            name: format!("planted {d} (Generic, degree 2)"),
            label: Some(d.clone()),
            object: CorpusObject::Laurent {
                data: planted_loop(&d, 2, 0.5, FactorShape::Generic, &mut rng),
                samples: CORPUS_LOOP_SAMPLES,
            },
        });
    }
    Ok(Corpus { seed, entries })
}

fn gauge_entry(d: &WeightVector, grid: PolarGrid, shape: GaugeShape, rng: &mut ChaCha8Rng) -> CorpusEntry {
    CorpusEntry {
        name: format!("complex gauge {d} ({shape:?}, amplitude 0.3)"),
        label: Some(d.clone()),
        object: CorpusObject::ComplexGauge {
            weights: d.clone(),
            grid,
            shape,
            amplitude: 0.3,
            seed: rng.random(),
        },
    }
}

/// Everything measured on one entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntryReport {
    pub name: String,
    pub label: Option<WeightVector>,
    pub flow: Option<WeightVector>,
    pub oracle: Option<WeightVector>,
    pub start_energy: f64,
    pub final_energy: f64,
    pub steps: usize,
    pub monotone: bool,
    pub converged: bool,
    pub det_winding: Option<i64>,
    pub chern_integral: Option<f64>,
    pub ym_energy: Option<f64>,
    pub sup_norm: Option<f64>,
    pub error: Option<String>,
}

impl EntryReport {
    pub fn agree(&self) -> bool {
        match (&self.flow, &self.oracle) {
            (Some(f), Some(o)) => f == o && self.label.as_ref().is_none_or(|l| l == f),
            _ => false,
        }
    }

    /// Limit energy equals the energy of the snapped weights.
    pub fn energy_gap(&self) -> Option<f64> {
        self.flow.as_ref().map(|d| (self.final_energy - d.energy() as f64).abs())
    }

    pub fn chern_residue(&self) -> Option<f64> {
        self.chern_integral.map(|x| (x - x.round()).abs())
    }

    pub fn chern_number(&self) -> Option<i64> {
        self.chern_integral
            .filter(|x| (x - x.round()).abs() < CHERN_RESIDUE_TOL)
            .map(|x| x.round() as i64)
    }
}

pub fn check_entry(entry: &CorpusEntry, cfg: &FlowConfig, metric: &SphereMetric) -> EntryReport {
    let mut rep = EntryReport {
        name: entry.name.clone(),
        label: entry.label.clone(),
        flow: None,
        oracle: None,
        start_energy: f64::NAN,
        final_energy: f64::NAN,
        steps: 0,
        monotone: false,
        converged: false,
        det_winding: None,
        chern_integral: None,
        ym_energy: None,
        sup_norm: None,
        error: None,
    };
    if let Err(e) = fill_report(entry, cfg, metric, &mut rep) {
        rep.error = Some(e.to_string());
    }
    rep
}

fn fill_report(entry: &CorpusEntry, cfg: &FlowConfig, metric: &SphereMetric, rep: &mut EntryReport) -> Result<()> {
    let lp = match entry.object.connection()? {
        Some(a) => {
            let s = curvature_summary(&a, metric)?;
            rep.chern_integral = Some(s.chern_integral);
            rep.ym_energy = Some(s.ym_energy);
            rep.sup_norm = Some(s.sup_norm);
            radial_trivialization(&a, CORPUS_LOOP_SAMPLES)?
        }
        None => entry.to_loop()?,
    };
    let laurent = match &entry.object {
        CorpusObject::Laurent { data, .. } => data.clone(),
        _ => loop_to_laurent_auto(&lp)?,
    };
    rep.det_winding = Some(det_winding(&laurent)?);
    // the oracle always sees the unitary loop, never the planted factors directly
    let oracle_input = match &entry.object {
        CorpusObject::Laurent { .. } => loop_to_laurent_auto(&lp)?,
        _ => laurent,
    };
    rep.oracle = Some(splitting_type(&oracle_input)?);
    let trace = run_flow(&lp, cfg)?;
    rep.start_energy = trace.energies[0];
    rep.final_energy = trace.final_energy();
    rep.steps = trace.steps_taken;
    rep.monotone = trace.is_monotone();
    rep.converged = trace.converged;
    if !trace.converged {
        return Err(Error::NotConverged(format!(
            "gradient norm {:.3e} after {} steps",
            trace.final_grad_norm, trace.steps_taken
        )));
    }
    rep.flow = Some(extract_weights(&trace.final_loop, cfg.snap_tol)?);
    Ok(())
}

/// Check a whole corpus, in parallel, keeping entry order.
pub fn check_corpus(corpus: &Corpus, cfg: &FlowConfig, metric: &SphereMetric) -> Vec<EntryReport> {
    corpus.entries.par_iter().map(|e| check_entry(e, cfg, metric)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_large_enough_and_in_range() {
        let c = standard_corpus(1).unwrap();
        assert!(c.entries.len() >= 50);
        for e in &c.entries {
            let d = e.label.as_ref().unwrap();
            assert!(d.rank() <= 4 && d.sup_norm() <= 3, "{}", e.name);
        }
        let jumping = c.entries.iter().filter(|e| e.is_perturbed_jumping()).count();
        assert!(jumping >= 10);
    }
}
