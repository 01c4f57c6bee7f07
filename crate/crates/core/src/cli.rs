//! Command-line front end: argument and config parsing, the subcommands, and their
//! text, CSV and JSON reports.
//!
//! Every subcommand returns whether its verification passed; the binary maps that to
//! exit code 0 or 1 and any error to 2.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::birkhoff::{loop_to_laurent_auto, splitting_type, LaurentLoop, DEFAULT_CONDITION_CAP};
use crate::bundle::{gromov_check, radial_trivialization, SphereMetric, TwoChartConnection};
use crate::cascade::{cascade_complex, perfect_complex_for_weights, Builtin, CascadeComplexData, MorseBottProblem};
use crate::corpus::{check_corpus, standard_corpus, Corpus, CorpusEntry, CorpusObject, EntryReport, CORPUS_LOOP_SAMPLES};
use crate::error::{Error, Result};
use crate::flow::{FlowConfig, FlowMetric};
use crate::invariants::{
    constant_family, family_sup_energy, geodesic_family, su2_degree_generator_family, zeta_from_energies,
    ConnectionFamily, FamilyEnergy,
};
use crate::loopspace::{formula_morse_index, geodesic_loop, hessian_report, orbit_dimension, DiscreteLoop, WeightVector};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "JUMPLAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "jumplab", version, about = "Splitting types of bundles over the two-sphere")]
pub struct Cli {
    /// JSON file with one object per subcommand, keyed like the flags
    /// (e.g. {"split": {"input": "c.json", "grad-tol": 1e-7}}); flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Splitting type of loops or connections by flow and by Toeplitz ranks.
    Split(SplitArgs),
    /// Morse index of a geodesic loop: formula against Hessian oracle.
    Index(IndexArgs),
    /// Upper bound on the minimax energy from sphere families of loops.
    Zeta(ZetaArgs),
    /// Curvature lower bound sup|F| * area >= max|d_i| on connections.
    Gromov(GromovArgs),
    /// Morse-Bott cascade complex and its mod-2 homology.
    Cascade(CascadeArgs),
    /// Write a corpus or family file.
    CorpusGen(CorpusGenArgs),
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct FlowArgs {
    /// Gradient metric: l2, sobolev or kahler [default: sobolev]
    #[arg(long)]
    pub metric: Option<String>,
    /// Initial step size (> 0) [default: 0.5]
    #[arg(long)]
    pub step_size: Option<f64>,
    /// Step cap [default: 4000]
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Stop when the gradient norm falls below this (> 0) [default: 1e-6]
    #[arg(long)]
    pub grad_tol: Option<f64>,
    /// Weight snapping tolerance in (0, 0.5) [default: 0.05]
    #[arg(long)]
    pub snap_tol: Option<f64>,
}

impl FlowArgs {
    fn merge(&mut self, cfg: FlowArgs) {
        take_missing!(self, cfg; metric, step_size, max_steps, grad_tol, snap_tol);
    }

    pub fn to_config(&self) -> Result<FlowConfig> {
        let mut cfg = FlowConfig::default();
        if let Some(m) = &self.metric {
            cfg.metric = m.parse::<FlowMetric>()?;
        }
        if let Some(x) = self.step_size {
            cfg.step_size = x;
        }
        if let Some(x) = self.max_steps {
            cfg.max_steps = x;
        }
        if let Some(x) = self.grad_tol {
            cfg.grad_tol = x;
        }
        if let Some(x) = self.snap_tol {
            cfg.snap_tol = x;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Fill `None` fields of the command line from the config file.
macro_rules! take_missing {
    ($cli:ident, $cfg:ident; $($f:ident),*) => {
        $( if $cli.$f.is_none() { $cli.$f = $cfg.$f; } )*
    };
}
use take_missing;

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct SplitArgs {
    /// Corpus, corpus entry, connection, discrete loop or Laurent loop (JSON)
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Check the built-in corpus instead of a file
    #[arg(long)]
    pub standard: bool,
    /// Seed for the built-in corpus [default: 2024]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Samples used when a Laurent loop is unitarized [default: 64]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Radius of the round sphere metric [default: 1]
    #[arg(long)]
    pub radius: Option<f64>,
    /// Per-entry table
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Full per-entry reports
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub flow: FlowArgs,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct IndexArgs {
    /// Group rank; must match the weights when both are given
    #[arg(long)]
    pub rank: Option<usize>,
    /// Weights such as "1,-1" or "(2,-1,-1)"
    #[arg(long, allow_hyphen_values = true)]
    pub weights: Option<String>,
    /// Loop samples, at least 8 [default: 128]
    #[arg(long)]
    pub n: Option<usize>,
    /// Repeat at 2N and require the same index
    #[arg(long)]
    pub refine: bool,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct ZetaArgs {
    /// Family files (one family or an array of families each)
    #[arg(long)]
    pub family: Vec<PathBuf>,
    /// Add the SU(2) degree generator family at this octahedral resolution (>= 16)
    #[arg(long)]
    pub generator: Option<usize>,
    /// Add the constant SU(2) family
    #[arg(long)]
    pub constant: bool,
    /// Add the generator family and a geodesic sample set of higher energy
    #[arg(long)]
    pub mixed: bool,
    /// Block-stabilize every family by this many trivial summands
    #[arg(long)]
    pub stabilize: Option<usize>,
    /// Seed for random conjugators [default: 2024]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Per-sample table
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Summary with the upper bound
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub flow: FlowArgs,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct GromovArgs {
    /// Corpus, corpus entry or connection (JSON)
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Check the connections of the built-in corpus
    #[arg(long)]
    pub standard: bool,
    /// Seed for the built-in corpus [default: 2024]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Radius of the round sphere metric [default: 1]
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct CascadeArgs {
    /// torus, sphere-perfect, sphere-equator or loop-space [default: torus]
    #[arg(long)]
    pub problem: Option<String>,
    /// Rank for the loop-space complex, 1..=3 [default: 2]
    #[arg(long)]
    pub rank: Option<usize>,
    /// Index bound for the loop-space complex [default: 2 rank - 2]
    #[arg(long)]
    pub index_bound: Option<usize>,
    /// Generator table
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Complex and Betti numbers
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct CorpusGenArgs {
    /// triangle, generator, constant or mixed [default: triangle]
    #[arg(long)]
    pub kind: Option<String>,
    /// [default: 2024]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Octahedral resolution of generator families (>= 16) [default: 16]
    #[arg(long)]
    pub resolution: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
struct ConfigFile {
    split: Option<SplitArgs>,
    index: Option<IndexArgs>,
    zeta: Option<ZetaArgs>,
    gromov: Option<GromovArgs>,
    cascade: Option<CascadeArgs>,
    corpus_gen: Option<CorpusGenArgs>,
}

const DEFAULT_SEED: u64 = 2024;

/// Apply the config file under the command-line flags.
pub fn resolve(cli: Cli) -> Result<Command> {
    let Some(path) = cli.config else {
        return Ok(cli.command);
    };
    let cfg: ConfigFile = serde_json::from_str(&fs::read_to_string(&path)?)?;
    Ok(match cli.command {
        Command::Split(mut a) => {
            if let Some(c) = cfg.split {
                take_missing!(a, c; input, seed, samples, radius, csv, json);
                a.standard |= c.standard;
                a.flow.merge(c.flow);
            }
            Command::Split(a)
        }
        Command::Index(mut a) => {
            if let Some(c) = cfg.index {
                take_missing!(a, c; rank, weights, n, json);
                a.refine |= c.refine;
            }
            Command::Index(a)
        }
        Command::Zeta(mut a) => {
            if let Some(c) = cfg.zeta {
                take_missing!(a, c; generator, stabilize, seed, csv, json);
                if a.family.is_empty() {
                    a.family = c.family;
                }
                a.constant |= c.constant;
                a.mixed |= c.mixed;
                a.flow.merge(c.flow);
            }
            Command::Zeta(a)
        }
        Command::Gromov(mut a) => {
            if let Some(c) = cfg.gromov {
                take_missing!(a, c; input, seed, radius, csv, json);
                a.standard |= c.standard;
            }
            Command::Gromov(a)
        }
        Command::Cascade(mut a) => {
            if let Some(c) = cfg.cascade {
                take_missing!(a, c; problem, rank, index_bound, csv, json);
            }
            Command::Cascade(a)
        }
        Command::CorpusGen(mut a) => {
            if let Some(c) = cfg.corpus_gen {
                take_missing!(a, c; kind, seed, out, resolution);
            }
            Command::CorpusGen(a)
        }
    })
}

/// Size the global rayon pool from `JUMPLAB_THREADS`, if set.
pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Error::Argument(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
    if n == 0 {
        return Err(Error::Argument(format!("{THREADS_ENV} must be positive")));
    }
    // a pool that already exists (e.g. in tests) is fine
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Run a parsed command line; `Ok(false)` means a verification failed.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<bool> {
    match resolve(cli)? {
        Command::Split(a) => cmd_split(&a, out),
        Command::Index(a) => cmd_index(&a, out),
        Command::Zeta(a) => cmd_zeta(&a, out),
        Command::Gromov(a) => cmd_gromov(&a, out),
        Command::Cascade(a) => cmd_cascade(&a, out),
        Command::CorpusGen(a) => cmd_corpus_gen(&a, out),
    }
}

fn show(d: &Option<WeightVector>) -> String {
    d.as_ref().map_or_else(|| "-".into(), |d| d.to_string())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn metric_for(radius: Option<f64>) -> Result<SphereMetric> {
    SphereMetric::round(radius.unwrap_or(1.0))
}

/// Read any of the object kinds the subcommands accept and wrap them as entries.
pub fn load_entries(path: &Path, samples: usize) -> Result<Vec<CorpusEntry>> {
    let text = fs::read_to_string(path)?;
    let v: serde_json::Value = serde_json::from_str(&text)?;
    let name = path.file_stem().map_or_else(|| "input".into(), |s| s.to_string_lossy().into_owned());
    let has = |k: &str| v.get(k).is_some();
    if has("entries") {
        return Ok(serde_json::from_value::<Corpus>(v)?.entries);
    }
    if has("object") {
        return Ok(vec![serde_json::from_value::<CorpusEntry>(v)?]);
    }
    if has("north") {
        let a: TwoChartConnection = serde_json::from_value(v)?;
        a.validate()?;
        return Ok(vec![CorpusEntry {
            name,
            label: a.label.clone(),
            object: CorpusObject::Connection { data: Box::new(a) },
        }]);
    }
    if has("coeffs") {
        let data: LaurentLoop = serde_json::from_value(v)?;
        data.validate(DEFAULT_CONDITION_CAP)?;
        return Ok(vec![CorpusEntry {
            name,
            label: None,
            object: CorpusObject::Laurent { data, samples },
        }]);
    }
    if has("samples") {
        let data: DiscreteLoop = serde_json::from_value(v)?;
        data.validate()?;
        return Ok(vec![CorpusEntry {
            name,
            label: None,
            object: CorpusObject::Loop { data },
        }]);
    }
    Err(Error::Argument(format!(
        "{}: not a corpus, corpus entry, connection, discrete loop or Laurent loop",
        path.display()
    )))
}

fn entries_from(input: &Option<PathBuf>, standard: bool, seed: Option<u64>, samples: usize) -> Result<Vec<CorpusEntry>> {
    match (input, standard) {
        (Some(p), false) => load_entries(p, samples),
        (None, true) => Ok(standard_corpus(seed.unwrap_or(DEFAULT_SEED))?.entries),
        _ => Err(Error::Argument("give exactly one of --input and --standard".into())),
    }
}

#[derive(Debug, Serialize)]
struct SplitRow {
    name: String,
    label: String,
    flow: String,
    oracle: String,
    agree: bool,
    start_energy: f64,
    final_energy: f64,
    steps: usize,
    monotone: bool,
    det_winding: Option<i64>,
    chern_integral: Option<f64>,
    error: Option<String>,
}

impl From<&EntryReport> for SplitRow {
    fn from(r: &EntryReport) -> Self {
        SplitRow {
            name: r.name.clone(),
            label: show(&r.label),
            flow: show(&r.flow),
            oracle: show(&r.oracle),
            agree: r.agree(),
            start_energy: r.start_energy,
            final_energy: r.final_energy,
            steps: r.steps,
            monotone: r.monotone,
            det_winding: r.det_winding,
            chern_integral: r.chern_integral,
            error: r.error.clone(),
        }
    }
}

pub fn cmd_split(a: &SplitArgs, out: &mut dyn Write) -> Result<bool> {
    let cfg = a.flow.to_config()?;
    let metric = metric_for(a.radius)?;
    let samples = a.samples.unwrap_or(CORPUS_LOOP_SAMPLES);
    if samples < 8 {
        return Err(Error::Argument("--samples must be at least 8".into()));
    }
    let entries = entries_from(&a.input, a.standard, a.seed, samples)?;
    let corpus = Corpus { seed: 0, entries };
    let reports = check_corpus(&corpus, &cfg, &metric);
    writeln!(out, "{:<44} {:>14} {:>14} {:>14} {:>10} {:>10} {:>6}  agree", "entry", "label", "flow", "oracle", "E start", "E final", "steps")?;
    for r in &reports {
        writeln!(
            out,
            "{:<44} {:>14} {:>14} {:>14} {:>10.4} {:>10.6} {:>6}  {}",
            r.name,
            show(&r.label),
            show(&r.flow),
            show(&r.oracle),
            r.start_energy,
            r.final_energy,
            r.steps,
            if r.agree() { "yes" } else { "NO" }
        )?;
        if let Some(e) = &r.error {
            writeln!(out, "    error: {e}")?;
        }
    }
    let agree = reports.iter().filter(|r| r.agree()).count();
    writeln!(out, "agreement {agree}/{}", reports.len())?;
    if let Some(p) = &a.csv {
        let rows: Vec<SplitRow> = reports.iter().map(SplitRow::from).collect();
        write_csv(p, &rows)?;
    }
    if let Some(p) = &a.json {
        write_json(p, &reports)?;
    }
    Ok(agree == reports.len())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexReport {
    pub weights: WeightVector,
    pub rank: usize,
    /// Calibrated formula value; absent for constant weights.
    pub formula: Option<i64>,
    /// Negative eigenvalue counts of the Hessian at each N tried.
    pub oracle: Vec<(usize, usize)>,
    pub lower_bound: i64,
    pub comparison: String,
    pub note: Option<String>,
}

pub fn cmd_index(a: &IndexArgs, out: &mut dyn Write) -> Result<bool> {
    let d: WeightVector = a
        .weights
        .as_deref()
        .ok_or_else(|| Error::Argument("--weights is required".into()))?
        .parse()?;
    let r = a.rank.unwrap_or(d.rank());
    if r != d.rank() {
        return Err(Error::Argument(format!("rank {r} does not match weights {d}")));
    }
    let n = a.n.unwrap_or(128);
    if n < 8 {
        return Err(Error::Argument("--n must be at least 8".into()));
    }
    let lower_bound = 2 * r as i64 - 2;
    let mut rep = IndexReport {
        weights: d.clone(),
        rank: r,
        formula: None,
        oracle: Vec::new(),
        lower_bound,
        comparison: String::new(),
        note: None,
    };
    let ok = if d.is_constant() {
        rep.oracle.push((n, 0));
        rep.comparison = "index 0".into();
        rep.note = Some("constant weights: the loop is a minimum and the formula is inapplicable".into());
        writeln!(out, "weights {d}: index 0 (formula inapplicable to constant weights)")?;
        true
    } else {
        let formula = formula_morse_index(&d)?;
        rep.formula = Some(formula);
        let sizes: Vec<usize> = if a.refine { vec![n, 2 * n] } else { vec![n] };
        for &m in &sizes {
            let gamma = geodesic_loop(&d, &crate::linalg::identity(r), m, d.sum() == 0)?;
            let h = hessian_report(&gamma, Some(orbit_dimension(&d)))?;
            if let Some(w) = &h.warning {
                writeln!(out, "warning at N = {m}: {w}")?;
            }
            rep.oracle.push((m, h.negative));
        }
        let oracle = rep.oracle[0].1 as i64;
        rep.comparison = match oracle.cmp(&lower_bound) {
            std::cmp::Ordering::Greater => format!("{oracle} > 2r-2 = {lower_bound}"),
            std::cmp::Ordering::Equal => format!("{oracle} = 2r-2 = {lower_bound}"),
            std::cmp::Ordering::Less => format!("{oracle} < 2r-2 = {lower_bound}"),
        };
        writeln!(out, "weights {d} in rank {r}")?;
        writeln!(out, "formula index {formula}")?;
        for (m, k) in &rep.oracle {
            writeln!(out, "oracle index {k} at N = {m}")?;
        }
        writeln!(out, "{}", rep.comparison)?;
        let stable = rep.oracle.iter().all(|(_, k)| *k as i64 == oracle);
        if !stable {
            writeln!(out, "oracle index changes under refinement")?;
        }
        stable && oracle == formula
    };
    if let Some(p) = &a.json {
        write_json(p, &rep)?;
    }
    Ok(ok)
}

/// Read one family or an array of families.
pub fn load_families(path: &Path) -> Result<Vec<ConnectionFamily>> {
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    let fams = if v.is_array() {
        serde_json::from_value::<Vec<ConnectionFamily>>(v)?
    } else {
        vec![serde_json::from_value::<ConnectionFamily>(v)?]
    };
    for f in &fams {
        f.validate()?;
    }
    Ok(fams)
}

/// Generator family plus a sample set through two higher geodesics.
pub fn mixed_families(resolution: usize, seed: u64) -> Result<Vec<ConnectionFamily>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let higher = [WeightVector::new(vec![2, -2]), WeightVector::new(vec![1, -1])];
    Ok(vec![
        su2_degree_generator_family(resolution)?,
        geodesic_family("geodesic samples (2,-2), (1,-1)", &higher, 32, &mut rng)?,
    ])
}

#[derive(Debug, Serialize)]
struct ZetaRow {
    family: String,
    index: usize,
    weights: String,
    energy: Option<i64>,
    sup: Option<i64>,
    oracle: String,
    oracle_agrees: Option<bool>,
    error: Option<String>,
}

pub fn cmd_zeta(a: &ZetaArgs, out: &mut dyn Write) -> Result<bool> {
    let cfg = a.flow.to_config()?;
    let seed = a.seed.unwrap_or(DEFAULT_SEED);
    let mut families = Vec::new();
    for p in &a.family {
        families.extend(load_families(p)?);
    }
    if let Some(res) = a.generator {
        families.push(su2_degree_generator_family(res)?);
    }
    if a.constant {
        families.push(constant_family(2, 8, 32));
    }
    if a.mixed {
        families.extend(mixed_families(a.generator.unwrap_or(16), seed)?);
    }
    if families.is_empty() {
        return Err(Error::Argument("no family given (--family, --generator, --constant or --mixed)".into()));
    }
    if let Some(k) = a.stabilize {
        families = families.iter().map(|f| f.stabilized(k)).collect::<Result<_>>()?;
    }
    let energies: Vec<FamilyEnergy> = families.iter().map(|f| family_sup_energy(f, &cfg)).collect::<Result<_>>()?;
    let bound = zeta_from_energies(&families, &energies)?;
    let mut disagreements = 0;
    let mut rows = Vec::new();
    writeln!(out, "{:<40} {:>8} {:>6} {:>6} {:>10} {:>10}", "family", "samples", "sup A", "sup", "complete", "disagree")?;
    for (f, e) in families.iter().zip(&energies) {
        disagreements += e.disagreements;
        writeln!(
            out,
            "{:<40} {:>8} {:>6} {:>6} {:>10.3} {:>10}",
            f.name,
            f.len(),
            e.sup_a,
            e.sup_inf,
            e.completeness,
            e.disagreements
        )?;
        for s in &e.per_sample {
            rows.push(ZetaRow {
                family: f.name.clone(),
                index: s.index,
                weights: show(&s.weights),
                energy: s.energy,
                sup: s.sup,
                oracle: show(&s.oracle),
                oracle_agrees: s.oracle_agrees,
                error: s.error.clone(),
            });
        }
    }
    writeln!(out, "{} {}", bound.kind, bound.upper_bound)?;
    if let Some(p) = &a.csv {
        write_csv(p, &rows)?;
    }
    if let Some(p) = &a.json {
        write_json(p, &bound)?;
    }
    Ok(disagreements == 0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GromovRow {
    pub name: String,
    pub weights: String,
    pub sup_norm: Option<f64>,
    pub area: Option<f64>,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub satisfied: bool,
    pub error: Option<String>,
}

fn gromov_row(e: &CorpusEntry, metric: &SphereMetric) -> GromovRow {
    let mut row = GromovRow {
        name: e.name.clone(),
        weights: show(&e.label),
        sup_norm: None,
        area: None,
        lhs: None,
        rhs: None,
        satisfied: false,
        error: None,
    };
    let res = (|| -> Result<()> {
        let a = e
            .object
            .connection()?
            .ok_or_else(|| Error::Argument("not a connection".into()))?;
        let d = match &e.label {
            Some(d) => d.clone(),
            None => splitting_type(&loop_to_laurent_auto(&radial_trivialization(&a, CORPUS_LOOP_SAMPLES)?)?)?,
        };
        let g = gromov_check(&a, metric, &d)?;
        row.weights = d.to_string();
        row.sup_norm = Some(g.sup_norm);
        row.area = Some(g.area);
        row.lhs = Some(g.lhs);
        row.rhs = Some(g.rhs);
        row.satisfied = g.satisfied;
        Ok(())
    })();
    if let Err(err) = res {
        row.error = Some(err.to_string());
    }
    row
}

pub fn cmd_gromov(a: &GromovArgs, out: &mut dyn Write) -> Result<bool> {
    let metric = metric_for(a.radius)?;
    let entries: Vec<CorpusEntry> = entries_from(&a.input, a.standard, a.seed, CORPUS_LOOP_SAMPLES)?
        .into_iter()
        .filter(|e| e.is_connection())
        .collect();
    if entries.is_empty() {
        return Err(Error::Argument("input holds no connection".into()));
    }
    let rows: Vec<GromovRow> = entries.par_iter().map(|e| gromov_row(e, &metric)).collect();
    writeln!(out, "{:<44} {:>14} {:>12} {:>6} {:>10}", "entry", "weights", "lhs", "rhs", "satisfied")?;
    let fmt = |x: Option<f64>, p: usize| x.map_or_else(|| "-".into(), |v| format!("{v:.p$}"));
    for r in &rows {
        writeln!(
            out,
            "{:<44} {:>14} {:>12} {:>6} {:>10}",
            r.name,
            r.weights,
            fmt(r.lhs, 6),
            fmt(r.rhs, 0),
            if r.satisfied { "yes" } else { "NO" }
        )?;
        if let Some(e) = &r.error {
            writeln!(out, "    error: {e}")?;
        }
    }
    let ok = rows.iter().filter(|r| r.satisfied).count();
    writeln!(out, "satisfied {ok}/{}", rows.len())?;
    if let Some(p) = &a.csv {
        write_csv(p, &rows)?;
    }
    if let Some(p) = &a.json {
        write_json(p, &rows)?;
    }
    Ok(ok == rows.len())
}

#[derive(Debug, Serialize)]
struct CascadeSummary<'a> {
    problem: String,
    complex: &'a CascadeComplexData,
    expected_betti: Option<Vec<usize>>,
}

pub fn cmd_cascade(a: &CascadeArgs, out: &mut dyn Write) -> Result<bool> {
    let problem = a.problem.clone().unwrap_or_else(|| "torus".into());
    let (data, expected) = if problem == "loop-space" {
        let r = a.rank.unwrap_or(2);
        let bound = a.index_bound.unwrap_or(2 * r.max(1) - 2);
        (perfect_complex_for_weights(r, bound)?, None)
    } else {
        let b: Builtin = problem.parse()?;
        (cascade_complex(&MorseBottProblem::builtin(b))?, Some(b.singular_betti()))
    };
    writeln!(out, "problem {problem}")?;
    writeln!(out, "generators")?;
    for (l, d) in data.labels.iter().zip(&data.degrees) {
        writeln!(out, "  {d}  {l}")?;
    }
    writeln!(out, "differential")?;
    let mut any = false;
    for (i, row) in data.differential.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c != 0 {
                any = true;
                writeln!(out, "  d {} -> {}", data.labels[i], data.labels[j])?;
            }
        }
    }
    if !any {
        writeln!(out, "  zero")?;
    }
    let mut per_degree: BTreeMap<usize, usize> = BTreeMap::new();
    for &d in &data.degrees {
        *per_degree.entry(d).or_default() += 1;
    }
    writeln!(out, "degree  generators  betti")?;
    for (k, b) in data.betti.iter().enumerate() {
        writeln!(out, "{k:>6}  {:>10}  {b:>5}", per_degree.get(&k).copied().unwrap_or(0))?;
    }
    let ok = match &expected {
        Some(e) => {
            writeln!(out, "expected betti {e:?}")?;
            data.betti == *e
        }
        // perfect: nothing in odd degrees
        None => data.degrees.iter().all(|d| d % 2 == 0),
    };
    if let Some(p) = &a.csv {
        #[derive(Serialize)]
        struct Row<'a> {
            label: &'a str,
            degree: usize,
        }
        let rows: Vec<Row> = data
            .labels
            .iter()
            .zip(&data.degrees)
            .map(|(l, d)| Row { label: l, degree: *d })
            .collect();
        write_csv(p, &rows)?;
    }
    if let Some(p) = &a.json {
        write_json(
            p,
            &CascadeSummary {
                problem,
                complex: &data,
                expected_betti: expected,
            },
        )?;
    }
    Ok(ok)
}

pub fn cmd_corpus_gen(a: &CorpusGenArgs, out: &mut dyn Write) -> Result<bool> {
    let seed = a.seed.unwrap_or(DEFAULT_SEED);
    let res = a.resolution.unwrap_or(16);
    let kind = a.kind.as_deref().unwrap_or("triangle");
    let text = match kind {
        "triangle" => serde_json::to_string_pretty(&standard_corpus(seed)?)?,
        "generator" => serde_json::to_string_pretty(&su2_degree_generator_family(res)?)?,
        "constant" => serde_json::to_string_pretty(&constant_family(2, 8, 32))?,
        "mixed" => serde_json::to_string_pretty(&mixed_families(res, seed)?)?,
        other => {
            return Err(Error::Argument(format!(
                "unknown corpus kind '{other}' (triangle, generator, constant, mixed)"
            )))
        }
    };
    match &a.out {
        Some(p) => {
            fs::write(p, text + "\n")?;
            writeln!(out, "wrote {kind} corpus to {}", p.display())?;
        }
        None => writeln!(out, "{text}")?,
    }
    Ok(true)
}
