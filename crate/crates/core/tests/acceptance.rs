//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::{Duration, Instant};

use jumplab::birkhoff::WINDING_SIGN;
use jumplab::bundle::{gromov_check, SphereMetric};
use jumplab::cascade::{cascade_complex, perfect_complex_for_weights, Builtin, CascadeComplexData, MorseBottProblem};
use jumplab::corpus::{check_corpus, standard_corpus, Corpus, EntryReport};
use jumplab::flow::FlowConfig;
use jumplab::invariants::{family_sup_energy, skeleton_energy, su2_degree_generator_family};
use jumplab::linalg::{identity, random_unitary};
use jumplab::loopspace::{
    energy_gradient, formula_morse_index, geodesic_loop, hessian_report, loop_energy, orbit_dimension, LoopTangent,
    WeightVector,
};
use jumplab::liegroup::GroupSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_weights(rng: &mut ChaCha8Rng) -> WeightVector {
    let r = rng.random_range(1..=4);
    WeightVector::new((0..r).map(|_| rng.random_range(-3..=3)).collect())
}

fn geodesic_energy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let d = random_weights(&mut rng);
        let q = random_unitary(d.rank(), &mut rng);
        let gamma = match geodesic_loop(&d, &q, 512, d.sum() == 0) {
            Ok(g) => g,
            Err(e) => return outcome(false, format!("{d}: {e}")),
        };
        let e = loop_energy(&gamma).unwrap_or(f64::NAN);
        let want = d.energy() as f64;
        let err = if want == 0.0 { e.abs() } else { (e - want).abs() / want };
        worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
    }
    outcome(worst <= 1e-5, format!("20 cases at N = 512, worst relative error {worst:.2e} (tol 1e-5)"))
}

fn gradient_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let n = 32;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let r = rng.random_range(2..=4);
        let special = rng.random_bool(0.5);
        let spec = if special { GroupSpec::special_unitary(r) } else { GroupSpec::unitary(r) };
        let d = WeightVector::new((0..r).map(|i| if i == 0 { 1 } else { 0 }).collect());
        let d = if special { WeightVector::zero(r) } else { d };
        let base = geodesic_loop(&d, &random_unitary(r, &mut rng), n, special).expect("geodesic");
        let gamma = base
            .retract(&LoopTangent::random(&spec, n, &mut rng).scaled(0.2))
            .expect("retract");
        let grad = energy_gradient(&gamma).expect("gradient");
        for _ in 0..20 {
            let eta = LoopTangent::random(&spec, n, &mut rng);
            let h = 1e-3;
            let e = |s: f64| loop_energy(&gamma.retract(&eta.scaled(s)).expect("retract")).expect("energy");
            // fourth-order central stencil
            let fd = (8.0 * (e(h) - e(-h)) - (e(2.0 * h) - e(-2.0 * h))) / (12.0 * h);
            let an = grad.pairing(&eta, &spec);
            worst = worst.max((fd - an).abs() / an.abs().max(1e-3));
        }
    }
    outcome(worst <= 1e-5, format!("20 loops x 20 tangents, worst relative error {worst:.2e} (tol 1e-5)"))
}

fn triangle(corpus: &Corpus, reports: &[EntryReport]) -> Outcome {
    let bad: Vec<String> = reports
        .iter()
        .filter(|r| !r.agree())
        .map(|r| format!("{} label {:?} flow {:?} oracle {:?}", r.name, r.label, r.flow, r.oracle))
        .collect();
    let in_range = corpus
        .entries
        .iter()
        .all(|e| e.label.as_ref().is_some_and(|d| d.rank() <= 4 && d.sup_norm() <= 3));
    let pass = bad.is_empty() && reports.len() >= 50 && in_range;
    let mut detail = format!(
        "{}/{} entries with label = flow = oracle ({} connections)",
        reports.len() - bad.len(),
        reports.len(),
        corpus.entries.iter().filter(|e| e.is_connection()).count()
    );
    for b in bad.iter().take(5) {
        detail.push_str(&format!("; {b}"));
    }
    outcome(pass, detail)
}

fn monotone(reports: &[EntryReport], cfg: &FlowConfig) -> Outcome {
    let non_monotone = reports.iter().filter(|r| !r.monotone).count();
    let worst_gap = reports
        .iter()
        .map(|r| r.energy_gap().unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    let tol = 10.0 * cfg.grad_tol;
    outcome(
        non_monotone == 0 && worst_gap <= tol,
        format!("{non_monotone} non-monotone sequences, worst limit energy gap {worst_gap:.2e} (tol {tol:.0e})"),
    )
}

fn morse_indices() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for d in [vec![1, -1], vec![2, -2], vec![3, -3], vec![1, 0, -1]] {
        let d = WeightVector::new(d);
        let r = d.rank();
        let mut idx = Vec::new();
        for n in [128, 256] {
            let gamma = geodesic_loop(&d, &identity(r), n, true).expect("geodesic");
            match hessian_report(&gamma, Some(orbit_dimension(&d))) {
                Ok(h) => idx.push(h.negative as i64),
                Err(e) => return outcome(false, format!("{d} at N = {n}: {e}")),
            }
        }
        let formula = formula_morse_index(&d).expect("formula");
        let stable = idx[0] == idx[1];
        let bound_ok = if d.sup_norm() >= 2 { idx[0] > 2 * r as i64 - 2 } else { true };
        let unit_ok = d.as_slice() != [1, -1] || idx[0] == 2;
        pass &= stable && bound_ok && unit_ok && formula == idx[0];
        parts.push(format!("{d}: {}/{} formula {formula}", idx[0], idx[1]));
    }
    outcome(pass, format!("index at N = 128/256: {}", parts.join(", ")))
}

fn chern_weil(reports: &[EntryReport]) -> Outcome {
    let conn: Vec<&EntryReport> = reports.iter().filter(|r| r.chern_integral.is_some()).collect();
    let worst = conn.iter().filter_map(|r| r.chern_residue()).fold(0.0, f64::max);
    let mismatched = conn
        .iter()
        .filter(|r| r.chern_number().is_none() || r.chern_number() != r.det_winding.map(|w| WINDING_SIGN * w))
        .count();
    outcome(
        !conn.is_empty() && worst < 1e-3 && mismatched == 0,
        format!(
            "{} connections, worst residue {worst:.2e} (tol 1e-3), {mismatched} mismatches with det winding",
            conn.len()
        ),
    )
}

fn gromov(corpus: &Corpus) -> Outcome {
    let g = SphereMetric::unit();
    let mut total = 0;
    let mut violations = Vec::new();
    let mut jumping_sup = BTreeSet::new();
    let mut jumping = 0;
    for e in corpus.entries.iter().filter(|e| e.is_connection()) {
        let d = e.label.clone().expect("corpus entries are labelled");
        let a = e.object.connection().expect("connection").expect("connection");
        total += 1;
        match gromov_check(&a, &g, &d) {
            Ok(rec) if rec.lhs >= rec.rhs - 1e-3 => {}
            Ok(rec) => violations.push(format!("{}: {:.4} < {}", e.name, rec.lhs, rec.rhs)),
            Err(err) => violations.push(format!("{}: {err}", e.name)),
        }
        if e.is_perturbed_jumping() {
            jumping += 1;
            jumping_sup.insert(d.sup_norm());
        }
    }
    let coverage = jumping >= 10 && jumping_sup.contains(&1) && jumping_sup.contains(&2);
    let mut detail = format!(
        "{}/{total} connections satisfy sup|F| area >= max|d| - 1e-3, {jumping} gauge-perturbed jumping (max|d| in {jumping_sup:?})",
        total - violations.len()
    );
    for v in violations.iter().take(5) {
        detail.push_str(&format!("; {v}"));
    }
    outcome(violations.is_empty() && coverage, detail)
}

fn zeta_generator(cfg: &FlowConfig) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for res in [16, 32] {
        let f = su2_degree_generator_family(res).expect("family");
        match family_sup_energy(&f, cfg) {
            Ok(e) => {
                pass &= e.sup_a == 2 && e.completeness == 1.0;
                parts.push(format!("res {res}: sup {} over {} samples", e.sup_a, f.len()));
            }
            Err(err) => return outcome(false, format!("res {res}: {err}")),
        }
    }
    let base = su2_degree_generator_family(16).expect("family");
    for k in [1, 2] {
        let f = base.stabilized(k).expect("stabilized");
        match family_sup_energy(&f, cfg) {
            Ok(e) => {
                pass &= e.sup_a <= 2 && 2 <= 2 + k as i64 && e.completeness == 1.0;
                parts.push(format!("rank {}: sup {} <= 2 <= {}", 2 + k, e.sup_a, 2 + k));
            }
            Err(err) => return outcome(false, format!("k = {k}: {err}")),
        }
    }
    outcome(pass, parts.join(", "))
}

fn skeleton() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in [2usize, 3] {
        // every traceless sorted vector with entries in {-1, 0, 1}
        let mut expected = BTreeSet::new();
        for code in 0..3usize.pow(r as u32) {
            let mut v: Vec<i64> = (0..r).map(|i| (code / 3usize.pow(i as u32) % 3) as i64 - 1).collect();
            if v.iter().sum::<i64>() == 0 {
                v.sort_unstable_by(|a, b| b.cmp(a));
                expected.insert(WeightVector::new(v));
            }
        }
        let got: BTreeSet<WeightVector> = skeleton_energy(2 * r - 2, r).weights.into_iter().collect();
        pass &= got == expected;
        parts.push(format!(
            "r = {r}: {}",
            got.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ")
        ));
    }
    outcome(pass, parts.join("; "))
}

fn boundary_squares_to_zero(c: &CascadeComplexData) -> bool {
    let n = c.labels.len();
    (0..n).all(|i| (0..n).all(|k| (0..n).fold(0u8, |acc, j| acc ^ (c.differential[i][j] & c.differential[j][k])) == 0))
}

fn cascade() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for b in Builtin::ALL {
        match cascade_complex(&MorseBottProblem::builtin(b)) {
            Ok(c) => {
                let want = match b {
                    Builtin::Torus => vec![1, 2, 1],
                    _ => vec![1, 0, 1],
                };
                pass &= c.betti == want && boundary_squares_to_zero(&c);
                parts.push(format!("{b} {:?}", c.betti));
            }
            Err(e) => return outcome(false, format!("{b}: {e}")),
        }
    }
    match perfect_complex_for_weights(2, 2) {
        Ok(c) => {
            let mut degrees = c.degrees.clone();
            degrees.sort_unstable();
            pass &= degrees == [0, 2, 4] && boundary_squares_to_zero(&c);
            parts.push(format!("loop space r = 2 degrees {degrees:?}"));
        }
        Err(e) => return outcome(false, format!("perfect complex: {e}")),
    }
    outcome(pass, parts.join(", "))
}

fn main() {
    let out = std::io::stdout();
    let mut out = out.lock();
    let mut failures = 0;
    let mut report = |id: usize, name: &str, limit: Option<Duration>, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let mut o = f();
        let elapsed = t.elapsed();
        if let Some(limit) = limit {
            if elapsed > limit {
                o.pass = false;
                o.detail.push_str(&format!("; runtime over {}s", limit.as_secs()));
            }
        }
        if !o.pass {
            failures += 1;
        }
        writeln!(
            out,
            "criterion {id:>2} [{}] {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        )
        .expect("stdout");
    };
    let cfg = FlowConfig::default();
    report(1, "geodesic energy", Some(Duration::from_secs(10)), &mut geodesic_energy);
    report(2, "gradient correctness", Some(Duration::from_secs(30)), &mut gradient_check);
    let t = Instant::now();
    let corpus = standard_corpus(2024).expect("corpus");
    let reports = check_corpus(&corpus, &cfg, &SphereMetric::unit());
    let corpus_time = t.elapsed();
    report(3, "splitting triangle", Some(Duration::from_secs(300)), &mut || {
        let mut o = triangle(&corpus, &reports);
        if corpus_time > Duration::from_secs(300) {
            o.pass = false;
        }
        o.detail.push_str(&format!(", corpus check {:.1}s", corpus_time.as_secs_f64()));
        o
    });
    report(4, "monotone flow", None, &mut || monotone(&reports, &cfg));
    report(5, "Morse indices", Some(Duration::from_secs(300)), &mut morse_indices);
    report(6, "Chern-Weil integrality", None, &mut || chern_weil(&reports));
    report(7, "curvature lower bound", None, &mut || gromov(&corpus));
    report(8, "generator family energy", Some(Duration::from_secs(600)), &mut || zeta_generator(&cfg));
    report(9, "skeleton energy", None, &mut skeleton);
    report(10, "cascade homology", Some(Duration::from_secs(120)), &mut cascade);
    writeln!(out, "{} of 10 criteria failed", failures).expect("stdout");
    if failures > 0 {
        std::process::exit(1);
    }
}
