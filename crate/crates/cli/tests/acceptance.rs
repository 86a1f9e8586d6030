//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines are always printed. The
//! process fails if any criterion fails, except that criterion 3 may report
//! FAIL for runs stopped by the family-size cap as long as every completed
//! run verifies.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use boxnorm_cli::fixtures::OracleConstants;
use boxnorm_cli::{run, ExperimentConfig, RunOptions};
use boxnorm_core::equidist::{
    cal_h_density, count_linear_solutions, linear_bound_rhs, linear_sweep, max_normalized_count_single_block,
    normalized_count, Mode, MultilinearSystem, Targets, DEFAULT_STATE_LIMIT,
};
use boxnorm_core::lattice::{GenArithProgression, IntMultiset, LatticeVector};
use boxnorm_core::norms::{
    box_norm_power, box_norm_power_direct, box_norm_power_gaps, box_norm_power_split, gcs_inner,
    vdc_inequality_check, LatticeFunction, DEFAULT_WORK_LIMIT,
};
use boxnorm_core::pet::{pet_run, pet_run_with, verify_descendence, PetOptions};
use boxnorm_core::polyalg::{parse_polynomial, Degree, VectorPolynomial};
use boxnorm_core::Error;
use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    /// Reported as FAIL; the checkable part held.
    Unattainable(String),
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

fn p(text: &str, dim: usize) -> VectorPolynomial {
    parse_polynomial(text, dim).unwrap()
}

fn sorted(mut v: Vec<VectorPolynomial>) -> Vec<VectorPolynomial> {
    v.sort();
    v
}

fn promoted(texts: &[String], dim: usize, r: usize) -> Vec<VectorPolynomial> {
    texts.iter().map(|t| p(t, dim).promote(r).unwrap()).collect()
}

fn corner_example() -> Outcome {
    let fam = [p("e1(z^2+z)", 2), p("e2(z^2+z)", 2)];
    let expected = [
        "2(h2+h3)(e2-e1) + 2h1 e2",
        "2h2(e2-e1) + 2h1 e2",
        "2h3(e2-e1) + 2h1 e2",
        "2h1 e2",
        "2(h2+h3)(e2-e1)",
        "2h2(e2-e1)",
        "2h3(e2-e1)",
    ]
    .map(String::from);
    let t = pet_run_with(&fam, &PetOptions { target: 2, ..PetOptions::default() }).unwrap();
    if sorted(t.directions.clone()) == sorted(promoted(&expected, 2, 3)) {
        Outcome::Pass("seven directions match exactly".into())
    } else {
        Outcome::Fail(format!("got {:?}", t.directions.iter().map(|c| c.to_string()).collect::<Vec<_>>()))
    }
}

fn symbolic_family() -> Outcome {
    let cases = [(1, 0, 2, 0), (3, 1, 1, 2), (-2, 5, 1, -1), (4, 0, -3, 7), (2, -3, 5, 0)];
    for (b12, b11, b22, b21) in cases {
        let fam = [p(&format!("{b12}z^2 + {b11}z"), 1), p(&format!("{b22}z^2 + {b21}z"), 1)];
        let g = b12 - b22;
        let expected = [
            format!("2*{g}*h3"),
            format!("2*{g}*h2"),
            format!("2*{g}*(h2+h3)"),
            format!("2*{b12}*h1"),
            format!("2*{g}*h3 + 2*{b12}*h1"),
            format!("2*{g}*h2 + 2*{b12}*h1"),
            format!("2*{g}*(h2+h3) + 2*{b12}*h1"),
        ];
        let t = pet_run(&fam).unwrap();
        if sorted(t.directions.clone()) != sorted(promoted(&expected, 1, 3)) {
            return Outcome::Fail(format!("β = ({b12}, {b11}, {b22}, {b21})"));
        }
    }
    Outcome::Pass(format!("{} instantiations match", cases.len()))
}

fn random_family(rng: &mut ChaCha8Rng) -> Vec<VectorPolynomial> {
    loop {
        let dim = rng.gen_range(1..=2);
        let ell = rng.gen_range(1..=3);
        let d = rng.gen_range(1..=3);
        let fam: Vec<VectorPolynomial> = (0..ell)
            .map(|_| {
                let coeffs: Vec<LatticeVector> = (0..d)
                    .map(|_| LatticeVector::from_i64s(&(0..dim).map(|_| rng.gen_range(-3..=3)).collect::<Vec<_>>()))
                    .collect();
                VectorPolynomial::univariate(&coeffs).unwrap()
            })
            .collect();
        let distinct = fam.iter().enumerate().all(|(i, q)| {
            q.deg_z() >= Degree::Finite(1) && fam[i + 1..].iter().all(|r| q.sub(r).unwrap().deg_z() >= Degree::Finite(1))
        });
        if distinct {
            return fam;
        }
    }
}

fn descendence_grid() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    let (mut done, mut capped, mut violations) = (0, 0, 0);
    for _ in 0..200 {
        let fam = random_family(&mut rng);
        match pet_run(&fam) {
            Ok(t) => {
                done += 1;
                violations += verify_descendence(&t).violations.len();
            }
            Err(Error::CapExceeded { .. }) => capped += 1,
            Err(e) => return Outcome::Fail(format!("{e} on {fam:?}")),
        }
    }
    let detail = format!("{done}/200 completed with {violations} violations, {capped} stopped at the family-size cap");
    if violations > 0 {
        Outcome::Fail(detail)
    } else if capped > 0 {
        Outcome::Unattainable(detail)
    } else {
        Outcome::Pass(detail)
    }
}

fn random_function(rng: &mut ChaCha8Rng, dim: usize, n: i64) -> LatticeFunction {
    let seed = rng.gen();
    match rng.gen_range(0..3) {
        0 => LatticeFunction::random_pm1(dim, n, seed),
        1 => LatticeFunction::random_unimodular(dim, n, seed),
        _ => LatticeFunction::random_bounded(dim, n, seed),
    }
    .unwrap()
}

fn random_multiset(rng: &mut ChaCha8Rng, dim: usize, size: usize, radius: i64) -> IntMultiset {
    let pts = (0..size).map(|_| LatticeVector::from_i64s(&(0..dim).map(|_| rng.gen_range(-radius..=radius)).collect::<Vec<_>>()));
    IntMultiset::from_points(dim, pts).unwrap()
}

fn max_size(s: usize) -> usize {
    [12, 12, 6, 4][s.min(3)]
}

/// Random `f` on `[N]^D` (`D ≤ 2`, `N ≤ 16`) and `s` random multisets.
fn instance(rng: &mut ChaCha8Rng, s: usize) -> (LatticeFunction, Vec<IntMultiset>) {
    let dim = rng.gen_range(1..=2);
    let n = if dim == 1 { rng.gen_range(1..=16) } else { rng.gen_range(1..=8) };
    let f = random_function(rng, dim, n);
    let e = (0..s)
        .map(|_| {
            let size = rng.gen_range(1..=max_size(s));
            random_multiset(rng, dim, size, 3)
        })
        .collect();
    (f, e)
}

fn dual_forms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let s = 1 + i % 3;
        let (f, e) = instance(&mut rng, s);
        let a = box_norm_power(&f, &e).unwrap().power;
        let b = box_norm_power_direct(&f, &e).unwrap().power;
        worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1.0));
        if !close(a, b, 1e-9) {
            return Outcome::Fail(format!("instance {i}: {a} vs {b}"));
        }
    }
    Outcome::Pass(format!("100 instances, worst relative gap {worst:.1e}"))
}

fn property_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..50 {
        let s = 1 + i % 3;
        let (f, e) = instance(&mut rng, s);
        let full = box_norm_power(&f, &e).unwrap().power;
        for k in 0..=s {
            let split = box_norm_power_split(&f, &e, k).unwrap().power;
            if !close(full, split, 1e-9) {
                return Outcome::Fail(format!("inductive formula, instance {i}, k = {k}"));
            }
        }
        let lower = if s == 1 { f.sum().norm_sqr() } else { box_norm_power(&f, &e[..s - 1]).unwrap().power.powi(2) };
        let support = IntMultiset::from_points(f.dim(), f.values().keys().cloned()).unwrap();
        let reach = support.diff(&e[s - 1]).unwrap().support_len() as f64;
        if lower > reach * full + 1e-6 {
            return Outcome::Fail(format!("monotonicity, instance {i}: {lower} > {reach} * {full}"));
        }
        // Permutation and enlarging need at least two sets.
        let (g, mut e2) = instance(&mut rng, 2 + i % 2);
        let base = box_norm_power(&g, &e2).unwrap().power;
        e2.rotate_left(1);
        let rotated = box_norm_power(&g, &e2).unwrap().power;
        e2.reverse();
        let reversed = box_norm_power(&g, &e2).unwrap().power;
        if !close(base, rotated, 1e-9) || !close(base, reversed, 1e-9) {
            return Outcome::Fail(format!("permutation invariance, instance {i}"));
        }
        let bigger: Vec<IntMultiset> = e2
            .iter()
            .map(|m| {
                let size = rng.gen_range(0..=2);
                let extra = random_multiset(&mut rng, g.dim(), size, 3);
                let mut out = m.clone();
                for (v, k) in extra.iter() {
                    out.insert(v.clone(), k).unwrap();
                }
                out
            })
            .collect();
        let ratio: f64 = e2.iter().zip(&bigger).map(|(a, b)| b.total() as f64 / a.total() as f64).product();
        let large = box_norm_power(&g, &bigger).unwrap().power;
        if reversed > ratio * ratio * large + 1e-6 {
            return Outcome::Fail(format!("enlarging, instance {i}"));
        }
        let d = rng.gen_range(1..=3);
        let terms: Vec<(LatticeVector, u64)> = (0..d)
            .map(|_| {
                let c: Vec<i64> = (0..f.dim()).map(|_| rng.gen_range(-3..=3)).collect();
                (LatticeVector::from_i64s(&c), rng.gen_range(0..=3))
            })
            .collect();
        let keep = rng.gen_range(0..d);
        let whole = GenArithProgression::new(f.dim(), terms.clone()).unwrap();
        let prefix = GenArithProgression::new(f.dim(), terms[..keep].to_vec()).unwrap();
        let pw = box_norm_power_gaps(&f, &[whole], DEFAULT_WORK_LIMIT).unwrap().power;
        let pp = box_norm_power_gaps(&f, &[prefix], DEFAULT_WORK_LIMIT).unwrap().power;
        if pw * pw > f.support_len() as f64 * pp + 1e-6 {
            return Outcome::Fail(format!("trimming, instance {i}"));
        }
    }
    Outcome::Pass("5 properties x 50 instances, no violations".into())
}

fn gowers_cauchy_schwarz() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..100 {
        let s = 1 + i % 3;
        let dim = rng.gen_range(1..=2);
        let n = if dim == 1 { 10 } else { 5 };
        let fs: Vec<LatticeFunction> = (0..1 << s).map(|_| random_function(&mut rng, dim, n)).collect();
        let e: Vec<IntMultiset> = (0..s)
            .map(|_| {
                let size = rng.gen_range(1..=max_size(s));
                random_multiset(&mut rng, dim, size, 2)
            })
            .collect();
        let inner = gcs_inner(&fs, &e).unwrap().norm();
        let bound: f64 = fs.iter().map(|f| box_norm_power(f, &e).unwrap().norm()).product();
        if inner > bound + 1e-9 {
            return Outcome::Fail(format!("instance {i}: {inner} > {bound}"));
        }
    }
    Outcome::Pass("100 instances".into())
}

fn van_der_corput() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..200 {
        let k = rng.gen_range(4..=100usize);
        let h = rng.gen_range(1..=(k / 4) as u64);
        let seq: Vec<Complex64> = (0..k)
            .map(|_| Complex64::from_polar(rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        let r = vdc_inequality_check(&seq, h).unwrap();
        let tol = 1e-12 * r.lhs.max(1.0);
        if r.lhs > r.rhs_symmetric + tol || r.lhs > r.rhs_asymmetric + tol {
            return Outcome::Fail(format!("sequence {i}: {r:?}"));
        }
    }
    Outcome::Pass("200 sequences, both forms".into())
}

fn linear_bound(constants: &OracleConstants) -> Outcome {
    let lc = &constants.linear_bound;
    let mut maxima = Vec::new();
    for ell in 1..=3usize {
        let c = lc.c[&ell];
        let best = linear_sweep(ell, lc.max_h, lc.max_m).unwrap().iter().map(|r| r.ratio).fold(0.0, f64::max);
        if !best.is_finite() || best > c {
            return Outcome::Fail(format!("ℓ = {ell}: grid maximum {best} vs C = {c}"));
        }
        maxima.push(best);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..10_000 {
        let ell = rng.gen_range(1..=3usize);
        let h: Vec<i64> = (0..ell)
            .map(|_| rng.gen_range(1..=lc.max_h) * if rng.gen() { 1 } else { -1 })
            .collect();
        let m = rng.gen_range(1..=lc.max_m);
        let reach: i64 = h.iter().map(|x| x.abs()).sum::<i64>() * m as i64;
        let target = rng.gen_range(-reach..=reach);
        let count = count_linear_solutions(&h, m, target).unwrap() as f64;
        let rhs = linear_bound_rhs(&h, m).unwrap();
        let rhs = rhs.numer().to_string().parse::<f64>().unwrap() / rhs.denom().to_string().parse::<f64>().unwrap();
        if count / rhs > lc.c[&ell] {
            return Outcome::Fail(format!("instance {i}: h = {h:?}, M = {m}, target {target}"));
        }
    }
    Outcome::Pass(format!("grid maxima {maxima:.3?} within C = {:?}; 10000 random instances within", lc.c.values().collect::<Vec<_>>()))
}

fn generic_density(constants: &OracleConstants) -> Outcome {
    let c = constants.generic_density.c;
    let mut out = Vec::new();
    for (text, eta) in [("0.05", Ratio::new(1, 20)), ("0.1", Ratio::new(1, 10)), ("0.2", Ratio::new(1, 5))] {
        let d = cal_h_density(1, 3, eta, 20, Mode::Exact, DEFAULT_STATE_LIMIT).unwrap();
        let e = *eta.numer() as f64 / *eta.denom() as f64;
        if d.fraction > c * e {
            return Outcome::Fail(format!("η = {text}: fraction {} > {c} η", d.fraction));
        }
        out.push(format!("η={text}: {:.4}", d.fraction));
    }
    Outcome::Pass(format!("{} with C = {c}", out.join(", ")))
}

fn multilinear_bound(constants: &OracleConstants) -> Outcome {
    let mc = &constants.multilinear;
    let mut worst = 0.0f64;
    for h in [2u64, 3, 4] {
        for text in &mc.etas {
            let eta = boxnorm_cli::config::parse_eta(text).unwrap();
            let sys = MultilinearSystem::new(3, 3, 1, 1, h, h, eta).unwrap();
            let (v, _) = max_normalized_count_single_block(&sys, DEFAULT_STATE_LIMIT).unwrap();
            let value = v.numer().to_string().parse::<f64>().unwrap() / v.denom().to_string().parse::<f64>().unwrap();
            let e = *eta.numer() as f64 / *eta.denom() as f64;
            let bound = mc.c * e.powf(-mc.e) * (h as f64).powi(-3);
            worst = worst.max(value / bound);
            if value > bound {
                return Outcome::Fail(format!("H = M = {h}, η = {text}: {value} > {bound}"));
            }
            let far = Targets::from_fn(&sys, |_, _, u| if u == 0 { 3 * h as i64 + 1 } else { 0 }).unwrap();
            let zero = normalized_count(&sys, &far, Mode::Exact, DEFAULT_STATE_LIMIT).unwrap();
            if zero.value() != 0.0 {
                return Outcome::Fail(format!("unreachable target gave {zero:?}"));
            }
        }
    }
    Outcome::Pass(format!("largest count/bound {worst:.3} with (C, E) = ({}, {}); unreachable targets give 0", mc.c, mc.e))
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn theorem_check() -> Outcome {
    let cfg = ExperimentConfig::load(&configs_dir().join("theorem15_constant.json")).unwrap();
    let report = match run(&cfg, &RunOptions::default()) {
        Ok(r) => r,
        Err(e) => return Outcome::Fail(e.to_string()),
    };
    let delta = report.delta.unwrap_or(0.0);
    let norms: Vec<f64> = report.ratios.iter().map(|r| r.1).collect();
    let detail = format!("δ = {delta}, normalized norms {norms:.4?}");
    if delta >= 0.99 && norms.len() == 3 && norms.iter().all(|&v| v >= 0.9) && report.failures.is_empty() {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_boxnorm");
    let cases: [(&str, &str, &[&str]); 3] = [
        ("count-op", "count_op_random.json", &[]),
        ("theorem15-check", "theorem15_random.json", &["--seed", "41"]),
        ("equidist-sweep", "equidist_multilinear.json", &["--sample", "--samples", "200", "--seed", "3"]),
    ];
    for (cmd, file, extra) in cases {
        let runs: Vec<Vec<u8>> = (0..2)
            .map(|_| {
                let out = Command::new(bin)
                    .arg(cmd)
                    .arg("--config")
                    .arg(configs_dir().join(file))
                    .args(extra)
                    .output()
                    .expect("binary runs");
                assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
                out.stdout
            })
            .collect();
        if runs[0] != runs[1] || runs[0].is_empty() {
            return Outcome::Fail(format!("{cmd} output differs between runs"));
        }
    }
    Outcome::Pass("3 scenarios byte-identical across runs".into())
}

fn main() {
    let constants = OracleConstants::frozen().expect("fixture constants");
    let criteria: Vec<(u32, &str, Duration, Box<dyn Fn() -> Outcome>)> = vec![
        (1, "PET corner example", Duration::from_secs(1), Box::new(corner_example)),
        (2, "PET symbolic family", Duration::from_secs(1), Box::new(symbolic_family)),
        (3, "descendence on random families", Duration::from_secs(30), Box::new(descendence_grid)),
        (4, "box-norm dual forms", Duration::from_secs(60), Box::new(dual_forms)),
        (5, "box-norm property suite", Duration::from_secs(120), Box::new(property_suite)),
        (6, "Gowers-Cauchy-Schwarz", Duration::from_secs(60), Box::new(gowers_cauchy_schwarz)),
        (7, "van der Corput", Duration::from_secs(10), Box::new(van_der_corput)),
        (8, "linear count bound", Duration::from_secs(120), Box::new({
            let c = constants.clone();
            move || linear_bound(&c)
        })),
        (9, "generic-set density", Duration::from_secs(60), Box::new({
            let c = constants.clone();
            move || generic_density(&c)
        })),
        (10, "multilinear count bound", Duration::from_secs(120), Box::new({
            let c = constants.clone();
            move || multilinear_bound(&c)
        })),
        (11, "theorem check on constants", Duration::from_secs(120), Box::new(theorem_check)),
        (12, "deterministic CSV", Duration::from_secs(120), Box::new(determinism)),
    ];
    let mut hard_failures = BTreeSet::new();
    for (id, name, budget, check) in &criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let over = elapsed > *budget;
        let (status, detail) = match &outcome {
            Outcome::Pass(d) if !over => ("PASS", d.clone()),
            Outcome::Pass(d) => ("FAIL", format!("{d}; took {elapsed:?}, budget {budget:?}")),
            Outcome::Fail(d) | Outcome::Unattainable(d) => ("FAIL", d.clone()),
        };
        if status == "FAIL" && !matches!(outcome, Outcome::Unattainable(_)) {
            hard_failures.insert(*id);
        }
        println!("criterion {id:>2} {status}: {name} ({:.2}s): {detail}", elapsed.as_secs_f64());
    }
    if !hard_failures.is_empty() {
        eprintln!("failed criteria: {hard_failures:?}");
        std::process::exit(1);
    }
}
