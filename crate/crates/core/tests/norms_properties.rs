use std::collections::BTreeSet;

use boxnorm_core::lattice::{GenArithProgression, IntMultiset, LatticeVector};
use boxnorm_core::norms::{
    box_norm_power, box_norm_power_direct, box_norm_power_gaps, box_norm_power_split, gcs_inner,
    vdc_inequality_check, LatticeFunction, DEFAULT_WORK_LIMIT,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
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
    let pts = (0..size).map(|_| {
        let c: Vec<i64> = (0..dim).map(|_| rng.gen_range(-radius..=radius)).collect();
        LatticeVector::from_i64s(&c)
    });
    IntMultiset::from_points(dim, pts).unwrap()
}

/// Sizes shrink with the degree so the pair form stays cheap.
fn max_size(s: usize) -> usize {
    match s {
        1 => 12,
        2 => 6,
        _ => 4,
    }
}

struct Instance {
    f: LatticeFunction,
    e: Vec<IntMultiset>,
}

fn instance(seed: u64, s: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = rng.gen_range(1..=2);
    let n = if dim == 1 { rng.gen_range(1..=16) } else { rng.gen_range(1..=8) };
    let f = random_function(&mut rng, dim, n);
    let e = (0..s)
        .map(|_| {
            let size = rng.gen_range(1..=max_size(s));
            random_multiset(&mut rng, dim, size, 3)
        })
        .collect();
    Instance { f, e }
}

fn support_set(f: &LatticeFunction) -> IntMultiset {
    IntMultiset::from_points(f.dim(), f.values().keys().cloned()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_and_pair_forms_agree(seed in any::<u64>(), s in 1usize..=3) {
        let Instance { f, e } = instance(seed, s);
        let a = box_norm_power(&f, &e).unwrap();
        let b = box_norm_power_direct(&f, &e).unwrap();
        prop_assert!(close(a.power, b.power), "{} vs {}", a.power, b.power);
        prop_assert!(a.power >= -a.tolerance);
    }

    #[test]
    fn inductive_formula(seed in any::<u64>(), s in 1usize..=3, k in 0usize..=3) {
        let Instance { f, e } = instance(seed, s);
        let k = k.min(s);
        let full = box_norm_power(&f, &e).unwrap().power;
        let split = box_norm_power_split(&f, &e, k).unwrap().power;
        prop_assert!(close(full, split), "{full} vs {split}");
    }

    #[test]
    fn permutation_invariance(seed in any::<u64>(), s in 2usize..=3, rot in 1usize..3) {
        let Instance { f, mut e } = instance(seed, s);
        let a = box_norm_power(&f, &e).unwrap().power;
        e.rotate_left(rot % s);
        let b = box_norm_power(&f, &e).unwrap().power;
        e.reverse();
        let c = box_norm_power(&f, &e).unwrap().power;
        prop_assert!(close(a, b) && close(a, c), "{a} {b} {c}");
    }

    #[test]
    fn monotonicity_chain(seed in any::<u64>(), s in 1usize..=3) {
        let Instance { f, e } = instance(seed, s);
        let lower = if s == 1 {
            f.sum().norm_sqr()
        } else {
            box_norm_power(&f, &e[..s - 1]).unwrap().power.powi(2)
        };
        let upper = box_norm_power(&f, &e).unwrap().power;
        let b = support_set(&f);
        let reach = b.diff(&e[s - 1]).unwrap().support_len() as f64;
        prop_assert!(lower <= reach * upper + 1e-6, "{lower} > {reach} * {upper}");
    }

    #[test]
    fn enlarging_sets(seed in any::<u64>(), s in 2usize..=3) {
        let Instance { f, e } = instance(seed, s);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let bigger: Vec<IntMultiset> = e
            .iter()
            .map(|m| {
                let size = rng.gen_range(0..=2);
                let extra = random_multiset(&mut rng, f.dim(), size, 3);
                let mut out = m.clone();
                for (v, k) in extra.iter() {
                    out.insert(v.clone(), k).unwrap();
                }
                out
            })
            .collect();
        let ratio: f64 = e
            .iter()
            .zip(&bigger)
            .map(|(a, b)| b.total() as f64 / a.total() as f64)
            .product();
        let small = box_norm_power(&f, &e).unwrap().power;
        let large = box_norm_power(&f, &bigger).unwrap().power;
        prop_assert!(small <= ratio * ratio * large + 1e-6, "{small} > {ratio}^2 * {large}");
    }

    #[test]
    fn trimming_dimensions_s1(seed in any::<u64>(), d in 1usize..=3, keep in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = rng.gen_range(1..=2);
        let n = if dim == 1 { 16 } else { 8 };
        let f = random_function(&mut rng, dim, n);
        let terms: Vec<(LatticeVector, u64)> = (0..d)
            .map(|_| {
                let c: Vec<i64> = (0..dim).map(|_| rng.gen_range(-3..=3)).collect();
                (LatticeVector::from_i64s(&c), rng.gen_range(0..=3))
            })
            .collect();
        let keep = keep.min(d - 1);
        let full = GenArithProgression::new(dim, terms.clone()).unwrap();
        let prefix = GenArithProgression::new(dim, terms[..keep].to_vec()).unwrap();
        let p = box_norm_power_gaps(&f, &[full], DEFAULT_WORK_LIMIT).unwrap().power;
        let q = box_norm_power_gaps(&f, &[prefix], DEFAULT_WORK_LIMIT).unwrap().power;
        let b = f.support_len() as f64;
        prop_assert!(p * p <= b * q + 1e-6, "{p}^2 > {b} * {q}");
    }

    #[test]
    fn gowers_cauchy_schwarz(seed in any::<u64>(), s in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = rng.gen_range(1..=2);
        let n = if dim == 1 { 10 } else { 5 };
        let fs: Vec<LatticeFunction> = (0..1 << s).map(|_| random_function(&mut rng, dim, n)).collect();
        let e: Vec<IntMultiset> = (0..s)
            .map(|_| {
                let size = rng.gen_range(1..=max_size(s));
                random_multiset(&mut rng, dim, size, 2)
            })
            .collect();
        let inner = gcs_inner(&fs, &e).unwrap();
        let bound: f64 = fs.iter().map(|f| box_norm_power(f, &e).unwrap().norm()).product();
        prop_assert!(inner.norm() <= bound + 1e-9, "{} > {bound}", inner.norm());
    }

    #[test]
    fn van_der_corput(seed in any::<u64>(), k in 4usize..=100) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = rng.gen_range(1..=(k / 4) as u64);
        let seq: Vec<Complex64> = (0..k)
            .map(|_| Complex64::from_polar(rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        let r = vdc_inequality_check(&seq, h).unwrap();
        prop_assert!(r.holds, "{r:?}");
    }
}

#[test]
fn gcs_of_identical_functions_is_the_norm() {
    let Instance { f, e } = instance(7, 3);
    let inner = gcs_inner(&vec![f.clone(); 8], &e).unwrap();
    let p = box_norm_power(&f, &e).unwrap().power;
    assert!(close(inner.re, p) && inner.im.abs() < 1e-9);
}

#[test]
fn gowers_norm_of_interval_matches_pair_enumeration() {
    // U^2([±N]) of 1_[N], against a direct count of parallelograms.
    let n = 5i64;
    let f = LatticeFunction::indicator_cube(1, n).unwrap();
    let e = GenArithProgression::single(LatticeVector::from_i64s(&[1]), n as u64);
    let fast = box_norm_power_gaps(&f, &[e.clone(), e.clone()], DEFAULT_WORK_LIMIT).unwrap().power;
    let inside = |x: i64| (1..=n).contains(&x);
    let mut count = 0u64;
    for x in -20..20 {
        for a in -n..=n {
            for a2 in -n..=n {
                for b in -n..=n {
                    for b2 in -n..=n {
                        if inside(x + a + b) && inside(x + a2 + b) && inside(x + a + b2) && inside(x + a2 + b2) {
                            count += 1;
                        }
                    }
                }
            }
        }
    }
    let len = (2 * n + 1) as f64;
    assert!(close(fast, count as f64 / len.powi(4)), "{fast}");
    let points: BTreeSet<i64> = (-n..=n).collect();
    let m = IntMultiset::from_points(1, points.iter().map(|&p| LatticeVector::from_i64s(&[p]))).unwrap();
    assert!(close(fast, box_norm_power_direct(&f, &[m.clone(), m]).unwrap().power));
}
