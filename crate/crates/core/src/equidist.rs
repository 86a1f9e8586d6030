//! Solution counts for the linear and multilinear systems behind the
//! concatenation estimates.
//!
//! Variables `m` range over `[±M]` and shifts `h` over `[±H]`. Counts are
//! exact integers; normalized counts are exact rationals in exact mode and
//! Monte-Carlo estimates (sampling `h`, counting `m` exactly) otherwise.

use std::collections::HashMap;

use num_integer::Integer;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::int::{int, int_from_u128, pow, CheckedInt, Int};

/// Default cap on enumerated states (`10^8`).
pub const DEFAULT_STATE_LIMIT: u128 = 100_000_000;

fn check_m(m: u64) -> Result<i64> {
    if m == 0 || m > 1 << 20 {
        return Err(Error::InvalidArgument(format!("M = {m} outside [1, 2^20]")));
    }
    Ok(m as i64)
}

/// Histogram of `Σ h_i m_i` over `m ∈ [±M]^ℓ`, as `(offset, counts)` with
/// `counts[v + offset]` solutions for value `v`.
pub fn linear_histogram(h: &[i64], m: u64) -> Result<(i64, Vec<u128>)> {
    let mm = check_m(m)?;
    let reach: i64 = h
        .iter()
        .try_fold(0i64, |acc, &x| acc.checked_add(x.checked_abs()?.checked_mul(mm)?))
        .ok_or(Error::Overflow("linear histogram range"))?;
    if reach > 1 << 26 {
        return Err(Error::CapExceeded { size: reach as u128, limit: 1 << 26 });
    }
    let width = (2 * reach + 1) as usize;
    let mut counts = vec![0u128; width];
    counts[reach as usize] = 1;
    let mut span = 0i64;
    for &c in h {
        let mut next = vec![0u128; width];
        for v in -span..=span {
            let k = counts[(v + reach) as usize];
            if k == 0 {
                continue;
            }
            for x in -mm..=mm {
                next[(v + c * x + reach) as usize] += k;
            }
        }
        span += c.abs() * mm;
        counts = next;
    }
    Ok((reach, counts))
}

/// Number of `m ∈ [±M]^ℓ` with `Σ h_i m_i = target`.
pub fn count_linear_solutions(h: &[i64], m: u64, target: i64) -> Result<u128> {
    if h.is_empty() {
        return Err(Error::InvalidArgument("need at least one coefficient".into()));
    }
    if h.contains(&0) {
        return Err(Error::InvalidArgument("coefficients must be nonzero".into()));
    }
    let (offset, counts) = linear_histogram(h, m)?;
    let idx = target.checked_add(offset).ok_or(Error::Overflow("target"))?;
    Ok(if idx < 0 || idx as usize >= counts.len() { 0 } else { counts[idx as usize] })
}

/// Number of `m ∈ [±M]^{ℓ-1}` with `Σ h_i m_i ≡ target (mod modulus)`.
pub fn count_congruence_solutions(h: &[i64], modulus: u64, m: u64, target: i64) -> Result<u128> {
    if modulus == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    if modulus > 1 << 26 {
        return Err(Error::CapExceeded { size: modulus as u128, limit: 1 << 26 });
    }
    let mm = check_m(m)?;
    let q = modulus as i64;
    let mut counts = vec![0u128; modulus as usize];
    counts[0] = 1;
    for &c in h {
        let mut next = vec![0u128; modulus as usize];
        for (r, &k) in counts.iter().enumerate() {
            if k == 0 {
                continue;
            }
            for x in -mm..=mm {
                let v = (r as i64 + c.rem_euclid(q) * x.rem_euclid(q)).rem_euclid(q);
                next[v as usize] += k;
            }
        }
        counts = next;
    }
    Ok(counts[target.rem_euclid(q) as usize])
}

/// `M^{ℓ-1} gcd(h) / |h_ℓ| + M^{ℓ-2}`, without the implicit constant.
pub fn linear_bound_rhs(h: &[i64], m: u64) -> Result<Ratio<Int>> {
    let last = *h.last().ok_or_else(|| Error::InvalidArgument("empty coefficient list".into()))?;
    if last == 0 {
        return Err(Error::InvalidArgument("last coefficient must be nonzero".into()));
    }
    check_m(m)?;
    let g = h.iter().fold(0i64, |acc, &x| acc.gcd(&x));
    let ell = h.len() as i64;
    let mi = int(m as i64);
    let pow_ratio = |e: i64| -> Result<Ratio<Int>> {
        if e >= 0 {
            Ok(Ratio::from_integer(pow(&mi, e as u32)?))
        } else {
            Ok(Ratio::new(int(1), pow(&mi, (-e) as u32)?))
        }
    };
    let first = pow_ratio(ell - 1)? * Ratio::new(int(g), int(last.abs()));
    Ok(first + pow_ratio(ell - 2)?)
}

/// Worst target for one coefficient list and scale.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearSweepRow {
    pub h: Vec<i64>,
    pub m: u64,
    pub max_count: u128,
    pub argmax: i64,
    pub bound: f64,
    pub ratio: f64,
}

/// For every `h ∈ [1, max_h]^ℓ` and `M ∈ [1, max_m]`, the largest solution
/// count over all targets against [`linear_bound_rhs`]. Counts and the bound
/// are invariant under sign changes of the `h_i`, so positive entries cover
/// the symmetric grid. Rows are in lexicographic order of `(h, M)`.
pub fn linear_sweep(ell: usize, max_h: i64, max_m: u64) -> Result<Vec<LinearSweepRow>> {
    if ell == 0 {
        return Err(Error::InvalidArgument("ℓ must be positive".into()));
    }
    if max_h < 1 || max_m < 1 {
        return Ok(Vec::new());
    }
    let n = (max_h as u128).checked_pow(ell as u32).ok_or(Error::Overflow("grid size"))? * max_m as u128;
    if n > DEFAULT_STATE_LIMIT {
        return Err(Error::CapExceeded { size: n, limit: DEFAULT_STATE_LIMIT });
    }
    let mut grid: Vec<(Vec<i64>, u64)> = Vec::with_capacity(n as usize);
    let mut h = vec![1i64; ell];
    loop {
        for m in 1..=max_m {
            grid.push((h.clone(), m));
        }
        let mut i = ell;
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            if h[i] < max_h {
                h[i] += 1;
                break;
            }
            h[i] = 1;
        }
        if h.iter().all(|&x| x == 1) {
            break;
        }
    }
    let rows: Vec<Result<LinearSweepRow>> = grid
        .par_iter()
        .map(|(h, m)| {
            let (offset, counts) = linear_histogram(h, *m)?;
            let (idx, &max_count) = counts
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
                .expect("nonempty histogram");
            let bound = ratio_to_f64(&linear_bound_rhs(h, *m)?);
            Ok(LinearSweepRow {
                h: h.clone(),
                m: *m,
                max_count,
                argmax: idx as i64 - offset,
                bound,
                ratio: max_count as f64 / bound,
            })
        })
        .collect();
    rows.into_iter().collect()
}

/// The admissible index tuples: `r` rows, each a strictly increasing
/// `ℓ`-subset of `[t]` (1-based).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdmissibleIndexSet {
    pub t: usize,
    pub ell: usize,
    pub r: usize,
    pub tuples: Vec<Vec<Vec<usize>>>,
}

impl AdmissibleIndexSet {
    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }
}

fn subsets(t: usize, ell: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, t: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for k in start..=t + 1 - left {
            cur.push(k);
            rec(k + 1, t, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, t, ell, &mut Vec::new(), &mut out);
    out
}

/// All admissible tuples, rows varying fastest in the last row.
pub fn enumerate_cal_k(t: usize, ell: usize, r: usize) -> Result<AdmissibleIndexSet> {
    if ell == 0 || ell > t {
        return Err(Error::InvalidArgument(format!("need 1 <= ℓ <= t, got ℓ = {ell}, t = {t}")));
    }
    if r == 0 {
        return Err(Error::InvalidArgument("r must be positive".into()));
    }
    let rows = subsets(t, ell);
    let size = (rows.len() as u128)
        .checked_pow(r as u32)
        .ok_or(Error::Overflow("index set size"))?;
    if size > 1 << 24 {
        return Err(Error::CapExceeded { size, limit: 1 << 24 });
    }
    let mut tuples: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    for _ in 0..r {
        tuples = tuples
            .into_iter()
            .flat_map(|prefix| {
                rows.iter().map(move |row| {
                    let mut next = prefix.clone();
                    next.push(row.clone());
                    next
                })
            })
            .collect();
    }
    Ok(AdmissibleIndexSet { t, ell, r, tuples })
}

fn check_eta(eta: Ratio<i64>) -> Result<()> {
    if *eta.numer() <= 0 || *eta.denom() <= 0 {
        return Err(Error::InvalidArgument(format!("η = {eta} must be positive")));
    }
    Ok(())
}

/// Membership in the generic set of shift tuples.
///
/// For all distinct indices `k, k', k''`: `|h_k - h_k''| ≥ ηH` and
/// `gcd(h_k - h_k'', h_k' - h_k'') ≤ 1/η`, with `gcd(0, 0) = 0` counted as
/// large. This is the defining display; the density proof restates the first
/// condition as `|h_k| ≥ ηH`, which is not used here. With fewer than three
/// indices both conditions are vacuous.
pub fn in_cal_h(values: &[i64], eta: Ratio<i64>, h: u64) -> bool {
    let (num, den) = (*eta.numer() as i128, *eta.denom() as i128);
    let hh = h as i128;
    let n = values.len();
    if values.iter().any(|v| v.unsigned_abs() > h) {
        return false;
    }
    if n < 3 {
        return true;
    }
    for (a, &x) in values.iter().enumerate() {
        for (c, &z) in values.iter().enumerate() {
            if a == c {
                continue;
            }
            let d1 = (x - z) as i128;
            // |d1| ≥ ηH  ⇔  |d1|·den ≥ num·H
            if d1.abs() * den < num * hh {
                return false;
            }
            for (b, &y) in values.iter().enumerate() {
                if b == a || b == c {
                    continue;
                }
                let g = d1.gcd(&((y - z) as i128));
                // gcd ≤ 1/η  ⇔  gcd·num ≤ den, and gcd 0 is large
                if g == 0 || g * num > den {
                    return false;
                }
            }
        }
    }
    true
}

/// How a fraction or count was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Mode {
    Exact,
    Sample { seed: u64, samples: u64 },
}

/// Fraction of `[±H]^{t^l}` outside the generic set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Density {
    pub fraction: f64,
    /// Exact count outside and total, in exact mode.
    pub exact: Option<(u128, u128)>,
    /// Standard error of the estimate, in sample mode.
    pub std_error: Option<f64>,
}

pub fn cal_h_density(
    l: u32,
    t: usize,
    eta: Ratio<i64>,
    h: u64,
    mode: Mode,
    limit: u128,
) -> Result<Density> {
    check_eta(eta)?;
    if t == 0 || l == 0 {
        return Err(Error::InvalidArgument("t and l must be positive".into()));
    }
    let n = (t as u128).checked_pow(l).ok_or(Error::Overflow("t^l"))? as usize;
    let side = 2 * h as u128 + 1;
    match mode {
        Mode::Exact => {
            let total = side
                .checked_pow(n as u32)
                .filter(|&s| s <= limit)
                .ok_or(Error::CapExceeded { size: side.saturating_pow(n as u32), limit })?;
            let firsts: Vec<i64> = (-(h as i64)..=h as i64).collect();
            let outside: u128 = firsts
                .par_iter()
                .map(|&v0| {
                    let mut vals = vec![-(h as i64); n];
                    vals[0] = v0;
                    let mut bad = 0u128;
                    loop {
                        if !in_cal_h(&vals, eta, h) {
                            bad += 1;
                        }
                        if !advance(&mut vals[1..], h as i64) {
                            break;
                        }
                    }
                    bad
                })
                .collect::<Vec<_>>()
                .into_iter()
                .sum();
            Ok(Density {
                fraction: outside as f64 / total as f64,
                exact: Some((outside, total)),
                std_error: None,
            })
        }
        Mode::Sample { seed, samples } => {
            if samples == 0 {
                return Err(Error::InvalidArgument("need at least one sample".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let hi = h as i64;
            let mut vals = vec![0i64; n];
            let mut bad = 0u64;
            for _ in 0..samples {
                vals.iter_mut().for_each(|v| *v = rng.gen_range(-hi..=hi));
                if !in_cal_h(&vals, eta, h) {
                    bad += 1;
                }
            }
            let p = bad as f64 / samples as f64;
            Ok(Density {
                fraction: p,
                exact: None,
                std_error: Some((p * (1.0 - p) / samples as f64).sqrt()),
            })
        }
    }
}

/// Odometer step over `[±h]^n`; false after the last tuple.
fn advance(vals: &mut [i64], h: i64) -> bool {
    for v in vals.iter_mut().rev() {
        if *v < h {
            *v += 1;
            return true;
        }
        *v = -h;
    }
    false
}

/// Parameters `(t, ℓ, r, s, H, M, η)` of a multilinear system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MultilinearSystem {
    pub t: usize,
    pub ell: usize,
    pub r: usize,
    pub s: usize,
    pub h: u64,
    pub m: u64,
    #[serde(serialize_with = "ser_ratio")]
    pub eta: Ratio<i64>,
}

fn ser_ratio<S: serde::Serializer>(r: &Ratio<i64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl MultilinearSystem {
    pub fn new(t: usize, ell: usize, r: usize, s: usize, h: u64, m: u64, eta: Ratio<i64>) -> Result<Self> {
        if !(3 <= ell && ell <= t) {
            return Err(Error::InvalidArgument(format!("need 3 <= ℓ <= t, got ℓ = {ell}, t = {t}")));
        }
        if r == 0 || s == 0 || h == 0 {
            return Err(Error::InvalidArgument("r, s and H must be positive".into()));
        }
        if h > m {
            return Err(Error::InvalidArgument(format!("need H <= M, got H = {h}, M = {m}")));
        }
        check_m(m)?;
        check_eta(eta)?;
        Ok(MultilinearSystem { t, ell, r, s, h, m, eta })
    }

    /// `|K_{t,ℓ,r}|`.
    pub fn k_len(&self) -> Result<usize> {
        Ok(enumerate_cal_k(self.t, self.ell, self.r)?.len())
    }

    /// Number of `h` variables, `t + t^2 + ... + t^r`.
    pub fn h_vars(&self) -> usize {
        (1..=self.r as u32).map(|l| self.t.pow(l)).sum()
    }

    fn blocks(&self) -> Result<usize> {
        Ok(self.s * self.k_len()?)
    }
}

/// Target values `n_{j,k,u}`, stored per block `(j, k)` in the order of
/// [`enumerate_cal_k`], with `u ∈ {0,1}^r` as a bitmask (bit `l-1` is `u_l`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Targets {
    per_block: Vec<Vec<i64>>,
}

impl Targets {
    pub fn from_fn(sys: &MultilinearSystem, mut f: impl FnMut(usize, usize, usize) -> i64) -> Result<Self> {
        let k = sys.k_len()?;
        let mut per_block = Vec::with_capacity(sys.s * k);
        for j in 0..sys.s {
            for ki in 0..k {
                per_block.push((0..1usize << sys.r).map(|u| f(j, ki, u)).collect());
            }
        }
        Ok(Targets { per_block })
    }

    pub fn uniform(sys: &MultilinearSystem, value: i64) -> Result<Self> {
        Targets::from_fn(sys, |_, _, _| value)
    }

    pub fn get(&self, block: usize, u: usize) -> i64 {
        self.per_block[block][u]
    }
}

/// Normalized count, exact or estimated.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum CountValue {
    Exact(#[serde(serialize_with = "ser_int_ratio")] Ratio<Int>),
    Estimate { mean: f64, half_width: f64, samples: u64 },
}

fn ser_int_ratio<S: serde::Serializer>(r: &Ratio<Int>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", crate::int::int_to_string(r.numer()), crate::int::int_to_string(r.denom())))
}

impl CountValue {
    pub fn value(&self) -> f64 {
        match self {
            CountValue::Exact(r) => ratio_to_f64(r),
            CountValue::Estimate { mean, .. } => *mean,
        }
    }
}

pub(crate) fn ratio_to_f64(r: &Ratio<Int>) -> f64 {
    int_to_f64(r.numer()) / int_to_f64(r.denom())
}

fn int_to_f64(x: &Int) -> f64 {
    crate::int::int_to_string(x).parse::<f64>().unwrap_or(f64::NAN)
}

/// `h` variables split by level: `levels[l-1][index over [t]^l]`, row-major.
struct Shifts<'a> {
    levels: Vec<&'a [i64]>,
    t: usize,
}

impl Shifts<'_> {
    fn get(&self, l: usize, ks: &[usize]) -> i64 {
        let idx = ks.iter().fold(0usize, |acc, &k| acc * self.t + (k - 1));
        self.levels[l - 1][idx]
    }
}

/// Coefficient vectors (one entry per `u`) for the `ℓ^r` variables of a block.
fn block_coefficients(sys: &MultilinearSystem, rows: &[Vec<usize>], sh: &Shifts) -> Vec<Vec<i64>> {
    let ell = sys.ell;
    let r = sys.r;
    let nvars = ell.pow(r as u32);
    let mut out = Vec::with_capacity(nvars);
    for code in 0..nvars {
        // i_1 is the most significant digit.
        let mut is = vec![0usize; r];
        let mut c = code;
        for l in (0..r).rev() {
            is[l] = c % ell;
            c /= ell;
        }
        let factors: Vec<i64> = (1..=r)
            .map(|l| {
                let ks: Vec<usize> = (0..l).map(|p| rows[p][is[p]]).collect();
                sh.get(l, &ks)
            })
            .collect();
        let coeffs = (0..1usize << r)
            .map(|u| (0..r).filter(|l| u >> l & 1 == 1).map(|l| factors[l]).product())
            .collect();
        out.push(coeffs);
    }
    out
}

/// Number of `m ∈ [±M]^{vars}` with `Σ coeffs[v][u] m_v = target[u]` for
/// every `u`, by a pruned dynamic program over partial sums.
fn block_count(coeffs: &[Vec<i64>], m: i64, target: &[i64], limit: u128) -> Result<u128> {
    let eqs = target.len();
    let n = coeffs.len();
    // Remaining reach per equation after processing variable i.
    let mut reach = vec![vec![0i64; eqs]; n + 1];
    for i in (0..n).rev() {
        for u in 0..eqs {
            reach[i][u] = reach[i + 1][u] + coeffs[i][u].abs() * m;
        }
    }
    if (0..eqs).any(|u| target[u].abs() > reach[0][u]) {
        return Ok(0);
    }
    let mut states: HashMap<Vec<i64>, u128> = HashMap::new();
    states.insert(vec![0; eqs], 1);
    for i in 0..n {
        let mut next: HashMap<Vec<i64>, u128> = HashMap::with_capacity(states.len());
        for (st, k) in &states {
            for x in -m..=m {
                let cand: Vec<i64> = (0..eqs).map(|u| st[u] + coeffs[i][u] * x).collect();
                if (0..eqs).all(|u| (target[u] - cand[u]).abs() <= reach[i + 1][u]) {
                    *next.entry(cand).or_insert(0) += k;
                }
            }
        }
        if next.len() as u128 > limit {
            return Err(Error::CapExceeded { size: next.len() as u128, limit });
        }
        states = next;
    }
    Ok(states.get(target).copied().unwrap_or(0))
}

/// `ℓ^r · H^{|u|} · M`, the largest reachable `|n_{j,k,u}|`.
fn reach_bound(sys: &MultilinearSystem, u: usize) -> i128 {
    (sys.ell as i128).pow(sys.r as u32) * (sys.h as i128).pow(u.count_ones()) * sys.m as i128
}

/// Per-`h` value: `Π_l 1_{H_l}(h_l) · Π_{blocks} count / (2M+1)^{ℓ^r}` as
/// the integer numerator.
fn h_numerator(
    sys: &MultilinearSystem,
    cal_k: &AdmissibleIndexSet,
    targets: &Targets,
    hvals: &[i64],
    limit: u128,
) -> Result<Int> {
    let mut levels = Vec::with_capacity(sys.r);
    let mut start = 0;
    for l in 1..=sys.r as u32 {
        let len = sys.t.pow(l);
        let slice = &hvals[start..start + len];
        if !in_cal_h(slice, sys.eta, sys.h) {
            return Ok(int(0));
        }
        levels.push(slice);
        start += len;
    }
    let sh = Shifts { levels, t: sys.t };
    let mut acc = int(1);
    for j in 0..sys.s {
        for (ki, rows) in cal_k.tuples.iter().enumerate() {
            let block = j * cal_k.len() + ki;
            let coeffs = block_coefficients(sys, rows, &sh);
            let c = block_count(&coeffs, sys.m as i64, &targets.per_block[block], limit)?;
            if c == 0 {
                return Ok(int(0));
            }
            acc = acc.c_mul(&int_from_u128(c)?)?;
        }
    }
    Ok(acc)
}

/// The probability, over uniform `m ∈ [±M]` and `h ∈ [±H]`, that every `h_l`
/// tuple is generic and every equation hits its target.
///
/// Exact mode enumerates all `h` and requires `r = 1` and
/// `(2H+1)^t ≤ limit`. Sample mode draws `h` uniformly and counts `m`
/// exactly; the half-width is a 95% normal interval.
pub fn normalized_count(
    sys: &MultilinearSystem,
    targets: &Targets,
    mode: Mode,
    limit: u128,
) -> Result<CountValue> {
    let cal_k = enumerate_cal_k(sys.t, sys.ell, sys.r)?;
    if targets.per_block.len() != sys.blocks()? {
        return Err(Error::ArityMismatch { expected: sys.blocks()?, got: targets.per_block.len() });
    }
    let unreachable = targets
        .per_block
        .iter()
        .any(|b| b.iter().enumerate().any(|(u, &n)| (n as i128).abs() > reach_bound(sys, u)));
    let side = 2 * sys.h as i64 + 1;
    let nvars_m = (sys.ell.pow(sys.r as u32) * sys.blocks()?) as u32;
    match mode {
        Mode::Exact => {
            if sys.r != 1 {
                return Err(Error::InvalidArgument("exact mode supports r = 1 only".into()));
            }
            let states = (side as u128).saturating_pow(sys.t as u32);
            if states > limit {
                return Err(Error::CapExceeded { size: states, limit });
            }
            let denom = pow(&int(side), sys.t as u32)?.c_mul(&pow(&int(2 * sys.m as i64 + 1), nvars_m)?)?;
            if unreachable {
                return Ok(CountValue::Exact(Ratio::new(int(0), int(1))));
            }
            let hh = sys.h as i64;
            let firsts: Vec<i64> = (-hh..=hh).collect();
            let parts: Vec<Result<Int>> = firsts
                .par_iter()
                .map(|&v0| {
                    let mut vals = vec![-hh; sys.t];
                    vals[0] = v0;
                    let mut acc = int(0);
                    loop {
                        acc = acc.c_add(&h_numerator(sys, &cal_k, targets, &vals, limit)?)?;
                        if !advance(&mut vals[1..], hh) {
                            break;
                        }
                    }
                    Ok(acc)
                })
                .collect();
            let mut total = int(0);
            for p in parts {
                total = total.c_add(&p?)?;
            }
            Ok(CountValue::Exact(Ratio::new(total, denom)))
        }
        Mode::Sample { seed, samples } => {
            if samples == 0 {
                return Err(Error::InvalidArgument("need at least one sample".into()));
            }
            if unreachable {
                return Ok(CountValue::Estimate { mean: 0.0, half_width: 0.0, samples });
            }
            let scale = (2.0 * sys.m as f64 + 1.0).powi(nvars_m as i32);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let draws: Vec<Vec<i64>> = (0..samples)
                .map(|_| (0..sys.h_vars()).map(|_| rng.gen_range(-(sys.h as i64)..=sys.h as i64)).collect())
                .collect();
            let vals: Vec<Result<f64>> = draws
                .par_iter()
                .map(|hv| Ok(int_to_f64(&h_numerator(sys, &cal_k, targets, hv, limit)?) / scale))
                .collect();
            let vals: Vec<f64> = vals.into_iter().collect::<Result<_>>()?;
            let n = samples as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let var = if samples > 1 {
                vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            Ok(CountValue::Estimate { mean, half_width: 1.96 * (var / n).sqrt(), samples })
        }
    }
}

/// Exact maximum of the normalized count over all targets, for systems with
/// a single block (`r = 1`, `s·|K| = 1`). Returns the value and a maximizing
/// target pair `(n_0, n_1)`.
pub fn max_normalized_count_single_block(
    sys: &MultilinearSystem,
    limit: u128,
) -> Result<(Ratio<Int>, (i64, i64))> {
    if sys.r != 1 || sys.blocks()? != 1 {
        return Err(Error::InvalidArgument("exact maximum needs r = 1 and a single block".into()));
    }
    let side = 2 * sys.h as i64 + 1;
    let states = (side as u128).saturating_pow(sys.t as u32);
    if states > limit {
        return Err(Error::CapExceeded { size: states, limit });
    }
    let ell = sys.ell as i64;
    let (m, h) = (sys.m as i64, sys.h as i64);
    let r0 = ell * m;
    let r1 = ell * h * m;
    let (w0, w1) = ((2 * r0 + 1) as usize, (2 * r1 + 1) as usize);
    let row: Vec<usize> = (1..=sys.ell).collect();
    let cal_k = enumerate_cal_k(sys.t, sys.ell, 1)?;
    let row = cal_k.tuples.first().map(|t| t[0].clone()).unwrap_or(row);
    let firsts: Vec<i64> = (-h..=h).collect();
    let hists: Vec<Vec<u128>> = firsts
        .par_iter()
        .map(|&v0| {
            let mut sum = vec![0u128; w0 * w1];
            let mut vals = vec![-h; sys.t];
            vals[0] = v0;
            loop {
                if in_cal_h(&vals, sys.eta, sys.h) {
                    let coeffs: Vec<i64> = row.iter().map(|&k| vals[k - 1]).collect();
                    accumulate_pair_histogram(&coeffs, m, r0, r1, w1, &mut sum);
                }
                if !advance(&mut vals[1..], h) {
                    break;
                }
            }
            sum
        })
        .collect();
    let mut total = vec![0u128; w0 * w1];
    for hsum in hists {
        for (a, b) in total.iter_mut().zip(hsum) {
            *a += b;
        }
    }
    let (best, &count) = total
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .expect("nonempty histogram");
    let denom = pow(&int(side), sys.t as u32)?.c_mul(&pow(&int(2 * m + 1), sys.ell as u32)?)?;
    let n0 = (best / w1) as i64 - r0;
    let n1 = (best % w1) as i64 - r1;
    Ok((Ratio::new(int_from_u128(count)?, denom), (n0, n1)))
}

/// Adds the histogram of `(Σ m_i, Σ c_i m_i)` over `m ∈ [±M]^ℓ` into `out`.
fn accumulate_pair_histogram(coeffs: &[i64], m: i64, r0: i64, r1: i64, w1: usize, out: &mut [u128]) {
    let mut states: HashMap<(i64, i64), u128> = HashMap::new();
    states.insert((0, 0), 1);
    for &c in coeffs {
        let mut next: HashMap<(i64, i64), u128> = HashMap::with_capacity(states.len() * 3);
        for (&(a, b), &k) in &states {
            for x in -m..=m {
                *next.entry((a + x, b + c * x)).or_insert(0) += k;
            }
        }
        states = next;
    }
    for ((a, b), k) in states {
        out[(a + r0) as usize * w1 + (b + r1) as usize] += k;
    }
}

/// Exponents `(a, b)` of the bound shape `M^{-a} H^{-b}`, with
/// `a = 2^r s|K|` and `b = r 2^{r-1} s|K|`.
pub fn prop74_exponents(sys: &MultilinearSystem) -> Result<(u64, u64)> {
    let sk = (sys.s as u64)
        .checked_mul(sys.k_len()? as u64)
        .ok_or(Error::Overflow("s|K|"))?;
    let a = (1u64 << sys.r).checked_mul(sk).ok_or(Error::Overflow("exponent"))?;
    let b = (sys.r as u64)
        .checked_mul(1u64 << (sys.r - 1))
        .and_then(|x| x.checked_mul(sk))
        .ok_or(Error::Overflow("exponent"))?;
    Ok((a, b))
}

/// `M^{-a} H^{-b}` as an exact rational.
pub fn prop74_bound(sys: &MultilinearSystem) -> Result<Ratio<Int>> {
    let (a, b) = prop74_exponents(sys)?;
    let den = pow(&int(sys.m as i64), u32::try_from(a).map_err(|_| Error::Overflow("exponent"))?)?
        .c_mul(&pow(&int(sys.h as i64), u32::try_from(b).map_err(|_| Error::Overflow("exponent"))?)?)?;
    Ok(Ratio::new(int(1), den))
}

/// `M^{-a} H^{-b}` in floating point, for exponents beyond exact range.
pub fn prop74_bound_f64(sys: &MultilinearSystem) -> Result<f64> {
    let (a, b) = prop74_exponents(sys)?;
    Ok((sys.m as f64).powf(-(a as f64)) * (sys.h as f64).powf(-(b as f64)))
}
