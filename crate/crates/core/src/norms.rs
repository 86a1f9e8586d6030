//! Box norms, Gowers–Cauchy–Schwarz products and counting operators for
//! finitely supported functions `Z^D → C`.
//!
//! Every norm is returned as its `2^s`-th power. Evaluation runs over dense
//! boxes: each level of the recursion replaces `g` by a shifted product
//! `x ↦ g(x + a) · conj(g(x + b))`, weighted by the kernel or pair weight.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::lattice::{fejer, FejerKernel, GenArithProgression, IntMultiset, LatticeVector};
use crate::polyalg::VectorPolynomial;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Relative tolerance for equalities between norm evaluations.
pub const EQ_TOLERANCE: f64 = 1e-9;

/// Default cap on `Π |kernel support| · |grid|` for the GAP evaluator.
pub const DEFAULT_WORK_LIMIT: u128 = 20_000_000_000;

/// A finitely supported function `Z^D → C`.
#[derive(Clone, Debug)]
pub struct LatticeFunction {
    dim: usize,
    values: BTreeMap<LatticeVector, Complex64>,
    support_box: Option<(Vec<i64>, Vec<i64>)>,
    grid: Grid,
}

impl LatticeFunction {
    /// Builds a function from point values; zero values are dropped and
    /// repeated points are summed.
    pub fn from_values(
        dim: usize,
        points: impl IntoIterator<Item = (LatticeVector, Complex64)>,
    ) -> Result<Self> {
        let mut values: BTreeMap<LatticeVector, Complex64> = BTreeMap::new();
        for (p, v) in points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
            }
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Numerical(format!("non-finite value at {p}")));
            }
            *values.entry(p).or_insert(ZERO) += v;
        }
        values.retain(|_, v| *v != ZERO);
        let pts: Vec<(Vec<i64>, Complex64)> = values
            .iter()
            .map(|(p, v)| Ok((p.to_i64s()?, *v)))
            .collect::<Result<_>>()?;
        let grid = Grid::from_points(dim, pts.iter().map(|(p, v)| (p.as_slice(), *v)));
        Ok(LatticeFunction { dim, values, support_box: None, grid })
    }

    /// `x ↦ f(x)` for `x` in the box `[lo, hi]`.
    pub fn from_fn(lo: &[i64], hi: &[i64], mut f: impl FnMut(&[i64]) -> Complex64) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        let mut pts = Vec::new();
        for_each_point(lo, hi, |p| {
            pts.push((LatticeVector::from_i64s(p), f(p)));
        });
        let mut out = LatticeFunction::from_values(lo.len(), pts)?;
        out.support_box = Some((lo.to_vec(), hi.to_vec()));
        Ok(out)
    }

    pub fn zero(dim: usize) -> Self {
        LatticeFunction {
            dim,
            values: BTreeMap::new(),
            support_box: None,
            grid: Grid::empty(dim),
        }
    }

    /// The constant `value` on `[lo, hi]`.
    pub fn constant_box(lo: &[i64], hi: &[i64], value: Complex64) -> Result<Self> {
        LatticeFunction::from_fn(lo, hi, |_| value)
    }

    pub fn indicator_box(lo: &[i64], hi: &[i64]) -> Result<Self> {
        LatticeFunction::constant_box(lo, hi, Complex64::new(1.0, 0.0))
    }

    /// Indicator of `[N]^D = {1, ..., N}^D`.
    pub fn indicator_cube(dim: usize, n: i64) -> Result<Self> {
        LatticeFunction::indicator_box(&vec![1; dim], &vec![n; dim])
    }

    /// Independent uniform signs on `[N]^D`.
    pub fn random_pm1(dim: usize, n: i64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        LatticeFunction::from_fn(&vec![1; dim], &vec![n; dim], |_| {
            Complex64::new(if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0)
        })
    }

    /// Independent uniform points of the unit circle on `[N]^D`.
    pub fn random_unimodular(dim: usize, n: i64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        LatticeFunction::from_fn(&vec![1; dim], &vec![n; dim], |_| {
            Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
        })
    }

    /// Independent uniform points of the closed unit disk on `[N]^D`.
    pub fn random_bounded(dim: usize, n: i64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        LatticeFunction::from_fn(&vec![1; dim], &vec![n; dim], |_| {
            let r: f64 = rng.gen::<f64>().sqrt();
            Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &BTreeMap<LatticeVector, Complex64> {
        &self.values
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    /// The declared box, if the function was built on one.
    pub fn support_box(&self) -> Option<&(Vec<i64>, Vec<i64>)> {
        self.support_box.as_ref()
    }

    /// Smallest box containing the support.
    pub fn bounding_box(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        self.grid.bounds()
    }

    pub fn get(&self, x: &[i64]) -> Complex64 {
        if x.len() != self.dim {
            return ZERO;
        }
        self.grid.get(x)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_one_bounded(&self) -> bool {
        self.sup_norm() <= 1.0 + 1e-12
    }

    /// `Σ_x f(x)`.
    pub fn sum(&self) -> Complex64 {
        self.grid.sum()
    }

    fn from_grid(dim: usize, grid: &Grid) -> Self {
        let values = grid
            .entries()
            .into_iter()
            .map(|(p, v)| (LatticeVector::from_i64s(&p), v))
            .collect();
        let pts = grid.entries();
        LatticeFunction {
            dim,
            values,
            support_box: None,
            grid: Grid::from_points(dim, pts.iter().map(|(p, v)| (p.as_slice(), *v))),
        }
    }

    fn check_dim(&self, v: &LatticeVector) -> Result<Vec<i64>> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.dim() });
        }
        v.to_i64s()
    }
}

fn for_each_point(lo: &[i64], hi: &[i64], mut f: impl FnMut(&[i64])) {
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return;
    }
    let mut p = lo.to_vec();
    loop {
        f(&p);
        let mut i = p.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if p[i] < hi[i] {
                p[i] += 1;
                break;
            }
            p[i] = lo[i];
        }
    }
}

/// `Δ_h f(x) = f(x) · conj(f(x + h))`.
pub fn mult_derivative(f: &LatticeFunction, h: &LatticeVector) -> Result<LatticeFunction> {
    let h = f.check_dim(h)?;
    let zero = vec![0; f.dim];
    Ok(LatticeFunction::from_grid(f.dim, &Grid::shift_product(&f.grid, &zero, &f.grid, &h)))
}

/// `Δ'_{(h, h')} f(x) = f(x + h) · conj(f(x + h'))`.
pub fn mult_derivative_pair(
    f: &LatticeFunction,
    h: &LatticeVector,
    hp: &LatticeVector,
) -> Result<LatticeFunction> {
    let a = f.check_dim(h)?;
    let b = f.check_dim(hp)?;
    Ok(LatticeFunction::from_grid(f.dim, &Grid::shift_product(&f.grid, &a, &f.grid, &b)))
}

/// A `2^s`-th norm power together with the tolerance it was checked against.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct NormReport {
    pub power: f64,
    /// Imaginary part of the evaluated sum; zero up to rounding.
    pub imag: f64,
    pub s: usize,
    pub tolerance: f64,
}

impl NormReport {
    fn new(f: &LatticeFunction, s: usize, value: Complex64) -> Result<Self> {
        let scale = (f.support_len() as f64) * f.sup_norm().powi(1 << s.min(30));
        let tolerance = EQ_TOLERANCE * scale.max(1.0);
        if value.re < -tolerance || value.im.abs() > tolerance {
            return Err(Error::Numerical(format!(
                "box norm power {value} outside tolerance {tolerance:e}"
            )));
        }
        Ok(NormReport { power: value.re, imag: value.im, s, tolerance })
    }

    /// The norm itself, `max(power, 0)^{1/2^s}`.
    pub fn norm(&self) -> f64 {
        self.power.max(0.0).powf(1.0 / (1u64 << self.s) as f64)
    }
}

/// One level of the recursion: weighted shift pairs `(a, b, w)` acting by
/// `g ↦ x ↦ g(x + a) · conj(g(x + b))`.
type Level = Vec<(Vec<i64>, Vec<i64>, f64)>;

fn kernel_level(k: &FejerKernel) -> Result<Level> {
    let zero = vec![0; k.dim()];
    Ok(k.float_weights()?
        .into_iter()
        .map(|(h, w)| (zero.clone(), h, w))
        .collect())
}

fn pair_level(e: &IntMultiset) -> Result<Level> {
    if e.is_empty() {
        return Err(Error::EmptyMultiset);
    }
    let total = e.total() as f64;
    let pts: Vec<(Vec<i64>, f64)> = e
        .iter()
        .map(|(v, m)| Ok((v.to_i64s()?, m as f64)))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(pts.len() * pts.len());
    for (a, ma) in &pts {
        for (b, mb) in &pts {
            out.push((a.clone(), b.clone(), ma * mb / (total * total)));
        }
    }
    Ok(out)
}

/// Last level: either a shift-pair sum or the energy form
/// `|E|^{-2} Σ_y |Σ_{a∈E} g(y + a)|²` for a GAP `E`.
enum Tail {
    Pairs(Level),
    Energy { terms: Vec<(Vec<i64>, u64)>, size: f64 },
}

fn eval_levels(g: &Grid, levels: &[Level], tail: &Tail) -> Complex64 {
    match levels.split_first() {
        Some((first, rest)) => first
            .iter()
            .map(|(a, b, w)| *w * eval_levels(&Grid::shift_product(g, a, g, b), rest, tail))
            .sum(),
        None => match tail {
            Tail::Pairs(last) => last
                .iter()
                .map(|(a, b, w)| *w * Grid::shift_product_sum(g, a, g, b))
                .sum(),
            Tail::Energy { terms, size } => {
                let mut acc = g.clone();
                for (beta, h) in terms {
                    acc = acc.window_sum(beta, *h);
                }
                Complex64::new(acc.sum_norm_sqr() / (size * size), 0.0)
            }
        },
    }
}

/// Evaluates the recursion with the outermost level spread over threads.
/// Partial results are summed in a fixed order, so output is deterministic.
fn eval_parallel(g: &Grid, levels: &[Level], tail: &Tail) -> Complex64 {
    match levels.split_first() {
        Some((first, rest)) => {
            let parts: Vec<Complex64> = first
                .par_iter()
                .map(|(a, b, w)| *w * eval_levels(&Grid::shift_product(g, a, g, b), rest, tail))
                .collect();
            parts.into_iter().sum()
        }
        None => match tail {
            Tail::Pairs(last) => {
                let parts: Vec<Complex64> = last
                    .par_iter()
                    .map(|(a, b, w)| *w * Grid::shift_product_sum(g, a, g, b))
                    .collect();
                parts.into_iter().sum()
            }
            Tail::Energy { .. } => eval_levels(g, levels, tail),
        },
    }
}

fn eval_split(f: &LatticeFunction, mut levels: Vec<Level>) -> Result<NormReport> {
    let s = levels.len();
    let value = match levels.pop() {
        Some(last) => eval_parallel(&f.grid, &levels, &Tail::Pairs(last)),
        None => f.sum(),
    };
    NormReport::new(f, s, value)
}

fn check_multisets(f: &LatticeFunction, e: &[IntMultiset]) -> Result<()> {
    for m in e {
        if m.dim() != f.dim {
            return Err(Error::DimensionMismatch { expected: f.dim, got: m.dim() });
        }
        if m.is_empty() {
            return Err(Error::EmptyMultiset);
        }
    }
    Ok(())
}

/// `Σ_{x, h_1..h_s} μ_{E_1}(h_1)···μ_{E_s}(h_s) Δ_{h_1..h_s} f(x)`.
pub fn box_norm_power(f: &LatticeFunction, e: &[IntMultiset]) -> Result<NormReport> {
    check_multisets(f, e)?;
    let kernels: Vec<FejerKernel> = e.iter().map(fejer).collect::<Result<_>>()?;
    box_norm_power_kernels(f, &kernels)
}

/// Kernel form for precomputed Fejér kernels.
pub fn box_norm_power_kernels(f: &LatticeFunction, kernels: &[FejerKernel]) -> Result<NormReport> {
    for k in kernels {
        if k.dim() != f.dim {
            return Err(Error::DimensionMismatch { expected: f.dim, got: k.dim() });
        }
    }
    let levels = kernels.iter().map(kernel_level).collect::<Result<_>>()?;
    eval_split(f, levels)
}

/// `E_{h_1,h_1'∈E_1}···E_{h_s,h_s'∈E_s} Σ_x Δ'_{(h_1,h_1'),...,(h_s,h_s')} f(x)`.
pub fn box_norm_power_direct(f: &LatticeFunction, e: &[IntMultiset]) -> Result<NormReport> {
    box_norm_power_split(f, e, e.len())
}

/// Averages `Δ'`-derivatives over pairs from the first `k` multisets and
/// evaluates the degree `s - k` norm power of each in kernel form.
pub fn box_norm_power_split(f: &LatticeFunction, e: &[IntMultiset], k: usize) -> Result<NormReport> {
    check_multisets(f, e)?;
    if k > e.len() {
        return Err(Error::InvalidArgument(format!("split {k} exceeds degree {}", e.len())));
    }
    let mut levels: Vec<Level> = e[..k].iter().map(pair_level).collect::<Result<_>>()?;
    for m in &e[k..] {
        levels.push(kernel_level(&fejer(m)?)?);
    }
    eval_split(f, levels)
}

/// Box norm power along GAPs without expanding them.
///
/// The GAP of largest size is moved last and handled by window sums; the
/// others use their closed-form Fejér kernels. Refuses work estimates above
/// `limit`.
pub fn box_norm_power_gaps(
    f: &LatticeFunction,
    gaps: &[GenArithProgression],
    limit: u128,
) -> Result<NormReport> {
    for g in gaps {
        if g.dim() != f.dim {
            return Err(Error::DimensionMismatch { expected: f.dim, got: g.dim() });
        }
    }
    let s = gaps.len();
    if s == 0 {
        return NormReport::new(f, 0, f.sum());
    }
    let mut order: Vec<usize> = (0..s).collect();
    let sizes: Vec<u128> = gaps.iter().map(|g| g.total()).collect::<Result<_>>()?;
    order.sort_by_key(|&i| sizes[i]);
    let last = order.pop().expect("nonempty");
    let kernels: Vec<FejerKernel> = order
        .iter()
        .map(|&i| FejerKernel::of_gap(&gaps[i]))
        .collect::<Result<_>>()?;
    let mut work = f.grid.len().max(1) as u128;
    for k in &kernels {
        work = work.saturating_mul(k.support_len() as u128);
    }
    if work > limit {
        return Err(Error::CapExceeded { size: work, limit });
    }
    let levels: Vec<Level> = kernels.iter().map(kernel_level).collect::<Result<_>>()?;
    let terms = gaps[last]
        .terms()
        .iter()
        .map(|(b, h)| Ok((b.to_i64s()?, *h)))
        .collect::<Result<_>>()?;
    let tail = Tail::Energy { terms, size: sizes[last] as f64 };
    NormReport::new(f, s, eval_parallel(&f.grid, &levels, &tail))
}

/// The box inner product `Σ_{x,h} μ(h) Π_ε C^{|ε|} f_ε(x + ε·h)`.
///
/// `fs[k]` is `f_ε` for the `ε` whose bit `i` (least significant first)
/// is `ε_{i+1}`.
pub fn gcs_inner(fs: &[LatticeFunction], e: &[IntMultiset]) -> Result<Complex64> {
    let s = e.len();
    if fs.len() != 1 << s {
        return Err(Error::ArityMismatch { expected: 1 << s, got: fs.len() });
    }
    let dim = fs[0].dim;
    for f in fs {
        if f.dim != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: f.dim });
        }
    }
    check_multisets(&fs[0], e)?;
    let levels: Vec<Level> = e
        .iter()
        .map(|m| kernel_level(&fejer(m)?))
        .collect::<Result<_>>()?;
    let grids: Vec<Grid> = fs.iter().map(|f| f.grid.clone()).collect();
    let Some((first, rest)) = levels.split_first() else {
        return Ok(grids[0].sum());
    };
    let parts: Vec<Complex64> = first
        .par_iter()
        .map(|(a, b, w)| *w * gcs_step(&grids, a, b, rest))
        .collect();
    Ok(parts.into_iter().sum())
}

fn gcs_step(grids: &[Grid], a: &[i64], b: &[i64], rest: &[Level]) -> Complex64 {
    if grids.len() == 2 {
        return Grid::shift_product_sum(&grids[0], a, &grids[1], b);
    }
    let next: Vec<Grid> = grids
        .chunks(2)
        .map(|p| Grid::shift_product(&p[0], a, &p[1], b))
        .collect();
    let (first, tail) = rest.split_first().expect("levels match the function count");
    first
        .iter()
        .map(|(a2, b2, w)| *w * gcs_step(&next, a2, b2, tail))
        .sum()
}

fn check_z_polys(dim: usize, ps: &[VectorPolynomial]) -> Result<()> {
    for p in ps {
        if p.num_h() != 0 {
            return Err(Error::InvalidArgument(format!("{p} depends on h")));
        }
        if p.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
        }
    }
    Ok(())
}

/// `Σ_x E_{z∈[K]} f_0(x) Π_j f_j(x + P_j(z))`.
pub fn counting_operator(fs: &[LatticeFunction], ps: &[VectorPolynomial], k: u64) -> Result<Complex64> {
    if fs.len() != ps.len() + 1 {
        return Err(Error::ArityMismatch { expected: ps.len() + 1, got: fs.len() });
    }
    if k == 0 {
        return Err(Error::InvalidArgument("K must be positive".into()));
    }
    let dim = fs[0].dim;
    for f in fs {
        if f.dim != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: f.dim });
        }
    }
    check_z_polys(dim, ps)?;
    let zs: Vec<i64> = (1..=k as i64).collect();
    let shifts: Vec<Vec<Vec<i64>>> = zs
        .iter()
        .map(|&z| ps.iter().map(|p| p.eval(z, &[])?.to_i64s()).collect())
        .collect::<Result<_>>()?;
    let base: Vec<(Vec<i64>, Complex64)> = fs[0].grid.entries();
    let parts: Vec<Complex64> = shifts
        .par_iter()
        .map(|vs| {
            let mut acc = ZERO;
            let mut y = vec![0i64; dim];
            for (x, v0) in &base {
                let mut prod = *v0;
                for (f, v) in fs[1..].iter().zip(vs) {
                    for i in 0..dim {
                        y[i] = x[i] + v[i];
                    }
                    prod *= f.grid.get(&y);
                    if prod == ZERO {
                        break;
                    }
                }
                acc += prod;
            }
            acc
        })
        .collect();
    Ok(parts.into_iter().sum::<Complex64>() / k as f64)
}

/// `Σ_{h∈Z^r} μ_K(h) Σ_x E_{z∈[K]} Π_ε C^{|ε|} f(x + P(z + ε·h))` on `Z`,
/// where `μ_K(h) = Π_i μ_{[±K]}(h_i)`.
pub fn averaged_counting_operator(
    f: &LatticeFunction,
    p: &VectorPolynomial,
    k: u64,
    r: usize,
) -> Result<Complex64> {
    if f.dim != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: f.dim });
    }
    check_z_polys(1, std::slice::from_ref(p))?;
    if !matches!(p.deg_z(), crate::polyalg::Degree::Finite(d) if d >= 1) {
        return Err(Error::Degenerate(format!("{p} is constant in z")));
    }
    if k == 0 || r == 0 {
        return Err(Error::InvalidArgument("K and r must be positive".into()));
    }
    if r > 16 {
        return Err(Error::InvalidArgument(format!("r = {r} is too large")));
    }
    let kernel = FejerKernel::of_gap(&GenArithProgression::single(LatticeVector::from_i64s(&[1]), k))?;
    let mu: Vec<(i64, f64)> = kernel
        .float_weights()?
        .into_iter()
        .map(|(h, w)| (h[0], w))
        .collect();
    let span = 4 * k as i64 + 1;
    let zmax = k as i64 + r as i64 * 2 * k as i64;
    let zmin = 1 - r as i64 * 2 * k as i64;
    let pz: Vec<i64> = (zmin..=zmax)
        .map(|z| Ok(p.eval(z, &[])?.to_i64s()?[0]))
        .collect::<Result<_>>()?;
    let base = f.grid.entries();
    let count = (span as u128).pow(r as u32);
    let tuples: Vec<u128> = (0..count).collect();
    let parts: Vec<Complex64> = tuples
        .par_iter()
        .map(|&code| {
            let mut h = vec![0i64; r];
            let mut w = 1.0;
            let mut c = code;
            for hi in h.iter_mut() {
                let (v, wi) = mu[(c % span as u128) as usize];
                *hi = v;
                w *= wi;
                c /= span as u128;
            }
            let mut acc = ZERO;
            for z in 1..=k as i64 {
                // The ε = 0 factor pins x + P(z) to the support.
                let pzz = pz[(z - zmin) as usize];
                for (y, _) in &base {
                    let x0 = y[0] - pzz;
                    let mut prod = Complex64::new(1.0, 0.0);
                    for eps in 0..1usize << r {
                        let zz = z + (0..r).filter(|i| eps >> i & 1 == 1).map(|i| h[i]).sum::<i64>();
                        let mut v = f.grid.get(&[x0 + pz[(zz - zmin) as usize]]);
                        if eps.count_ones() % 2 == 1 {
                            v = v.conj();
                        }
                        prod *= v;
                        if prod == ZERO {
                            break;
                        }
                    }
                    acc += prod;
                }
            }
            w * acc / k as f64
        })
        .collect();
    Ok(parts.into_iter().sum())
}

/// Both sides of the van der Corput inequalities for a sequence on `[K]`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct VdcReport {
    /// `|E_{z∈[K]} f(z)|²`.
    pub lhs: f64,
    pub rhs_symmetric: f64,
    pub rhs_asymmetric: f64,
    pub holds: bool,
}

/// Absolute slack for the van der Corput comparison.
pub const VDC_TOLERANCE: f64 = 1e-12;

/// Evaluates both van der Corput bounds for `seq[z - 1] = f(z)`, `z ∈ [K]`.
pub fn vdc_inequality_check(seq: &[Complex64], h: u64) -> Result<VdcReport> {
    let k = seq.len();
    if h as usize >= k {
        return Err(Error::InvalidArgument(format!("need H < K, got H = {h}, K = {k}")));
    }
    if seq.iter().any(|v| v.norm() > 1.0 + 1e-12) {
        return Err(Error::InvalidArgument("sequence must be 1-bounded".into()));
    }
    let kf = k as f64;
    let hi = h as i64;
    let at = |z: i64| -> Complex64 {
        if z >= 1 && z <= k as i64 {
            seq[(z - 1) as usize]
        } else {
            ZERO
        }
    };
    let mean: Complex64 = seq.iter().sum::<Complex64>() / kf;
    let lhs = mean.norm_sqr();
    let factor = (kf + 2.0 * h as f64) / kf;
    let len = (2 * h + 1) as f64;

    let mut sym = ZERO;
    for a in -hi..=hi {
        for b in -hi..=hi {
            let lo = (1 - a).max(1 - b);
            let up = (k as i64 - a).min(k as i64 - b);
            for z in lo..=up {
                sym += at(z + a) * at(z + b).conj();
            }
        }
    }
    let rhs_symmetric = factor * sym.re / (len * len * kf);

    let mut asym = ZERO;
    for d in -2 * hi..=2 * hi {
        let w = (len - d.abs() as f64) / (len * len);
        let mut inner = ZERO;
        for z in 1.max(1 - d)..=(k as i64).min(k as i64 - d) {
            inner += at(z) * at(z + d).conj();
        }
        asym += w * inner;
    }
    let rhs_asymmetric = factor * asym.re / kf;
    let holds = lhs <= rhs_symmetric + VDC_TOLERANCE && lhs <= rhs_asymmetric + VDC_TOLERANCE;
    Ok(VdcReport { lhs, rhs_symmetric, rhs_asymmetric, holds })
}
