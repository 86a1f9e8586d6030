//! Exact lattice primitives: vectors in Z^D, finite multisets with
//! multiplicity, generalized arithmetic progressions and Fejér kernels.
//!
//! Multisets follow the convention that `X + Y` is the convolution of the
//! weight functions, so `|X + Y| = |X| * |Y|` always holds exactly.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::int::{int, int_from_u128, int_to_string, parse_int, CheckedInt, Int};

/// Default cap on the total size of an expanded GAP.
pub const DEFAULT_EXPANSION_LIMIT: u128 = 100_000_000;

/// A point of Z^D. Ordering is lexicographic on coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVector(Vec<Int>);

impl LatticeVector {
    pub fn new(coords: Vec<Int>) -> Self {
        LatticeVector(coords)
    }

    pub fn from_i64s(coords: &[i64]) -> Self {
        LatticeVector(coords.iter().map(|&c| int(c)).collect())
    }

    pub fn zero(dim: usize) -> Self {
        LatticeVector(vec![int(0); dim])
    }

    /// The standard basis vector `e_{i+1}` (zero-based `i`).
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = vec![int(0); dim];
        v[i] = int(1);
        LatticeVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Int] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero_int())
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let c = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.c_add(b))
            .collect::<Result<_>>()?;
        Ok(LatticeVector(c))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let c = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.c_sub(b))
            .collect::<Result<_>>()?;
        Ok(LatticeVector(c))
    }

    pub fn neg(&self) -> Result<Self> {
        Ok(LatticeVector(
            self.0.iter().map(|a| a.c_neg()).collect::<Result<_>>()?,
        ))
    }

    pub fn scale(&self, k: &Int) -> Result<Self> {
        Ok(LatticeVector(
            self.0.iter().map(|a| a.c_mul(k)).collect::<Result<_>>()?,
        ))
    }

    /// Coordinates as `i64`, failing if any coordinate does not fit.
    pub fn to_i64s(&self) -> Result<Vec<i64>> {
        self.0.iter().map(|c| c.to_i64()).collect()
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", int_to_string(c))?;
        }
        write!(f, ")")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Coord {
    Small(i64),
    Big(String),
}

impl Serialize for LatticeVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let coords: Vec<Coord> = self
            .0
            .iter()
            .map(|c| match c.to_i64() {
                Ok(v) => Coord::Small(v),
                Err(_) => Coord::Big(int_to_string(c)),
            })
            .collect();
        coords.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LatticeVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let coords = Vec::<Coord>::deserialize(d)?;
        let mut out = Vec::with_capacity(coords.len());
        for c in coords {
            out.push(match c {
                Coord::Small(v) => int(v),
                Coord::Big(s) => parse_int(&s).map_err(serde::de::Error::custom)?,
            });
        }
        Ok(LatticeVector(out))
    }
}

/// A finite multiset of lattice vectors with positive multiplicities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMultiset {
    dim: usize,
    weights: BTreeMap<LatticeVector, u128>,
    total: u128,
}

impl IntMultiset {
    pub fn empty(dim: usize) -> Self {
        IntMultiset {
            dim,
            weights: BTreeMap::new(),
            total: 0,
        }
    }

    pub fn singleton(v: LatticeVector) -> Self {
        let mut m = IntMultiset::empty(v.dim());
        m.weights.insert(v, 1);
        m.total = 1;
        m
    }

    /// Builds a multiset from `(point, multiplicity)` pairs; repeated points
    /// accumulate and zero multiplicities are dropped.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (LatticeVector, u128)>) -> Result<Self> {
        let mut m = IntMultiset::empty(dim);
        for (v, k) in pairs {
            m.insert(v, k)?;
        }
        Ok(m)
    }

    /// Each point with multiplicity one (repeats accumulate).
    pub fn from_points(dim: usize, points: impl IntoIterator<Item = LatticeVector>) -> Result<Self> {
        Self::from_pairs(dim, points.into_iter().map(|p| (p, 1)))
    }

    pub fn insert(&mut self, v: LatticeVector, mult: u128) -> Result<()> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.dim(),
            });
        }
        if mult == 0 {
            return Ok(());
        }
        let e = self.weights.entry(v).or_insert(0);
        *e = e.checked_add(mult).ok_or(Error::Overflow("multiplicity"))?;
        self.total = self
            .total
            .checked_add(mult)
            .ok_or(Error::Overflow("multiset total"))?;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `|X|`, the sum of multiplicities.
    pub fn total(&self) -> u128 {
        self.total
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn multiplicity(&self, v: &LatticeVector) -> u128 {
        self.weights.get(v).copied().unwrap_or(0)
    }

    pub fn max_multiplicity(&self) -> u128 {
        self.weights.values().copied().max().unwrap_or(0)
    }

    /// Points with multiplicities in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&LatticeVector, u128)> {
        self.weights.iter().map(|(v, &k)| (v, k))
    }

    pub fn support(&self) -> impl Iterator<Item = &LatticeVector> {
        self.weights.keys()
    }

    /// True when every multiplicity of `self` is at most that of `other`.
    pub fn is_dominated_by(&self, other: &IntMultiset) -> bool {
        self.iter().all(|(v, k)| other.multiplicity(v) >= k)
    }

    fn check_dim(&self, other: &IntMultiset) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(())
    }

    /// Minkowski sum with multiplicities (convolution of weights).
    pub fn sum(&self, other: &IntMultiset) -> Result<IntMultiset> {
        self.check_dim(other)?;
        let mut out = IntMultiset::empty(self.dim);
        for (a, ka) in self.iter() {
            for (b, kb) in other.iter() {
                let k = ka.checked_mul(kb).ok_or(Error::Overflow("multiplicity"))?;
                out.insert(a.add(b)?, k)?;
            }
        }
        Ok(out)
    }

    pub fn negate(&self) -> Result<IntMultiset> {
        let mut out = IntMultiset::empty(self.dim);
        for (v, k) in self.iter() {
            out.insert(v.neg()?, k)?;
        }
        Ok(out)
    }

    /// `X - Y = X + (-Y)`.
    pub fn diff(&self, other: &IntMultiset) -> Result<IntMultiset> {
        self.sum(&other.negate()?)
    }

    /// The same support with every multiplicity set to one.
    pub fn support_set(&self) -> IntMultiset {
        IntMultiset {
            dim: self.dim,
            total: self.weights.len() as u128,
            weights: self.weights.keys().map(|v| (v.clone(), 1)).collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MultisetRepr {
    dim: usize,
    points: Vec<(LatticeVector, u128)>,
}

impl Serialize for IntMultiset {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MultisetRepr {
            dim: self.dim,
            points: self.iter().map(|(v, k)| (v.clone(), k)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMultiset {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MultisetRepr::deserialize(d)?;
        IntMultiset::from_pairs(r.dim, r.points).map_err(serde::de::Error::custom)
    }
}

/// `{k * beta : k in [-H, H]}` as a multiset. For `beta = 0` this is `{0}`
/// with multiplicity `2H + 1`.
pub fn progression(beta: &LatticeVector, h: u64) -> Result<IntMultiset> {
    let mut out = IntMultiset::empty(beta.dim());
    let h = h as i64;
    for k in -h..=h {
        out.insert(beta.scale(&int(k))?, 1)?;
    }
    Ok(out)
}

pub fn multiset_sum(x: &IntMultiset, y: &IntMultiset) -> Result<IntMultiset> {
    x.sum(y)
}

pub fn multiset_negate(x: &IntMultiset) -> Result<IntMultiset> {
    x.negate()
}

pub fn multiset_diff(x: &IntMultiset, y: &IntMultiset) -> Result<IntMultiset> {
    x.diff(y)
}

/// Sum of the multisets at the given distinct positions, in index order.
pub fn iterated_sumset_family(list: &[IntMultiset], indices: &[usize]) -> Result<IntMultiset> {
    let mut seen = std::collections::BTreeSet::new();
    for &i in indices {
        if i >= list.len() {
            return Err(Error::InvalidArgument(format!("index {i} out of range")));
        }
        if !seen.insert(i) {
            return Err(Error::InvalidArgument(format!("repeated index {i}")));
        }
    }
    let first = *indices
        .first()
        .ok_or_else(|| Error::InvalidArgument("no indices".into()))?;
    let mut acc = list[first].clone();
    for &i in &indices[1..] {
        acc = acc.sum(&list[i])?;
    }
    Ok(acc)
}

/// A generalized arithmetic progression `sum_i beta_i * [±H_i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenArithProgression {
    dim: usize,
    terms: Vec<(LatticeVector, u64)>,
}

impl GenArithProgression {
    pub fn new(dim: usize, terms: Vec<(LatticeVector, u64)>) -> Result<Self> {
        for (v, _) in &terms {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.dim(),
                });
            }
        }
        Ok(GenArithProgression { dim, terms })
    }

    pub fn single(beta: LatticeVector, h: u64) -> Self {
        GenArithProgression {
            dim: beta.dim(),
            terms: vec![(beta, h)],
        }
    }

    /// The box `[±N]^D`.
    pub fn cube(dim: usize, n: u64) -> Self {
        GenArithProgression {
            dim,
            terms: (0..dim).map(|i| (LatticeVector::unit(dim, i), n)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(LatticeVector, u64)] {
        &self.terms
    }

    /// `prod_i (2 H_i + 1)`, the size of the expansion.
    pub fn total(&self) -> Result<u128> {
        let mut acc: u128 = 1;
        for (_, h) in &self.terms {
            let len = 2 * (*h as u128) + 1;
            acc = acc.checked_mul(len).ok_or(Error::Overflow("GAP size"))?;
        }
        Ok(acc)
    }

    /// Concatenation of the term lists (the multiset sum of two GAPs).
    pub fn concat(&self, other: &GenArithProgression) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(GenArithProgression { dim: self.dim, terms })
    }

    /// Expands to a multiset, refusing totals above `limit`.
    pub fn expand(&self, limit: u128) -> Result<IntMultiset> {
        let size = self.total()?;
        if size > limit {
            return Err(Error::CapExceeded { size, limit });
        }
        let mut acc = IntMultiset::singleton(LatticeVector::zero(self.dim));
        for (beta, h) in &self.terms {
            acc = acc.sum(&progression(beta, *h)?)?;
        }
        Ok(acc)
    }
}

/// Expands a GAP with the default limit of 10^8.
pub fn gap_expand(g: &GenArithProgression) -> Result<IntMultiset> {
    g.expand(DEFAULT_EXPANSION_LIMIT)
}

/// The Fejér kernel `mu_E(h) = #{(a, b) in E x E : a - b = h} / |E|^2`.
///
/// Weights are kept as integer pair counts over the common denominator
/// `|E|^2`, so all kernel identities hold exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FejerKernel {
    dim: usize,
    counts: BTreeMap<LatticeVector, u128>,
    denom: u128,
    source_total: u128,
    source_support: usize,
}

impl FejerKernel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `|E|^2`.
    pub fn denominator(&self) -> u128 {
        self.denom
    }

    /// `|E|` of the generating multiset.
    pub fn source_total(&self) -> u128 {
        self.source_total
    }

    /// `|supp E|` of the generating multiset. For kernels built with
    /// [`FejerKernel::convolve`] this is an upper bound.
    pub fn source_support_len(&self) -> usize {
        self.source_support
    }

    pub fn support_len(&self) -> usize {
        self.counts.len()
    }

    /// Number of ordered pairs of `E` with difference `h`.
    pub fn pair_count(&self, h: &LatticeVector) -> u128 {
        self.counts.get(h).copied().unwrap_or(0)
    }

    pub fn weight(&self, h: &LatticeVector) -> Result<Ratio<Int>> {
        Ok(Ratio::new(
            int_from_u128(self.pair_count(h))?,
            int_from_u128(self.denom)?,
        ))
    }

    /// `(h, pair count)` in lexicographic order of `h`.
    pub fn iter(&self) -> impl Iterator<Item = (&LatticeVector, u128)> {
        self.counts.iter().map(|(v, &k)| (v, k))
    }

    /// Support points and floating weights, for numerical evaluation.
    pub fn float_weights(&self) -> Result<Vec<(Vec<i64>, f64)>> {
        let d = self.denom as f64;
        self.counts
            .iter()
            .map(|(v, &k)| Ok((v.to_i64s()?, k as f64 / d)))
            .collect()
    }

    /// Sum of weights as an exact rational; always one.
    pub fn total_weight(&self) -> Result<Ratio<Int>> {
        let num = self
            .counts
            .values()
            .try_fold(0u128, |a, &k| a.checked_add(k))
            .ok_or(Error::Overflow("kernel mass"))?;
        Ok(Ratio::new(int_from_u128(num)?, int_from_u128(self.denom)?))
    }

    /// Kernel of `X + Y` from the kernels of `X` and `Y`.
    pub fn convolve(&self, other: &FejerKernel) -> Result<FejerKernel> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut counts: BTreeMap<LatticeVector, u128> = BTreeMap::new();
        for (a, ka) in self.iter() {
            for (b, kb) in other.iter() {
                let k = ka.checked_mul(kb).ok_or(Error::Overflow("kernel count"))?;
                let e = counts.entry(a.add(b)?).or_insert(0);
                *e = e.checked_add(k).ok_or(Error::Overflow("kernel count"))?;
            }
        }
        Ok(FejerKernel {
            dim: self.dim,
            counts,
            denom: self
                .denom
                .checked_mul(other.denom)
                .ok_or(Error::Overflow("kernel denominator"))?,
            source_total: self
                .source_total
                .checked_mul(other.source_total)
                .ok_or(Error::Overflow("multiset total"))?,
            // Support of the sum is not tracked through convolution; this is
            // an upper bound.
            source_support: self.source_support.saturating_mul(other.source_support),
        })
    }

    /// Kernel of a GAP, built term by term without expanding the GAP.
    pub fn of_gap(g: &GenArithProgression) -> Result<FejerKernel> {
        let mut acc = fejer(&IntMultiset::singleton(LatticeVector::zero(g.dim())))?;
        for (beta, h) in g.terms() {
            acc = acc.convolve(&progression_kernel(beta, *h)?)?;
        }
        Ok(acc)
    }
}

/// Closed form for `beta * [±H]`: `2H + 1 - |k|` pairs at `k * beta`.
fn progression_kernel(beta: &LatticeVector, h: u64) -> Result<FejerKernel> {
    let len = 2 * h as u128 + 1;
    let mut counts = BTreeMap::new();
    if beta.is_zero() {
        counts.insert(beta.clone(), len * len);
    } else {
        let span = 2 * h as i64;
        for k in -span..=span {
            counts.insert(beta.scale(&int(k))?, len - k.unsigned_abs() as u128);
        }
    }
    Ok(FejerKernel {
        dim: beta.dim(),
        counts,
        denom: len * len,
        source_total: len,
        source_support: if beta.is_zero() { 1 } else { len as usize },
    })
}

/// Fejér kernel of a nonempty multiset.
pub fn fejer(e: &IntMultiset) -> Result<FejerKernel> {
    if e.is_empty() {
        return Err(Error::EmptyMultiset);
    }
    let mut counts: BTreeMap<LatticeVector, u128> = BTreeMap::new();
    for (a, ka) in e.iter() {
        for (b, kb) in e.iter() {
            let k = ka.checked_mul(kb).ok_or(Error::Overflow("kernel count"))?;
            let c = counts.entry(a.sub(b)?).or_insert(0);
            *c = c.checked_add(k).ok_or(Error::Overflow("kernel count"))?;
        }
    }
    Ok(FejerKernel {
        dim: e.dim(),
        counts,
        denom: e
            .total()
            .checked_mul(e.total())
            .ok_or(Error::Overflow("kernel denominator"))?,
        source_total: e.total(),
        source_support: e.support_len(),
    })
}
