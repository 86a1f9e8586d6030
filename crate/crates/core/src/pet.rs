//! The PET induction engine.
//!
//! A family `Q_1, ..., Q_s` of polynomials in `(z, h_1..h_r)` is repeatedly
//! replaced by `∂_m Q` until every member is linear in `z`. The index `m` is
//! chosen deterministically (smallest valid index), which makes the run and
//! the resulting direction polynomials reproducible.
//!
//! Indices in this API are zero-based for family members. Function indices
//! (`f_0, ..., f_ℓ`) keep their natural numbering, with `0` for the function
//! evaluated at `x`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::int::{factorial, int};
use crate::lattice::{GenArithProgression, LatticeVector};
use crate::polyalg::{Degree, Monomial, VectorPolynomial};

/// An ordered list of polynomials sharing dimension and h-arity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PolynomialFamily {
    dim: usize,
    num_h: usize,
    members: Vec<VectorPolynomial>,
}

impl PolynomialFamily {
    pub fn new(dim: usize, num_h: usize, members: Vec<VectorPolynomial>) -> Result<Self> {
        for p in &members {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.dim(),
                });
            }
            if p.num_h() != num_h {
                return Err(Error::ArityMismatch {
                    expected: num_h,
                    got: p.num_h(),
                });
            }
        }
        Ok(PolynomialFamily { dim, num_h, members })
    }

    /// Builds a family from a nonempty list, promoting to a common arity.
    pub fn from_members(members: Vec<VectorPolynomial>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty family".into()))?;
        let dim = first.dim();
        let r = members.iter().map(|p| p.num_h()).max().unwrap_or(0);
        let members = members
            .into_iter()
            .map(|p| p.promote(r))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, r, members)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_h(&self) -> usize {
        self.num_h
    }

    pub fn members(&self) -> &[VectorPolynomial] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Maximal z-degree over the family.
    pub fn max_degree(&self) -> Degree {
        self.members
            .iter()
            .map(VectorPolynomial::deg_z)
            .max()
            .unwrap_or(Degree::MinusInfinity)
    }

    /// Checks normality, returning the first violated condition.
    pub fn check_normal(&self) -> std::result::Result<(), String> {
        if self.members.is_empty() {
            return Err("family is empty".into());
        }
        let mut seen = BTreeSet::new();
        for (i, q) in self.members.iter().enumerate() {
            if q.is_zero() {
                return Err(format!("member {} is zero", i + 1));
            }
            if !q.coeff_in_z(0).is_zero() {
                return Err(format!("member {} does not vanish at z = 0", i + 1));
            }
            if !seen.insert(q) {
                return Err(format!("member {} repeats an earlier member", i + 1));
            }
        }
        if self.members[0].deg_z() != self.max_degree() {
            return Err("first member does not have maximal degree in z".into());
        }
        Ok(())
    }

    pub fn is_normal(&self) -> bool {
        self.check_normal().is_ok()
    }

    /// True when every member has degree one in `z`.
    pub fn is_linear(&self) -> bool {
        self.members.iter().all(|q| q.deg_z() == Degree::Finite(1))
    }
}

impl fmt::Display for PolynomialFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, q) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{q}")?;
        }
        write!(f, "}}")
    }
}

/// `(w_1, ..., w_{d'})`, compared colexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FamilyType(pub Vec<usize>);

impl FamilyType {
    fn at(&self, i: usize) -> usize {
        self.0.get(i).copied().unwrap_or(0)
    }
}

impl Ord for FamilyType {
    fn cmp(&self, other: &Self) -> Ordering {
        let n = self.0.len().max(other.0.len());
        for i in (0..n).rev() {
            match self.at(i).cmp(&other.at(i)) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for FamilyType {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FamilyType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|w| w.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

pub fn is_normal(q: &PolynomialFamily) -> std::result::Result<(), String> {
    q.check_normal()
}

/// Counts distinct leading coefficients per degree.
pub fn family_type(q: &PolynomialFamily) -> Result<FamilyType> {
    q.check_normal().map_err(Error::InvalidArgument)?;
    let d = q.max_degree().finite().unwrap_or(0) as usize;
    let mut per_degree: Vec<BTreeSet<VectorPolynomial>> = vec![BTreeSet::new(); d];
    for m in q.members() {
        let deg = m.deg_z().finite().expect("normal members are nonzero") as usize;
        per_degree[deg - 1].insert(m.leading_coeff_z()?);
    }
    Ok(FamilyType(per_degree.iter().map(BTreeSet::len).collect()))
}

/// The van der Corput operation `∂_m` (zero-based `m`).
pub fn vdc_op(q: &PolynomialFamily, m: usize) -> Result<PolynomialFamily> {
    if m >= q.len() {
        return Err(Error::InvalidArgument(format!(
            "index {} out of range for a family of {}",
            m + 1,
            q.len()
        )));
    }
    let r = q.num_h();
    let qm = q.members()[m].promote(r + 1)?;
    let mut raw = Vec::with_capacity(2 * q.len());
    for p in q.members() {
        raw.push(p.sigma_shift()?.sub(&qm)?);
    }
    for p in q.members() {
        raw.push(p.promote(r + 1)?.sub(&qm)?);
    }
    let keep: Vec<bool> = {
        let mut seen = std::collections::HashSet::with_capacity(raw.len());
        raw.iter().map(|p| !p.is_zero() && seen.insert(p)).collect()
    };
    let members: Vec<_> = raw
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect();
    PolynomialFamily::new(q.dim(), r + 1, members)
}

/// Deterministic choice of the index to difference by (zero-based).
pub fn choose_m(q: &PolynomialFamily) -> Result<usize> {
    if q.is_linear() {
        return Err(Error::InvalidArgument("all members are linear".into()));
    }
    let w = family_type(q)?;
    let d = w.0.len();
    let l = w.0.iter().position(|&x| x != 0).expect("normal family has a member") + 1;
    let deg = |p: &VectorPolynomial| p.deg_z().finite().unwrap_or(0) as usize;
    if l < d {
        return Ok(q.members().iter().position(|p| deg(p) == l).expect("degree present"));
    }
    if w.0[d - 1] > 1 {
        let lead = q.members()[0].leading_coeff_z()?;
        for (i, p) in q.members().iter().enumerate() {
            if p.leading_coeff_z()? != lead {
                return Ok(i);
            }
        }
    }
    Ok(0)
}

/// How the original progression was rewritten into a normal family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Normalization {
    /// The normal family handed to the PET loop.
    pub family: PolynomialFamily,
    /// Function index placed at `x` after the translation.
    pub base: usize,
    /// Function index carried by each member of `family`.
    pub slots: Vec<usize>,
    /// `P_j(0)` for `j = 1..ℓ`, removed before anything else.
    pub constant_shifts: Vec<LatticeVector>,
}

/// Normalizes with `f_1` as the function of interest.
pub fn normalize_progression(p: &[VectorPolynomial]) -> Result<Normalization> {
    normalize_for_target(p, 1)
}

/// Strips constants, checks essential distinctness and arranges the family so
/// that the member carrying `f_target` comes first with maximal degree.
///
/// If `P_target` already has maximal degree the members are only reordered.
/// Otherwise (or for `target = 0`) the progression is translated by the
/// first member `P_m` of maximal degree: `f_m` moves to `x` and every other
/// function `f_j` sits at `P_j - P_m`, with `P_0 = 0`.
pub fn normalize_for_target(p: &[VectorPolynomial], target: usize) -> Result<Normalization> {
    let fam = PolynomialFamily::from_members(p.to_vec())?;
    let ell = fam.len();
    if target > ell {
        return Err(Error::InvalidArgument(format!(
            "target f_{target} outside f_0..f_{ell}"
        )));
    }
    let mut stripped = Vec::with_capacity(ell);
    let mut shifts = Vec::with_capacity(ell);
    for q in fam.members() {
        let c = q.coeff_in_z(0);
        if !c.is_h_free() {
            return Err(Error::InvalidArgument(
                "constant terms must not depend on h".into(),
            ));
        }
        shifts.push(c.coefficient(&Monomial::one(fam.num_h())));
        stripped.push(q.sub(&c)?);
    }
    for (i, q) in stripped.iter().enumerate() {
        if q.deg_z() < Degree::Finite(1) {
            return Err(Error::Degenerate(format!("P_{} is constant in z", i + 1)));
        }
        for (j, q2) in stripped.iter().enumerate().skip(i + 1) {
            if q.sub(q2)?.deg_z() < Degree::Finite(1) {
                return Err(Error::Degenerate(format!(
                    "P_{} - P_{} is constant in z",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let max_deg = stripped.iter().map(|q| q.deg_z()).max().expect("nonempty");
    let (members, base, slots) = if target >= 1 && stripped[target - 1].deg_z() == max_deg {
        let mut members = vec![stripped[target - 1].clone()];
        let mut slots = vec![target];
        for (j, q) in stripped.iter().enumerate() {
            if j + 1 != target {
                members.push(q.clone());
                slots.push(j + 1);
            }
        }
        (members, 0, slots)
    } else {
        let m = stripped.iter().position(|q| q.deg_z() == max_deg).expect("max exists") + 1;
        let pm = &stripped[m - 1];
        let shifted = |j: usize| -> Result<VectorPolynomial> {
            if j == 0 {
                pm.neg()
            } else {
                stripped[j - 1].sub(pm)
            }
        };
        let mut members = vec![shifted(target)?];
        let mut slots = vec![target];
        for j in 0..=ell {
            if j != m && j != target {
                members.push(shifted(j)?);
                slots.push(j);
            }
        }
        (members, m, slots)
    };
    let family = PolynomialFamily::new(fam.dim(), fam.num_h(), members)?;
    family
        .check_normal()
        .map_err(|e| Error::Invariant(format!("normalization produced a non-normal family: {e}")))?;
    Ok(Normalization {
        family,
        base,
        slots,
        constant_shifts: shifts,
    })
}

/// One application of `∂_m` in a PET run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PetStep {
    pub before: PolynomialFamily,
    pub type_before: FamilyType,
    /// Zero-based index of the member differenced by.
    pub chosen_m: usize,
    pub after: PolynomialFamily,
}

/// Complete record of a PET run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PetTrace {
    pub normalization: Normalization,
    pub steps: Vec<PetStep>,
    pub final_family: PolynomialFamily,
    pub final_type: FamilyType,
    /// `C_1 = b_1` and `C_j = b_1 - b_j`, polynomials in the h-variables.
    pub directions: Vec<VectorPolynomial>,
    pub num_h_final: usize,
}

impl PetTrace {
    /// Human-readable step log.
    pub fn render_log(&self) -> String {
        let n = &self.normalization;
        let mut out = String::new();
        out.push_str(&format!(
            "normalized: {}  (base f_{}, slots {:?})\n",
            n.family, n.base, n.slots
        ));
        for (i, s) in self.steps.iter().enumerate() {
            out.push_str(&format!(
                "step {}: type {} choose m = {}\n  -> {}\n",
                i + 1,
                s.type_before,
                s.chosen_m + 1,
                s.after
            ));
        }
        out.push_str(&format!("final type {}\n", self.final_type));
        for (j, c) in self.directions.iter().enumerate() {
            out.push_str(&format!("C_{} = {}\n", j + 1, c));
        }
        out
    }

    /// Directions in canonical (sorted) order.
    pub fn sorted_directions(&self) -> Vec<VectorPolynomial> {
        let mut d = self.directions.clone();
        d.sort();
        d
    }
}

/// Options for [`pet_run_with`].
#[derive(Clone, Debug)]
pub struct PetOptions {
    /// Function index moved to the front before the run.
    pub target: usize,
    /// Overrides the default step cap.
    pub max_steps: Option<usize>,
    /// Largest family size allowed during the run.
    pub max_members: usize,
}

/// Default bound on intermediate family sizes. Families whose leading
/// coefficients force long chains of type reductions grow like a tower of
/// exponentials, so this bound is hit long before the step cap.
pub const DEFAULT_MAX_MEMBERS: usize = 1 << 12;

impl Default for PetOptions {
    fn default() -> Self {
        PetOptions {
            target: 1,
            max_steps: None,
            max_members: DEFAULT_MAX_MEMBERS,
        }
    }
}

pub fn pet_run(p: &[VectorPolynomial]) -> Result<PetTrace> {
    pet_run_with(p, &PetOptions::default())
}

fn default_step_cap(d: u32, s: usize) -> usize {
    let bits = (d as usize).saturating_mul(s).saturating_mul(4);
    if bits >= 20 {
        1 << 20
    } else {
        1 << bits
    }
}

pub fn pet_run_with(p: &[VectorPolynomial], opts: &PetOptions) -> Result<PetTrace> {
    let normalization = normalize_for_target(p, opts.target)?;
    let mut q = normalization.family.clone();
    let d = q.max_degree().finite().unwrap_or(0);
    let cap = opts.max_steps.unwrap_or_else(|| default_step_cap(d, q.len()));
    let mut steps = Vec::new();
    let mut ty = family_type(&q)?;
    while !q.is_linear() {
        if steps.len() >= cap {
            return Err(Error::CapExceeded {
                size: steps.len() as u128,
                limit: cap as u128,
            });
        }
        if 2 * q.len() > opts.max_members {
            return Err(Error::CapExceeded {
                size: 2 * q.len() as u128,
                limit: opts.max_members as u128,
            });
        }
        let m = choose_m(&q)?;
        let after = vdc_op(&q, m)?;
        after
            .check_normal()
            .map_err(|e| Error::Invariant(format!("step {}: {e}", steps.len() + 1)))?;
        let ty_after = family_type(&after)?;
        if ty_after >= ty {
            return Err(Error::Invariant(format!(
                "type did not decrease: {ty} -> {ty_after}"
            )));
        }
        steps.push(PetStep {
            before: q,
            type_before: ty,
            chosen_m: m,
            after: after.clone(),
        });
        q = after;
        ty = ty_after;
    }
    let b: Vec<VectorPolynomial> = q.members().iter().map(|m| m.coeff_in_z(1)).collect();
    let mut directions = vec![b[0].clone()];
    for bj in &b[1..] {
        directions.push(b[0].sub(bj)?);
    }
    let mut seen = BTreeSet::new();
    for (j, c) in directions.iter().enumerate() {
        if c.is_zero() {
            return Err(Error::Invariant(format!("direction C_{} vanishes", j + 1)));
        }
        if !c.is_multilinear() {
            return Err(Error::Invariant(format!("direction C_{} is not multilinear", j + 1)));
        }
        if !seen.insert(c.clone()) {
            return Err(Error::Invariant(format!("direction C_{} is repeated", j + 1)));
        }
    }
    Ok(PetTrace {
        normalization,
        num_h_final: q.num_h(),
        final_family: q,
        final_type: ty,
        directions,
        steps,
    })
}

/// Outcome of [`verify_descendence`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DescendenceReport {
    pub families_checked: usize,
    pub coefficients_checked: usize,
    pub violations: Vec<String>,
}

impl DescendenceReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the descent properties along a trace against the normalized
/// progression `P~` the run started from:
///
/// (a) in every family, the leading coefficient of `Q_1 - Q_j` is
///     multilinear in h;
/// (b) every coefficient of monomial `u` in each direction equals
///     `k! (β~_{1k} - β~_{wk})` with `k = |u| + 1` for some `w` in `[0, ℓ]`
///     such that `deg(P~_1 - P~_w) = k`; moreover `u` is multilinear and
///     `|u| ≤ d - 1`.
pub fn verify_descendence(trace: &PetTrace) -> DescendenceReport {
    let mut rep = DescendenceReport::default();
    let base = &trace.normalization.family;
    if base.num_h() != 0 {
        rep.violations
            .push("descendence is defined for progressions without h-variables".into());
        return rep;
    }
    let d = base.max_degree().finite().unwrap_or(0);
    let dim = base.dim();
    let one = Monomial::one(0);
    // candidates[k] = {k! (β~_{1k} - β~_{wk})}
    let mut candidates: Vec<BTreeSet<LatticeVector>> = vec![BTreeSet::new(); d as usize + 1];
    let p1 = &base.members()[0];
    let mut others = vec![VectorPolynomial::zero(dim, 0)];
    others.extend(base.members()[1..].iter().cloned());
    for pw in &others {
        let diff = match p1.sub(pw) {
            Ok(x) => x,
            Err(e) => {
                rep.violations.push(e.to_string());
                return rep;
            }
        };
        if let Degree::Finite(k) = diff.deg_z() {
            if k >= 1 {
                let lead = diff.coeff_in_z(k).coefficient(&one);
                match factorial(k).and_then(|f| lead.scale(&f)) {
                    Ok(v) => {
                        candidates[k as usize].insert(v);
                    }
                    Err(e) => rep.violations.push(e.to_string()),
                }
            }
        }
    }

    let mut families: Vec<&PolynomialFamily> = trace.steps.iter().map(|s| &s.before).collect();
    families.push(&trace.final_family);
    for (i, fam) in families.iter().enumerate() {
        rep.families_checked += 1;
        if let Err(e) = fam.check_normal() {
            rep.violations.push(format!("family {i}: {e}"));
            continue;
        }
        let q1 = &fam.members()[0];
        for (j, qj) in fam.members().iter().enumerate().skip(1) {
            match q1.sub(qj).and_then(|x| x.leading_coeff_z()) {
                Ok(lc) if lc.is_multilinear() => {}
                Ok(lc) => rep.violations.push(format!(
                    "family {i}: leading coefficient of Q_1 - Q_{} is not multilinear: {lc}",
                    j + 1
                )),
                Err(e) => rep.violations.push(format!("family {i}: {e}")),
            }
        }
    }

    for (j, c) in trace.directions.iter().enumerate() {
        for (u, coef) in c.terms() {
            rep.coefficients_checked += 1;
            let k = u.h_degree() + 1;
            if u.z != 0 {
                rep.violations.push(format!("C_{}: monomial {u} involves z", j + 1));
            } else if !u.is_multilinear() {
                rep.violations.push(format!("C_{}: monomial {u} is not multilinear", j + 1));
            } else if k > d {
                rep.violations
                    .push(format!("C_{}: monomial {u} has degree above {}", j + 1, d.saturating_sub(1)));
            } else if !candidates[k as usize].contains(coef) {
                rep.violations.push(format!(
                    "C_{}: coefficient {coef} of {u} is not {k}! times a leading coefficient of some P_1 - P_w",
                    j + 1
                ));
            }
        }
    }
    rep
}

/// The family `P_ε(z, h) = P(z + ε·h) - P(ε·h)` over `ε ∈ {0,1}^r`.
///
/// Order: `ε = (1, ..., 1)` first, then decreasing binary value with bit
/// `i` standing for `h_{i+1}`.
pub fn build_cube_family(p: &VectorPolynomial, r: usize) -> Result<PolynomialFamily> {
    if p.dim() != 1 || p.num_h() != 0 {
        return Err(Error::InvalidArgument(
            "cube family needs a one-dimensional polynomial in z only".into(),
        ));
    }
    if r == 0 {
        return Err(Error::InvalidArgument("r must be positive".into()));
    }
    if r >= 16 {
        return Err(Error::InvalidArgument("r too large".into()));
    }
    let d = match p.deg_z() {
        Degree::Finite(d) if d >= 2 => d,
        _ => return Err(Error::Degenerate("the cube family needs degree at least 2".into())),
    };
    let beta_d = p.coeff_in_z(d).coefficient(&Monomial::one(0));
    let pr = p.promote(r)?;
    let e1 = LatticeVector::from_i64s(&[1]);
    let shift_of = |eps: usize| -> VectorPolynomial {
        let mut terms = vec![(Monomial::z_pow(1, r), e1.clone())];
        for i in 0..r {
            if eps >> i & 1 == 1 {
                terms.push((Monomial::h_var(i, r), e1.clone()));
            }
        }
        VectorPolynomial::from_terms(1, r, terms).expect("valid terms")
    };
    let full = (1usize << r) - 1;
    let order: Vec<usize> = (0..=full).rev().collect();
    let mut members = Vec::with_capacity(order.len());
    for &eps in &order {
        let moved = pr.substitute_z(&shift_of(eps))?;
        members.push(moved.sub(&moved.coeff_in_z(0))?);
    }
    let fam = PolynomialFamily::new(1, r, members)?;
    fam.check_normal()
        .map_err(|e| Error::Invariant(format!("cube family is not normal: {e}")))?;
    let scale = beta_d.scale(&int(d as i64))?;
    for (a, &ea) in order.iter().enumerate() {
        for (b, &eb) in order.iter().enumerate() {
            if a == b {
                continue;
            }
            let diff = fam.members()[a].sub(&fam.members()[b])?;
            let mut expected = VectorPolynomial::zero(1, r);
            for i in 0..r {
                let c = (ea >> i & 1) as i64 - (eb >> i & 1) as i64;
                if c != 0 {
                    expected = expected.add(&VectorPolynomial::monomial(
                        scale.scale(&int(c))?,
                        Monomial::h_var(i, r),
                    ))?;
                }
            }
            if diff.deg_z() != Degree::Finite(d - 1) || diff.coeff_in_z(d - 1) != expected {
                return Err(Error::Invariant(format!(
                    "leading coefficient of P_ε - P_ε' is not d β_d (ε - ε')·h for ε = {ea:b}, ε' = {eb:b}"
                )));
            }
        }
    }
    Ok(fam)
}

/// The boxes `(β_{j,d} - β_{j',d}) · [±K^d]`, `d = deg(P_j - P_j')`, for every
/// `j' ≠ j` in `[0, ℓ]` with `P_0 = 0`.
pub fn theorem_target_boxes(
    p: &[VectorPolynomial],
    j: usize,
    k: u64,
) -> Result<Vec<GenArithProgression>> {
    let fam = PolynomialFamily::from_members(p.to_vec())?;
    if fam.num_h() != 0 {
        return Err(Error::InvalidArgument("progression polynomials must be in z only".into()));
    }
    let ell = fam.len();
    if j > ell {
        return Err(Error::InvalidArgument(format!("index {j} outside [0, {ell}]")));
    }
    let dim = fam.dim();
    let poly = |i: usize| {
        if i == 0 {
            VectorPolynomial::zero(dim, 0)
        } else {
            fam.members()[i - 1].clone()
        }
    };
    let pj = poly(j);
    let mut out = Vec::with_capacity(ell);
    for jp in (0..=ell).filter(|&x| x != j) {
        let diff = pj.sub(&poly(jp))?;
        let d = match diff.deg_z() {
            Degree::Finite(d) if d >= 1 => d,
            _ => {
                return Err(Error::Degenerate(format!(
                    "P_{j} - P_{jp} is constant in z"
                )))
            }
        };
        let dir = diff.coeff_in_z(d).coefficient(&Monomial::one(0));
        let len = k.checked_pow(d).ok_or(Error::Overflow("box length"))?;
        out.push(GenArithProgression::single(dir, len));
    }
    Ok(out)
}

/// One GAP term `(γ_u, H^{|u|+1})` per monomial of a multilinear `C(h)`.
pub fn concatenation_target_boxes(c: &VectorPolynomial, h: u64) -> Result<GenArithProgression> {
    if !c.is_multilinear() || !c.is_z_free() {
        return Err(Error::InvalidArgument(
            "concatenation needs a multilinear polynomial in h only".into(),
        ));
    }
    let mut terms: Vec<(&Monomial, &LatticeVector)> = c.terms().collect();
    terms.sort_by(|a, b| b.0.h_degree().cmp(&a.0.h_degree()).then(b.0.cmp(a.0)));
    let mut out = Vec::with_capacity(terms.len());
    for (u, g) in terms {
        let len = h
            .checked_pow(u.h_degree() + 1)
            .ok_or(Error::Overflow("box length"))?;
        out.push((g.clone(), len));
    }
    GenArithProgression::new(c.dim(), out)
}

/// True when every direction is homogeneous in the h-variables.
pub fn directions_homogeneous(trace: &PetTrace) -> bool {
    trace
        .directions
        .iter()
        .all(|c| c.terms().map(|(u, _)| u.h_degree()).collect::<BTreeSet<_>>().len() <= 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::parse_polynomial;

    fn p(text: &str, dim: usize) -> VectorPolynomial {
        parse_polynomial(text, dim).unwrap()
    }

    fn fam(texts: &[&str], dim: usize) -> PolynomialFamily {
        PolynomialFamily::from_members(texts.iter().map(|t| p(t, dim)).collect()).unwrap()
    }

    #[test]
    fn normality() {
        assert!(fam(&["z^2", "z"], 1).is_normal());
        assert!(!fam(&["z", "z^2"], 1).is_normal());
        assert!(!fam(&["z^2 + 1"], 1).is_normal());
        assert!(!fam(&["z^2", "z^2"], 1).is_normal());
    }

    #[test]
    fn normalization_cases() {
        let n = normalize_progression(&[p("z", 1), p("z^2", 1)]).unwrap();
        assert_eq!(n.family.members()[0].deg_z(), Degree::Finite(2));
        assert_eq!(n.family, fam(&["z - z^2", "-z^2"], 1));
        assert_eq!((n.base, n.slots.clone()), (2, vec![1, 0]));

        let corner = [p("e1*(z^2+z)", 2), p("e2*(z^2+z)", 2)];
        let n = normalize_progression(&corner).unwrap();
        assert_eq!(n.family.members(), &corner);
        assert_eq!((n.base, n.slots), (0, vec![1, 2]));

        let n = normalize_progression(&[p("z+1", 1), p("2z", 1)]).unwrap();
        assert_eq!(n.family, fam(&["z", "2z"], 1));
        assert_eq!(n.constant_shifts, vec![LatticeVector::from_i64s(&[1]), LatticeVector::from_i64s(&[0])]);

        assert!(matches!(
            normalize_progression(&[p("z+1", 1), p("z", 1)]),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(normalize_progression(&[p("5", 1)]), Err(Error::Degenerate(_))));

        let n = normalize_for_target(&[p("z^2", 1), p("3z^2", 1)], 0).unwrap();
        assert_eq!(n.family, fam(&["-z^2", "2z^2"], 1));
        assert_eq!((n.base, n.slots), (1, vec![0, 2]));
    }

    #[test]
    fn types() {
        let q = fam(&["3z^2 + z", "z^2 + 2z"], 1);
        assert_eq!(family_type(&q).unwrap(), FamilyType(vec![0, 2]));
        assert_eq!(family_type(&fam(&["z"], 1)).unwrap(), FamilyType(vec![1]));
        assert!(FamilyType(vec![1, 1]) < FamilyType(vec![0, 2]));
        assert!(FamilyType(vec![7]) < FamilyType(vec![0, 1]));
        assert!(FamilyType(vec![5, 0, 1]) > FamilyType(vec![9, 9]));
        assert!(family_type(&fam(&["z", "z^2"], 1)).is_err());
    }

    #[test]
    fn vdc_examples() {
        let q = fam(&["z^2"], 1);
        assert_eq!(vdc_op(&q, 0).unwrap(), fam(&["2h1z"], 1));
        assert!(vdc_op(&q, 1).is_err());
        assert_eq!(choose_m(&q).unwrap(), 0);
        assert!(choose_m(&fam(&["z"], 1)).is_err());
    }

    #[test]
    fn section_four_one_steps() {
        // β12 = 3, β11 = 1, β22 = 1, β21 = 2
        let q = fam(&["3z^2 + z", "z^2 + 2z"], 1);
        assert_eq!(choose_m(&q).unwrap(), 1);
        let s1 = vdc_op(&q, 1).unwrap();
        assert_eq!(s1, fam(&["2z^2 + (6h1 - 1)z", "2h1z", "2z^2 - z"], 1));
        assert_eq!(family_type(&s1).unwrap(), FamilyType(vec![1, 1]));
        assert_eq!(choose_m(&s1).unwrap(), 1);
        let s2 = vdc_op(&s1, 1).unwrap();
        assert_eq!(family_type(&s2).unwrap(), FamilyType(vec![0, 1]));
        assert_eq!(s2.len(), 4);
        assert_eq!(choose_m(&s2).unwrap(), 0);
        let s3 = vdc_op(&s2, 0).unwrap();
        assert!(s3.is_linear());
        assert_eq!(s3.len(), 7);
    }

    #[test]
    fn single_square() {
        let t = pet_run(&[p("z^2", 1)]).unwrap();
        assert_eq!(t.steps.len(), 1);
        assert_eq!(t.directions, vec![p("2h1", 1)]);
        assert!(verify_descendence(&t).passed());
    }

    #[test]
    fn linear_family_is_vacuous() {
        let t = pet_run(&[p("z", 1)]).unwrap();
        assert!(t.steps.is_empty());
        assert_eq!(t.directions, vec![p("1", 1)]);
        assert!(verify_descendence(&t).passed());
    }

    #[test]
    fn cube_family() {
        let f = build_cube_family(&p("z^2", 1), 1).unwrap();
        assert_eq!(f, fam(&["z^2 + 2h1z", "z^2 + 0h1"], 1));
        let f2 = build_cube_family(&p("z^2", 1), 2).unwrap();
        assert_eq!(f2.len(), 4);
        assert_eq!(f2.members()[0], p("z^2 + 2h1z + 2h2z", 1));
        assert_eq!(f2.members()[1], p("z^2 + 2h2z + 0h1", 1));
        assert!(build_cube_family(&p("z", 1), 1).is_err());
        assert!(build_cube_family(&p("2z^3 - z", 1), 3).is_ok());
    }

    #[test]
    fn target_boxes() {
        let fam = [p("z^2", 1), p("2z^2", 1), p("2z^2 + z", 1)];
        let b = theorem_target_boxes(&fam, 2, 3).unwrap();
        let one = |x: i64, h: u64| GenArithProgression::single(LatticeVector::from_i64s(&[x]), h);
        assert_eq!(b, vec![one(2, 9), one(1, 9), one(-1, 3)]);
        let same = [p("5e1 z^2 + e1 z", 2), p("5e2 z^2 + e2 z", 2)];
        let b = theorem_target_boxes(&same, 0, 2).unwrap();
        assert_eq!(b[0], GenArithProgression::single(LatticeVector::from_i64s(&[-5, 0]), 4));
        assert_eq!(b[1], GenArithProgression::single(LatticeVector::from_i64s(&[0, -5]), 4));
    }

    #[test]
    fn concatenation_boxes() {
        let g = concatenation_target_boxes(&p("e1*h1*h2 + e2*h1", 2), 2).unwrap();
        assert_eq!(
            g.terms(),
            &[
                (LatticeVector::from_i64s(&[1, 0]), 8),
                (LatticeVector::from_i64s(&[0, 1]), 4)
            ]
        );
        let g = concatenation_target_boxes(&VectorPolynomial::constant(LatticeVector::from_i64s(&[3]), 0), 5).unwrap();
        assert_eq!(g.terms(), &[(LatticeVector::from_i64s(&[3]), 5)]);
        assert!(concatenation_target_boxes(&p("h1^2", 1), 2).is_err());
    }
}
