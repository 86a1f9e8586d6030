//! JSON experiment configs.
//!
//! ```json
//! {
//!   "scenario": "theorem15-check",
//!   "seed": 7,
//!   "dim": 2,
//!   "family": ["e1*z^2", "e2*z^2"],
//!   "functions": [{ "kind": "indicator_cube", "n": 32 }, { "kind": "padded_constant", "n": 32 }],
//!   "n": 32, "k": 1, "t": 1
//! }
//! ```
//!
//! Polynomials use the core text grammar: integers, `+`, `-`, `*`, `^`,
//! parentheses, `z`, `h1, h2, ...` and basis vectors `e1, ..., eD`.

use std::path::Path;

use boxnorm_core::lattice::{GenArithProgression, LatticeVector};
use boxnorm_core::polyalg::{parse_family, parse_polynomial, VectorPolynomial};
use boxnorm_core::LatticeFunction;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_dim")]
    pub dim: usize,
    /// Progression polynomials `P_1, ..., P_ℓ` in `z`, or a PET family.
    #[serde(default)]
    pub family: Vec<String>,
    /// Function constructors, `f_0, f_1, ...` in order.
    #[serde(default)]
    pub functions: Vec<FunctionSpec>,
    pub n: Option<u64>,
    pub k: Option<u64>,
    /// Multiplicity of each target box.
    pub t: Option<usize>,
    pub h: Option<u64>,
    pub m: Option<u64>,
    /// Multilinear polynomial for the concatenation check.
    pub direction: Option<String>,
    /// Box lists for the norm scenario; each box is a list of GAP terms.
    #[serde(default)]
    pub boxes: Vec<Vec<Vec<GapTerm>>>,
    /// Indices `j` whose target norms are reported; all when absent.
    pub targets: Option<Vec<usize>>,
    #[serde(default)]
    pub cross_check: bool,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    pub work_limit: Option<u128>,
    pub sweep: Option<SweepSpec>,
}

fn default_dim() -> usize {
    1
}

fn default_tolerance() -> f64 {
    1e-9
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Pet,
    Norm,
    CountOp,
    Theorem15Check,
    ConcatCheck,
    EquidistSweep,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Pet => "pet",
            Scenario::Norm => "norm",
            Scenario::CountOp => "count-op",
            Scenario::Theorem15Check => "theorem15-check",
            Scenario::ConcatCheck => "concat-check",
            Scenario::EquidistSweep => "equidist-sweep",
        }
    }
}

/// One term `dir · [±len]` of a GAP.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GapTerm {
    pub dir: Vec<i64>,
    pub len: u64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Zero,
    /// Indicator of `[1, n]^D`.
    IndicatorCube { n: i64 },
    IndicatorBox { lo: Vec<i64>, hi: Vec<i64> },
    ConstantBox { lo: Vec<i64>, hi: Vec<i64>, value: f64 },
    /// Constant 1 on `[1 - pad, n + pad]^D`, with `pad` the largest
    /// coordinate of any `P_j(z)`, `z ∈ [K]`, so every shifted copy of
    /// `[n]^D` stays inside.
    PaddedConstant { n: i64 },
    RandomPm1 { n: i64 },
    RandomUnimodular { n: i64 },
    RandomBounded { n: i64 },
}

/// Which sweep the equidistribution scenario runs.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepSpec {
    /// Worst-target linear counts for `ℓ ∈ ells`, `h ∈ [1, max_h]^ℓ`, `M ≤ max_m`.
    Linear { ells: Vec<usize>, max_h: i64, max_m: u64 },
    /// Complement density of the generic set.
    Density { l: u32, t: usize, h: Vec<u64>, etas: Vec<String> },
    /// Maximum normalized count of single-block systems, `H = M`.
    Multilinear { t: usize, ell: usize, hs: Vec<u64>, etas: Vec<String> },
    /// All of the above at the grids used for the fixture constants.
    Fixtures,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.dim == 0 {
            return Err(CliError::Config("dim must be positive".into()));
        }
        for (name, v) in [("n", self.n), ("k", self.k), ("h", self.h), ("m", self.m)] {
            if v == Some(0) {
                return Err(CliError::Config(format!("{name} must be positive")));
            }
        }
        if self.t == Some(0) {
            return Err(CliError::Config("t must be positive".into()));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(CliError::Config("tolerance must be non-negative".into()));
        }
        Ok(())
    }

    pub fn require<T: Copy>(&self, name: &str, v: Option<T>) -> Result<T, CliError> {
        v.ok_or_else(|| CliError::Config(format!("scenario {} needs `{name}`", self.scenario.name())))
    }

    pub fn polynomials(&self) -> Result<Vec<VectorPolynomial>, CliError> {
        if self.family.is_empty() {
            return Err(CliError::Config("`family` is empty".into()));
        }
        parse_family(&self.family, self.dim).map_err(|e| CliError::Config(format!("family: {e}")))
    }

    pub fn direction_polynomial(&self) -> Result<VectorPolynomial, CliError> {
        let text = self
            .direction
            .as_deref()
            .ok_or_else(|| CliError::Config("scenario needs `direction`".into()))?;
        parse_polynomial(text, self.dim).map_err(|e| CliError::Config(format!("direction: {e}")))
    }

    pub fn gap_lists(&self) -> Result<Vec<Vec<GenArithProgression>>, CliError> {
        self.boxes
            .iter()
            .map(|list| {
                list.iter()
                    .map(|terms| {
                        let terms = terms
                            .iter()
                            .map(|t| {
                                if t.dir.len() != self.dim {
                                    return Err(CliError::Config(format!(
                                        "box direction {:?} has wrong dimension",
                                        t.dir
                                    )));
                                }
                                Ok((LatticeVector::from_i64s(&t.dir), t.len))
                            })
                            .collect::<Result<Vec<_>, _>>()?;
                        GenArithProgression::new(self.dim, terms).map_err(CliError::from)
                    })
                    .collect()
            })
            .collect()
    }

    /// Builds every configured function. `ps` and `k` feed the padding of
    /// `padded_constant`.
    pub fn build_functions(
        &self,
        ps: &[VectorPolynomial],
        k: u64,
    ) -> Result<Vec<LatticeFunction>, CliError> {
        self.functions
            .iter()
            .enumerate()
            .map(|(i, spec)| build_function(spec, self.dim, stream_seed(self.seed, i), ps, k))
            .collect()
    }
}

/// Independent stream for constructor `index` (splitmix64 finalizer).
pub fn stream_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Largest `|P_j(z)_i|` over `z ∈ [K]`.
pub fn max_shift(ps: &[VectorPolynomial], k: u64) -> Result<i64, CliError> {
    let mut pad = 0i64;
    for p in ps {
        for z in 1..=k as i64 {
            for c in p.eval(z, &[])?.to_i64s()? {
                pad = pad.max(c.checked_abs().ok_or(CliError::Config("shift overflow".into()))?);
            }
        }
    }
    Ok(pad)
}

fn build_function(
    spec: &FunctionSpec,
    dim: usize,
    seed: u64,
    ps: &[VectorPolynomial],
    k: u64,
) -> Result<LatticeFunction, CliError> {
    let positive = |n: i64| {
        if n <= 0 {
            Err(CliError::Config(format!("function size {n} must be positive")))
        } else {
            Ok(n)
        }
    };
    let f = match spec {
        FunctionSpec::Zero => LatticeFunction::zero(dim),
        FunctionSpec::IndicatorCube { n } => LatticeFunction::indicator_cube(dim, positive(*n)?)?,
        FunctionSpec::IndicatorBox { lo, hi } => LatticeFunction::indicator_box(lo, hi)?,
        FunctionSpec::ConstantBox { lo, hi, value } => {
            LatticeFunction::constant_box(lo, hi, Complex64::new(*value, 0.0))?
        }
        FunctionSpec::PaddedConstant { n } => {
            let pad = max_shift(ps, k)?;
            let n = positive(*n)?;
            LatticeFunction::constant_box(&vec![1 - pad; dim], &vec![n + pad; dim], Complex64::new(1.0, 0.0))?
        }
        FunctionSpec::RandomPm1 { n } => LatticeFunction::random_pm1(dim, positive(*n)?, seed)?,
        FunctionSpec::RandomUnimodular { n } => LatticeFunction::random_unimodular(dim, positive(*n)?, seed)?,
        FunctionSpec::RandomBounded { n } => LatticeFunction::random_bounded(dim, positive(*n)?, seed)?,
    };
    if f.dim() != dim {
        return Err(CliError::Config(format!("function has dimension {}, expected {dim}", f.dim())));
    }
    Ok(f)
}

/// Parses `"1/8"`, `"0.05"` or `"3"` into a positive rational.
pub fn parse_eta(text: &str) -> Result<num_rational::Ratio<i64>, CliError> {
    let bad = || CliError::Config(format!("invalid η `{text}`"));
    let t = text.trim();
    let r = if let Some((a, b)) = t.split_once('/') {
        let (a, b): (i64, i64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if b == 0 {
            return Err(bad());
        }
        num_rational::Ratio::new(a, b)
    } else if let Some((int, frac)) = t.split_once('.') {
        if frac.len() > 12 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let den = 10i64.pow(frac.len() as u32);
        let whole: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let part: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        num_rational::Ratio::new(whole * den + part, den)
    } else {
        num_rational::Ratio::from_integer(t.parse().map_err(|_| bad())?)
    };
    if *r.numer() <= 0 {
        return Err(bad());
    }
    Ok(r)
}
