//! Oracle-derived constants for the asymptotic bounds. They are produced by
//! `equidist-sweep` with `{"kind": "fixtures"}` and frozen into
//! `fixtures/oracle_constants.json`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::CliError;

const FROZEN: &str = include_str!("../fixtures/oracle_constants.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConstants {
    pub linear_bound: LinearConstants,
    pub generic_density: DensityConstant,
    pub multilinear: MultilinearConstant,
    pub theorem15: Theorem15Constant,
}

/// `count ≤ C_ℓ (M^{ℓ-1} gcd(h)/|h_ℓ| + M^{ℓ-2})` on the swept grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearConstants {
    pub max_h: i64,
    pub max_m: u64,
    /// Keyed by `ℓ`.
    pub c: BTreeMap<usize, f64>,
}

/// Complement fraction of the generic set `≤ C η`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConstant {
    pub l: u32,
    pub t: usize,
    pub h: Vec<u64>,
    pub etas: Vec<String>,
    pub c: f64,
}

/// Single-block normalized count `≤ C η^{-E} M^{-2} H^{-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultilinearConstant {
    pub t: usize,
    pub ell: usize,
    pub hs: Vec<u64>,
    pub etas: Vec<String>,
    pub c: f64,
    pub e: f64,
}

/// Lower threshold for normalized target norms when `δ ≥ 0.5`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Theorem15Constant {
    pub min_delta: f64,
    pub threshold: f64,
}

impl OracleConstants {
    /// The constants shipped with the crate.
    pub fn frozen() -> Result<Self, CliError> {
        Self::from_json(FROZEN)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid fixture file: {e}")))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}

/// Smallest multiple of `10^-digits` that is at least `x`.
pub fn round_up(x: f64, digits: i32) -> f64 {
    let scale = 10f64.powi(digits);
    let mut r = (x * scale).ceil() / scale;
    while r < x {
        r += 1.0 / scale;
    }
    r
}

/// Largest multiple of `10^-digits` that is at most `x`.
pub fn round_down(x: f64, digits: i32) -> f64 {
    -round_up(-x, digits)
}
