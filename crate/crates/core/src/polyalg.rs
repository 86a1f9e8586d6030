//! Polynomials in `z, h_1, ..., h_r` with coefficients in Z^D.
//!
//! The shift variables are positional: the van der Corput operation always
//! appends a new variable at the end, so traces are reproducible.
//!
//! The text grammar accepted by [`parse_polynomial`] uses integers, `+`, `-`,
//! `*`, `^`, parentheses, the variables `z`, `h1`, `h2`, ... and basis
//! vectors `e1`, ..., `eD`. Juxtaposition means multiplication, so
//! `e1(z^2+z)` and `2h1z` are accepted. In dimension one a term without a
//! basis vector is a multiple of `e1`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::int::{binomial, int, pow, CheckedInt, Int};
use crate::lattice::LatticeVector;

/// `z^z * h_1^{h[0]} * ... * h_r^{h[r-1]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial {
    pub z: u32,
    pub h: Vec<u32>,
}

impl Monomial {
    pub fn one(num_h: usize) -> Self {
        Monomial { z: 0, h: vec![0; num_h] }
    }

    pub fn z_pow(k: u32, num_h: usize) -> Self {
        Monomial { z: k, h: vec![0; num_h] }
    }

    /// `h_{i+1}` (zero-based `i`).
    pub fn h_var(i: usize, num_h: usize) -> Self {
        let mut h = vec![0; num_h];
        h[i] = 1;
        Monomial { z: 0, h }
    }

    /// `|u|`, the total degree in the h-variables.
    pub fn h_degree(&self) -> u32 {
        self.h.iter().sum()
    }

    pub fn total_degree(&self) -> u32 {
        self.z + self.h_degree()
    }

    pub fn is_multilinear(&self) -> bool {
        self.h.iter().all(|&e| e <= 1)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial {
            z: self.z + other.z,
            h: self.h.iter().zip(&other.h).map(|(a, b)| a + b).collect(),
        }
    }

    fn padded(&self, num_h: usize) -> Monomial {
        let mut h = self.h.clone();
        h.resize(num_h, 0);
        Monomial { z: self.z, h }
    }

    fn eval(&self, z: &Int, h: &[Int]) -> Result<Int> {
        let mut acc = pow(z, self.z)?;
        for (x, &e) in h.iter().zip(&self.h) {
            acc = acc.c_mul(&pow(x, e)?)?;
        }
        Ok(acc)
    }

    /// Sort key used for rendering: higher degree first.
    fn render_key(&self) -> (u32, u32, Vec<u32>) {
        (self.total_degree(), self.z, self.h.clone())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.z {
            0 => {}
            1 => parts.push("z".to_string()),
            k => parts.push(format!("z^{k}")),
        }
        for (i, &e) in self.h.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(format!("h{}", i + 1)),
                k => parts.push(format!("h{}^{k}", i + 1)),
            }
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

/// Degree in `z`; the zero polynomial has degree `MinusInfinity`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    MinusInfinity,
    Finite(u32),
}

impl Degree {
    pub fn finite(self) -> Option<u32> {
        match self {
            Degree::Finite(d) => Some(d),
            Degree::MinusInfinity => None,
        }
    }
}

/// A polynomial in `z, h_1..h_r` with coefficients in Z^D.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VectorPolynomial {
    dim: usize,
    num_h: usize,
    terms: BTreeMap<Monomial, LatticeVector>,
}

impl VectorPolynomial {
    pub fn zero(dim: usize, num_h: usize) -> Self {
        VectorPolynomial {
            dim,
            num_h,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(v: LatticeVector, num_h: usize) -> Self {
        Self::monomial(v, Monomial::one(num_h))
    }

    pub fn monomial(coef: LatticeVector, m: Monomial) -> Self {
        let mut p = VectorPolynomial::zero(coef.dim(), m.h.len());
        if !coef.is_zero() {
            p.terms.insert(m, coef);
        }
        p
    }

    /// `beta_k z^k + ... + beta_1 z`, from coefficient vectors listed by
    /// increasing power starting at `z^1`.
    pub fn univariate(coeffs: &[LatticeVector]) -> Result<Self> {
        let dim = coeffs
            .first()
            .map(|c| c.dim())
            .ok_or_else(|| Error::InvalidArgument("no coefficients".into()))?;
        let mut p = VectorPolynomial::zero(dim, 0);
        for (i, c) in coeffs.iter().enumerate() {
            p.add_term(Monomial::z_pow(i as u32 + 1, 0), c)?;
        }
        Ok(p)
    }

    pub fn from_terms(
        dim: usize,
        num_h: usize,
        terms: impl IntoIterator<Item = (Monomial, LatticeVector)>,
    ) -> Result<Self> {
        let mut p = VectorPolynomial::zero(dim, num_h);
        for (m, c) in terms {
            if m.h.len() != num_h {
                return Err(Error::ArityMismatch {
                    expected: num_h,
                    got: m.h.len(),
                });
            }
            p.add_term(m, &c)?;
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_h(&self) -> usize {
        self.num_h
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &LatticeVector)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> LatticeVector {
        self.terms
            .get(m)
            .cloned()
            .unwrap_or_else(|| LatticeVector::zero(self.dim))
    }

    fn add_term(&mut self, m: Monomial, c: &LatticeVector) -> Result<()> {
        if c.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: c.dim(),
            });
        }
        if c.is_zero() {
            return Ok(());
        }
        let sum = match self.terms.get(&m) {
            Some(old) => old.add(c)?,
            None => c.clone(),
        };
        if sum.is_zero() {
            self.terms.remove(&m);
        } else {
            self.terms.insert(m, sum);
        }
        Ok(())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        if self.num_h != other.num_h {
            return Err(Error::ArityMismatch {
                expected: self.num_h,
                got: other.num_h,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), &c.neg()?)?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> Result<Self> {
        let mut out = VectorPolynomial::zero(self.dim, self.num_h);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), c.neg()?);
        }
        Ok(out)
    }

    pub fn scale(&self, k: &Int) -> Result<Self> {
        let mut out = VectorPolynomial::zero(self.dim, self.num_h);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), &c.scale(k)?)?;
        }
        Ok(out)
    }

    /// Product with a scalar polynomial (a polynomial of dimension one).
    pub fn mul_scalar_poly(&self, s: &VectorPolynomial) -> Result<Self> {
        if s.dim != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: s.dim,
            });
        }
        if s.num_h != self.num_h {
            return Err(Error::ArityMismatch {
                expected: self.num_h,
                got: s.num_h,
            });
        }
        let mut out = VectorPolynomial::zero(self.dim, self.num_h);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &s.terms {
                out.add_term(m1.mul(m2), &c1.scale(&c2.coords()[0])?)?;
            }
        }
        Ok(out)
    }

    /// Evaluation at integer points.
    pub fn eval(&self, z: i64, h: &[i64]) -> Result<LatticeVector> {
        let hi: Vec<Int> = h.iter().map(|&x| int(x)).collect();
        self.eval_int(&int(z), &hi)
    }

    pub fn eval_int(&self, z: &Int, h: &[Int]) -> Result<LatticeVector> {
        if h.len() != self.num_h {
            return Err(Error::ArityMismatch {
                expected: self.num_h,
                got: h.len(),
            });
        }
        let mut acc = LatticeVector::zero(self.dim);
        for (m, c) in &self.terms {
            acc = acc.add(&c.scale(&m.eval(z, h)?)?)?;
        }
        Ok(acc)
    }

    /// `gamma_i(h)`, the coefficient of `z^i`, as a polynomial in h only.
    pub fn coeff_in_z(&self, i: u32) -> Self {
        let mut out = VectorPolynomial::zero(self.dim, self.num_h);
        for (m, c) in &self.terms {
            if m.z == i {
                out.terms.insert(
                    Monomial {
                        z: 0,
                        h: m.h.clone(),
                    },
                    c.clone(),
                );
            }
        }
        out
    }

    pub fn deg_z(&self) -> Degree {
        self.terms
            .keys()
            .map(|m| m.z)
            .max()
            .map_or(Degree::MinusInfinity, Degree::Finite)
    }

    pub fn leading_coeff_z(&self) -> Result<Self> {
        match self.deg_z() {
            Degree::Finite(d) => Ok(self.coeff_in_z(d)),
            Degree::MinusInfinity => Err(Error::InvalidArgument(
                "leading coefficient of the zero polynomial".into(),
            )),
        }
    }

    /// `sigma Q(z, h, h_{r+1}) = Q(z + h_{r+1}, h) - Q(h_{r+1}, h)`.
    pub fn sigma_shift(&self) -> Result<Self> {
        let r = self.num_h;
        let mut out = VectorPolynomial::zero(self.dim, r + 1);
        for (m, c) in &self.terms {
            let base = m.padded(r + 1);
            // c h^u (z + w)^a minus its z-free part.
            for l in 1..=m.z {
                let mut mono = base.clone();
                mono.z = l;
                mono.h[r] += m.z - l;
                out.add_term(mono, &c.scale(&binomial(m.z, l)?)?)?;
            }
        }
        Ok(out)
    }

    /// Pads the h-exponents with zeros up to `new_r` variables.
    pub fn promote(&self, new_r: usize) -> Result<Self> {
        if new_r < self.num_h {
            return Err(Error::InvalidArgument(format!(
                "cannot demote from {} to {} h-variables",
                self.num_h, new_r
            )));
        }
        Ok(VectorPolynomial {
            dim: self.dim,
            num_h: new_r,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.padded(new_r), c.clone()))
                .collect(),
        })
    }

    /// Every monomial has all h-exponents at most one.
    pub fn is_multilinear(&self) -> bool {
        self.terms.keys().all(Monomial::is_multilinear)
    }

    /// No monomial involves `z`.
    pub fn is_z_free(&self) -> bool {
        self.terms.keys().all(|m| m.z == 0)
    }

    /// No monomial involves any `h_i`.
    pub fn is_h_free(&self) -> bool {
        self.terms.keys().all(|m| m.h_degree() == 0)
    }

    /// Maximal `|u|` over the monomials; zero for the zero polynomial.
    pub fn max_h_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::h_degree).max().unwrap_or(0)
    }

    /// Composition `P(S(z, h), h)` for a scalar polynomial `S`.
    pub fn substitute_z(&self, s: &VectorPolynomial) -> Result<Self> {
        if s.dim != 1 || s.num_h != self.num_h {
            return Err(Error::InvalidArgument(
                "substitution needs a scalar polynomial in the same variables".into(),
            ));
        }
        let one = VectorPolynomial::constant(LatticeVector::from_i64s(&[1]), self.num_h);
        let max_z = self.terms.keys().map(|m| m.z).max().unwrap_or(0);
        let mut powers = vec![one];
        for k in 1..=max_z as usize {
            let next = powers[k - 1].mul_scalar_poly(s)?;
            powers.push(next);
        }
        let mut out = VectorPolynomial::zero(self.dim, self.num_h);
        for (m, c) in &self.terms {
            let hpart = VectorPolynomial::monomial(
                c.clone(),
                Monomial {
                    z: 0,
                    h: m.h.clone(),
                },
            );
            out = out.add(&hpart.mul_scalar_poly(&powers[m.z as usize])?)?;
        }
        Ok(out)
    }

    /// Terms in rendering order (higher degree first).
    fn ordered_terms(&self) -> Vec<(&Monomial, &LatticeVector)> {
        let mut t: Vec<_> = self.terms.iter().collect();
        t.sort_by(|a, b| b.0.render_key().cmp(&a.0.render_key()));
        t
    }
}

impl fmt::Display for VectorPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut pieces: Vec<(bool, String)> = Vec::new();
        for (m, c) in self.ordered_terms() {
            for (i, x) in c.coords().iter().enumerate() {
                if x.is_zero_int() {
                    continue;
                }
                let negative = *x < int(0);
                let mag = if negative { x.c_neg().expect("negation") } else { x.clone() };
                let mut factors = Vec::new();
                if mag != int(1) {
                    factors.push(mag.to_string());
                }
                if m.total_degree() > 0 {
                    factors.push(m.to_string());
                }
                if self.dim > 1 {
                    factors.push(format!("e{}", i + 1));
                }
                if factors.is_empty() {
                    factors.push("1".into());
                }
                pieces.push((negative, factors.join("*")));
            }
        }
        if pieces.is_empty() {
            return write!(f, "0");
        }
        for (k, (neg, s)) in pieces.iter().enumerate() {
            match (k, neg) {
                (0, true) => write!(f, "-{s}")?,
                (0, false) => write!(f, "{s}")?,
                (_, true) => write!(f, " - {s}")?,
                (_, false) => write!(f, " + {s}")?,
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    z: u32,
    h: Vec<u32>,
    coef: LatticeVector,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    dim: usize,
    num_h: usize,
    text: Option<String>,
    terms: Vec<TermRepr>,
}

impl Serialize for VectorPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyRepr {
            dim: self.dim,
            num_h: self.num_h,
            text: Some(self.to_string()),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| TermRepr {
                    z: m.z,
                    h: m.h.clone(),
                    coef: c.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for VectorPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PolyRepr::deserialize(d)?;
        VectorPolynomial::from_terms(
            r.dim,
            r.num_h,
            r.terms.into_iter().map(|t| (Monomial { z: t.z, h: t.h }, t.coef)),
        )
        .map_err(serde::de::Error::custom)
    }
}

pub fn poly_sub(p: &VectorPolynomial, q: &VectorPolynomial) -> Result<VectorPolynomial> {
    p.sub(q)
}

pub fn promote_num_h(p: &VectorPolynomial, new_r: usize) -> Result<VectorPolynomial> {
    p.promote(new_r)
}

/// A parse failure with the byte offset where it was detected.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("parse error at position {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(i64),
    Z,
    H(usize),
    E(usize),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> std::result::Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let read_digits = |i: &mut usize| {
        let start = *i;
        while *i < bytes.len() && bytes[*i].is_ascii_digit() {
            *i += 1;
        }
        &text[start..*i]
    };
    while i < bytes.len() {
        let c = bytes[i];
        let pos = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'0'..=b'9' => {
                let digits = read_digits(&mut i);
                let n = digits.parse::<i64>().map_err(|_| ParseError {
                    position: pos,
                    message: format!("integer literal out of range: {digits}"),
                })?;
                out.push((pos, Tok::Num(n)));
                continue;
            }
            b'z' => out.push((pos, Tok::Z)),
            b'h' | b'e' => {
                i += 1;
                let digits = read_digits(&mut i);
                let idx: usize = digits.parse().map_err(|_| ParseError {
                    position: pos,
                    message: format!("expected an index after '{}'", c as char),
                })?;
                if idx == 0 {
                    return Err(ParseError {
                        position: pos,
                        message: "indices start at 1".into(),
                    });
                }
                out.push((pos, if c == b'h' { Tok::H(idx) } else { Tok::E(idx) }));
                continue;
            }
            b'+' => out.push((pos, Tok::Plus)),
            b'-' => out.push((pos, Tok::Minus)),
            b'*' => out.push((pos, Tok::Star)),
            b'^' => out.push((pos, Tok::Caret)),
            b'(' => out.push((pos, Tok::LParen)),
            b')' => out.push((pos, Tok::RParen)),
            _ => {
                return Err(ParseError {
                    position: pos,
                    message: format!("unexpected character '{}'", text[pos..].chars().next().unwrap_or('?')),
                })
            }
        }
        i += 1;
    }
    Ok(out)
}

#[derive(Clone, Debug)]
enum Val {
    Scalar(VectorPolynomial),
    Vector(VectorPolynomial),
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    dim: usize,
    num_h: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, at: usize, msg: impl Into<String>) -> std::result::Result<T, ParseError> {
        Err(ParseError {
            position: at,
            message: msg.into(),
        })
    }

    fn lift(&self, at: usize, e: Error) -> ParseError {
        ParseError {
            position: at,
            message: e.to_string(),
        }
    }

    fn scalar_const(&self, n: i64) -> VectorPolynomial {
        VectorPolynomial::constant(LatticeVector::from_i64s(&[n]), self.num_h)
    }

    fn to_vector(&self, v: Val, at: usize) -> std::result::Result<VectorPolynomial, ParseError> {
        match v {
            Val::Vector(p) => Ok(p),
            Val::Scalar(s) if s.is_zero() => Ok(VectorPolynomial::zero(self.dim, self.num_h)),
            Val::Scalar(s) if self.dim == 1 => Ok(s),
            Val::Scalar(_) => self.err(at, format!("term without a basis vector in dimension {}", self.dim)),
        }
    }

    fn expr(&mut self) -> std::result::Result<Val, ParseError> {
        let mut acc = self.term()?;
        loop {
            let at = self.here();
            let negate = match self.peek() {
                Some(Tok::Plus) => false,
                Some(Tok::Minus) => true,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            acc = self.combine(acc, rhs, negate, at)?;
        }
        Ok(acc)
    }

    fn combine(&self, a: Val, b: Val, negate: bool, at: usize) -> std::result::Result<Val, ParseError> {
        let op = |x: &VectorPolynomial, y: &VectorPolynomial| if negate { x.sub(y) } else { x.add(y) };
        match (a, b) {
            (Val::Scalar(x), Val::Scalar(y)) => Ok(Val::Scalar(op(&x, &y).map_err(|e| self.lift(at, e))?)),
            (a, b) => {
                let x = self.to_vector(a, at)?;
                let y = self.to_vector(b, at)?;
                Ok(Val::Vector(op(&x, &y).map_err(|e| self.lift(at, e))?))
            }
        }
    }

    fn starts_factor(t: Option<&Tok>) -> bool {
        matches!(t, Some(Tok::Num(_) | Tok::Z | Tok::H(_) | Tok::E(_) | Tok::LParen))
    }

    fn term(&mut self) -> std::result::Result<Val, ParseError> {
        let mut acc = self.unary()?;
        loop {
            let at = self.here();
            if self.peek() == Some(&Tok::Star) {
                self.pos += 1;
            } else if !Self::starts_factor(self.peek()) {
                break;
            }
            let rhs = self.unary()?;
            acc = self.multiply(acc, rhs, at)?;
        }
        Ok(acc)
    }

    fn multiply(&self, a: Val, b: Val, at: usize) -> std::result::Result<Val, ParseError> {
        let lift = |e| self.lift(at, e);
        match (a, b) {
            (Val::Scalar(x), Val::Scalar(y)) => Ok(Val::Scalar(x.mul_scalar_poly(&y).map_err(lift)?)),
            (Val::Vector(x), Val::Scalar(y)) | (Val::Scalar(y), Val::Vector(x)) => {
                Ok(Val::Vector(x.mul_scalar_poly(&y).map_err(lift)?))
            }
            (Val::Vector(_), Val::Vector(_)) => self.err(at, "product of two vectors"),
        }
    }

    fn unary(&mut self) -> std::result::Result<Val, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            let at = self.here();
            self.pos += 1;
            let v = self.unary()?;
            let minus = Val::Scalar(self.scalar_const(-1));
            return self.multiply(minus, v, at);
        }
        self.power()
    }

    fn power(&mut self) -> std::result::Result<Val, ParseError> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        let at = self.here();
        self.pos += 1;
        let exp = match self.peek() {
            Some(Tok::Num(n)) if *n >= 0 => *n as u32,
            _ => return self.err(self.here(), "expected a nonnegative integer exponent"),
        };
        self.pos += 1;
        match base {
            Val::Scalar(s) => {
                let mut acc = self.scalar_const(1);
                for _ in 0..exp {
                    acc = acc.mul_scalar_poly(&s).map_err(|e| self.lift(at, e))?;
                }
                Ok(Val::Scalar(acc))
            }
            Val::Vector(v) if exp == 1 => Ok(Val::Vector(v)),
            Val::Vector(_) => self.err(at, "power of a vector"),
        }
    }

    fn atom(&mut self) -> std::result::Result<Val, ParseError> {
        let at = self.here();
        let tok = match self.peek() {
            Some(t) => t.clone(),
            None => return self.err(at, "unexpected end of input"),
        };
        self.pos += 1;
        let one = LatticeVector::from_i64s(&[1]);
        match tok {
            Tok::Num(n) => Ok(Val::Scalar(self.scalar_const(n))),
            Tok::Z => Ok(Val::Scalar(VectorPolynomial::monomial(one, Monomial::z_pow(1, self.num_h)))),
            Tok::H(i) => Ok(Val::Scalar(VectorPolynomial::monomial(one, Monomial::h_var(i - 1, self.num_h)))),
            Tok::E(i) => {
                if i > self.dim {
                    return self.err(at, format!("basis vector e{i} exceeds dimension {}", self.dim));
                }
                Ok(Val::Vector(VectorPolynomial::constant(LatticeVector::unit(self.dim, i - 1), self.num_h)))
            }
            Tok::LParen => {
                let v = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err(self.here(), "expected ')'");
                }
                self.pos += 1;
                Ok(v)
            }
            _ => self.err(at, "expected a number, variable, basis vector or '('"),
        }
    }
}

/// Parses one polynomial in dimension `dim`. The result has as many
/// h-variables as the largest index mentioned.
pub fn parse_polynomial(text: &str, dim: usize) -> std::result::Result<VectorPolynomial, ParseError> {
    parse_polynomial_with_h(text, dim, 0)
}

/// Like [`parse_polynomial`] but with at least `min_h` h-variables.
pub fn parse_polynomial_with_h(
    text: &str,
    dim: usize,
    min_h: usize,
) -> std::result::Result<VectorPolynomial, ParseError> {
    if dim == 0 {
        return Err(ParseError {
            position: 0,
            message: "dimension must be positive".into(),
        });
    }
    let toks = tokenize(text)?;
    let num_h = toks
        .iter()
        .filter_map(|(_, t)| if let Tok::H(i) = t { Some(*i) } else { None })
        .max()
        .unwrap_or(0)
        .max(min_h);
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        dim,
        num_h,
    };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err(p.here(), "unexpected trailing input");
    }
    p.to_vector(v, 0)
}

/// Parses a list of polynomials sharing a common number of h-variables.
pub fn parse_family(texts: &[String], dim: usize) -> std::result::Result<Vec<VectorPolynomial>, ParseError> {
    let polys = texts
        .iter()
        .map(|t| parse_polynomial(t, dim))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let r = polys.iter().map(|p| p.num_h()).max().unwrap_or(0);
    Ok(polys.into_iter().map(|p| p.promote(r).expect("promotion up")).collect())
}
