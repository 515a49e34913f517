//! Exact arithmetic in the finite-sum subring of the single-variable Novikov
//! field.
//!
//! A [`NovikovScalar`] is a finite sum `c_1 q^{m_1} + ... + c_k q^{m_k}` with
//! Gaussian-rational coefficients and rational exponents, stored with strictly
//! increasing exponents and no zero coefficients. Finite sums satisfy the
//! Novikov growth condition trivially; genuine series only appear through
//! [`NovikovScalar::invert_to_order`], which truncates at a chosen valuation.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NovikovError {
    #[error("attempted to invert zero")]
    ZeroDivisor,
    #[error("cannot parse Novikov scalar from {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

/// Build a rational from an integer numerator and denominator.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Round a float to the nearest rational with the given denominator.
pub fn rational_from_f64(x: f64, denominator: u64) -> BigRational {
    let scaled = (x * denominator as f64).round();
    BigRational::new(BigInt::from(scaled as i128), BigInt::from(denominator))
}

fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(BigRational::new(n, d))
            }
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

/// A complex number with exact rational real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussianRational { re, im }
    }

    pub fn from_rational(re: BigRational) -> Self {
        GaussianRational { re, im: BigRational::zero() }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(n.into()))
    }

    pub fn i() -> Self {
        GaussianRational { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussianRational { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if self.im.is_zero() {
            return Some(Self::from_rational(self.re.recip()));
        }
        let n = self.norm_sqr();
        Some(GaussianRational { re: &self.re / &n, im: -(&self.im / &n) })
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }

    fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        let inner = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')).unwrap_or(s).trim();
        if let Some(body) = inner.strip_suffix('i') {
            // "a+bi", "a-bi", "bi", "i", "-i"
            let split = body
                .char_indices()
                .skip(1)
                .filter(|&(i, c)| (c == '+' || c == '-') && !body[..i].ends_with('/'))
                .map(|(i, _)| i)
                .last();
            let (re, im) = match split {
                Some(i) => (parse_rational(&body[..i])?, &body[i..]),
                None => (BigRational::zero(), body),
            };
            let im = match im.trim() {
                "" | "+" => BigRational::one(),
                "-" => -BigRational::one(),
                t => parse_rational(t.strip_prefix('+').unwrap_or(t))?,
            };
            Some(GaussianRational { re, im })
        } else {
            Some(Self::from_rational(parse_rational(inner)?))
        }
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", fmt_rational(&self.re))
        } else {
            let sign = if self.im.is_negative() { '-' } else { '+' };
            write!(f, "({}{}{}i)", fmt_rational(&self.re), sign, fmt_rational(&self.im.abs()))
        }
    }
}

impl Zero for GaussianRational {
    fn zero() -> Self {
        Self::from_rational(BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussianRational {
    fn one() -> Self {
        Self::from_rational(BigRational::one())
    }
}

impl<'a> Add<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl<'a> Sub<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl<'a> Mul<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &GaussianRational) -> GaussianRational {
        if self.im.is_zero() && rhs.im.is_zero() {
            return GaussianRational::from_rational(&self.re * &rhs.re);
        }
        GaussianRational { re: &self.re * &rhs.re - &self.im * &rhs.im, im: &self.re * &rhs.im + &self.im * &rhs.re }
    }
}

impl Add for GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: GaussianRational) -> GaussianRational {
        &self + &rhs
    }
}

impl Mul for GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: GaussianRational) -> GaussianRational {
        &self * &rhs
    }
}

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational { re: -self.re, im: -self.im }
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational { re: -self.re.clone(), im: -self.im.clone() }
    }
}

/// One summand `coeff * q^exponent`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub coeff: GaussianRational,
    pub exponent: BigRational,
}

/// A finite Novikov sum with exact coefficients and exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct NovikovScalar {
    terms: Vec<Term>,
}

impl NovikovScalar {
    /// Build from arbitrary terms, collecting like exponents and dropping zeros.
    pub fn from_terms(terms: impl IntoIterator<Item = Term>) -> Self {
        let mut terms: Vec<Term> = terms.into_iter().filter(|t| !t.coeff.is_zero()).collect();
        terms.sort_by(|a, b| a.exponent.cmp(&b.exponent));
        let mut out: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            match out.last_mut() {
                Some(last) if last.exponent == t.exponent => {
                    last.coeff = &last.coeff + &t.coeff;
                }
                _ => out.push(t),
            }
        }
        out.retain(|t| !t.coeff.is_zero());
        NovikovScalar { terms: out }
    }

    pub fn monomial(coeff: GaussianRational, exponent: BigRational) -> Self {
        Self::from_terms([Term { coeff, exponent }])
    }

    pub fn constant(coeff: GaussianRational) -> Self {
        Self::monomial(coeff, BigRational::zero())
    }

    pub fn from_rational(r: BigRational) -> Self {
        Self::constant(GaussianRational::from_rational(r))
    }

    pub fn from_integer(n: i64) -> Self {
        Self::constant(GaussianRational::from_integer(n))
    }

    /// `q^exponent`.
    pub fn q_pow(exponent: BigRational) -> Self {
        Self::monomial(GaussianRational::one(), exponent)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// True when the only exponent present is zero.
    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.exponent.is_zero())
    }

    pub fn leading_term(&self) -> Option<&Term> {
        self.terms.first()
    }

    /// Least exponent, or `None` for zero (valuation `+∞`).
    pub fn valuation(&self) -> Option<BigRational> {
        self.terms.first().map(|t| t.exponent.clone())
    }

    /// Exact inverse of a monomial; `None` for zero or for sums of several terms.
    pub fn monomial_inverse(&self) -> Option<Self> {
        match self.terms.as_slice() {
            [t] => Some(Self::monomial(t.coeff.inv()?, -t.exponent.clone())),
            _ => None,
        }
    }

    /// Inverse truncated at valuation `order`: the returned `b` satisfies
    /// `a * b = 1 + (terms of exponent >= order)`. The leading term of `b` is
    /// always the exact inverse of the leading term of `a`.
    pub fn invert_to_order(&self, order: &BigRational) -> Result<Self, NovikovError> {
        let lead = self.leading_term().ok_or(NovikovError::ZeroDivisor)?;
        let lead_inv = Self::monomial(lead.coeff.inv().ok_or(NovikovError::ZeroDivisor)?, -lead.exponent.clone());
        // a = lead * (1 + r) with r of strictly positive valuation
        let one_plus_r = &lead_inv * self;
        let minus_r = &Self::one() - &one_plus_r;
        let mut sum = Self::one();
        if !minus_r.is_zero() {
            let mut power = Self::one();
            loop {
                power = (&power * &minus_r).truncate_below(order);
                if power.is_zero() {
                    break;
                }
                sum += &power;
            }
        }
        Ok(&lead_inv * &sum)
    }

    /// Drop all terms with exponent `>= bound`.
    pub fn truncate_below(mut self, bound: &BigRational) -> Self {
        self.terms.retain(|t| &t.exponent < bound);
        self
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        Self::from_terms(self.terms.iter().map(|t| Term { coeff: &t.coeff * c, exponent: t.exponent.clone() }))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// The ring homomorphism `q -> 1`.
    pub fn specialize_q_to_one(&self) -> GaussianRational {
        self.terms.iter().fold(GaussianRational::zero(), |acc, t| &acc + &t.coeff)
    }

    /// Coefficient of `q^0`.
    pub fn constant_coefficient(&self) -> GaussianRational {
        self.terms.iter().find(|t| t.exponent.is_zero()).map(|t| t.coeff.clone()).unwrap_or_else(GaussianRational::zero)
    }

    /// Term list as JSON: `[{"coeff": "...", "exp": "..."}]`.
    pub fn to_term_list(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.terms
                .iter()
                .map(|t| serde_json::json!({"coeff": t.coeff.to_string(), "exp": fmt_rational(&t.exponent)}))
                .collect(),
        )
    }

    fn from_term_list(v: &serde_json::Value) -> Option<Self> {
        let mut terms = Vec::new();
        for item in v.as_array()? {
            let coeff = GaussianRational::parse(item.get("coeff")?.as_str()?)?;
            let exponent = parse_rational(item.get("exp")?.as_str()?)?;
            terms.push(Term { coeff, exponent });
        }
        Some(Self::from_terms(terms))
    }
}

impl Zero for NovikovScalar {
    fn zero() -> Self {
        NovikovScalar { terms: Vec::new() }
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for NovikovScalar {
    fn one() -> Self {
        Self::from_integer(1)
    }
}

fn merge(a: &[Term], b: &[Term], negate_b: bool) -> Vec<Term> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let signed = |t: &Term| {
        if negate_b {
            Term { coeff: -&t.coeff, exponent: t.exponent.clone() }
        } else {
            t.clone()
        }
    };
    while i < a.len() && j < b.len() {
        match a[i].exponent.cmp(&b[j].exponent) {
            Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                out.push(signed(&b[j]));
                j += 1;
            }
            Ordering::Equal => {
                let coeff = if negate_b { &a[i].coeff - &b[j].coeff } else { &a[i].coeff + &b[j].coeff };
                if !coeff.is_zero() {
                    out.push(Term { coeff, exponent: a[i].exponent.clone() });
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend(a[i..].iter().cloned());
    out.extend(b[j..].iter().map(signed));
    out
}

impl<'a> Add<&'a NovikovScalar> for &'a NovikovScalar {
    type Output = NovikovScalar;
    fn add(self, rhs: &NovikovScalar) -> NovikovScalar {
        NovikovScalar { terms: merge(&self.terms, &rhs.terms, false) }
    }
}

impl<'a> Sub<&'a NovikovScalar> for &'a NovikovScalar {
    type Output = NovikovScalar;
    fn sub(self, rhs: &NovikovScalar) -> NovikovScalar {
        NovikovScalar { terms: merge(&self.terms, &rhs.terms, true) }
    }
}

impl<'a> Mul<&'a NovikovScalar> for &'a NovikovScalar {
    type Output = NovikovScalar;
    fn mul(self, rhs: &NovikovScalar) -> NovikovScalar {
        if self.terms.len() == 1 && rhs.terms.len() == 1 {
            let (a, b) = (&self.terms[0], &rhs.terms[0]);
            let exponent = if a.exponent.is_zero() { b.exponent.clone() } else { &a.exponent + &b.exponent };
            return NovikovScalar { terms: vec![Term { coeff: &a.coeff * &b.coeff, exponent }] };
        }
        NovikovScalar::from_terms(self.terms.iter().flat_map(|a| {
            rhs.terms.iter().map(move |b| Term { coeff: &a.coeff * &b.coeff, exponent: &a.exponent + &b.exponent })
        }))
    }
}

impl Neg for &NovikovScalar {
    type Output = NovikovScalar;
    fn neg(self) -> NovikovScalar {
        NovikovScalar {
            terms: self.terms.iter().map(|t| Term { coeff: -&t.coeff, exponent: t.exponent.clone() }).collect(),
        }
    }
}

impl Neg for NovikovScalar {
    type Output = NovikovScalar;
    fn neg(mut self) -> NovikovScalar {
        for t in &mut self.terms {
            t.coeff = -&t.coeff;
        }
        self
    }
}

impl Add for NovikovScalar {
    type Output = NovikovScalar;
    fn add(self, rhs: NovikovScalar) -> NovikovScalar {
        &self + &rhs
    }
}

impl Sub for NovikovScalar {
    type Output = NovikovScalar;
    fn sub(self, rhs: NovikovScalar) -> NovikovScalar {
        &self - &rhs
    }
}

impl Mul for NovikovScalar {
    type Output = NovikovScalar;
    fn mul(self, rhs: NovikovScalar) -> NovikovScalar {
        &self * &rhs
    }
}

impl AddAssign<&NovikovScalar> for NovikovScalar {
    fn add_assign(&mut self, rhs: &NovikovScalar) {
        if rhs.is_zero() {
            return;
        }
        self.terms = merge(&self.terms, &rhs.terms, false);
    }
}

impl SubAssign<&NovikovScalar> for NovikovScalar {
    fn sub_assign(&mut self, rhs: &NovikovScalar) {
        if rhs.is_zero() {
            return;
        }
        self.terms = merge(&self.terms, &rhs.terms, true);
    }
}

impl MulAssign<&NovikovScalar> for NovikovScalar {
    fn mul_assign(&mut self, rhs: &NovikovScalar) {
        *self = &*self * rhs;
    }
}

impl fmt::Display for NovikovScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if t.exponent.is_zero() {
                write!(f, "{}", t.coeff)?;
            } else {
                write!(f, "{}*q^{{{}}}", t.coeff, fmt_rational(&t.exponent))?;
            }
        }
        Ok(())
    }
}

fn split_top_level_terms(s: &str) -> Vec<(bool, String)> {
    // Split on '+'/'-' outside of parentheses and braces, and not right after
    // an exponent caret or a '/'.
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut current = String::new();
    let mut negative = false;
    let mut prev: Option<char> = None;
    for c in s.chars() {
        match c {
            '(' | '{' => depth += 1,
            ')' | '}' => depth -= 1,
            _ => {}
        }
        let prev_sig = prev.filter(|p| !p.is_whitespace());
        let is_sep = depth == 0 && (c == '+' || c == '-') && !matches!(prev_sig, Some('^') | Some('/') | Some('*'));
        if is_sep {
            if !current.trim().is_empty() {
                out.push((negative, current.trim().to_string()));
                current.clear();
                negative = c == '-';
            } else {
                negative ^= c == '-';
            }
        } else {
            current.push(c);
        }
        if !c.is_whitespace() {
            prev = Some(c);
        }
    }
    if !current.trim().is_empty() {
        out.push((negative, current.trim().to_string()));
    }
    out
}

fn parse_term(s: &str) -> Option<Term> {
    let s = s.trim();
    let (coeff_part, q_part) = match s.find('q') {
        Some(idx) => (s[..idx].trim().trim_end_matches('*').trim(), Some(s[idx + 1..].trim())),
        None => (s, None),
    };
    let coeff = if coeff_part.is_empty() { GaussianRational::one() } else { GaussianRational::parse(coeff_part)? };
    let exponent = match q_part {
        None => BigRational::zero(),
        Some("") => BigRational::one(),
        Some(rest) => {
            let rest = rest.strip_prefix('^')?.trim();
            let rest = rest.strip_prefix('{').and_then(|r| r.strip_suffix('}')).unwrap_or(rest);
            parse_rational(rest)?
        }
    };
    Some(Term { coeff, exponent })
}

impl FromStr for NovikovScalar {
    type Err = NovikovError;

    /// Parses the textual form `c1*q^{m1} + c2*q^{m2} + ...`. Coefficients are
    /// rationals (`3/2`) or Gaussian rationals (`(1-2i)`); `q` alone means `q^{1}`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| NovikovError::Parse { input: s.to_string(), reason: reason.to_string() };
        if s.trim() == "0" {
            return Ok(Self::zero());
        }
        let pieces = split_top_level_terms(s);
        if pieces.is_empty() {
            return Err(err("empty input"));
        }
        let mut terms = Vec::with_capacity(pieces.len());
        for (neg, piece) in pieces {
            let mut t = parse_term(&piece).ok_or_else(|| err(&format!("bad term {piece:?}")))?;
            if neg {
                t.coeff = -t.coeff;
            }
            terms.push(t);
        }
        Ok(Self::from_terms(terms))
    }
}

impl Serialize for NovikovScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for NovikovScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(deserializer)?;
        match &v {
            serde_json::Value::String(s) => s.parse().map_err(serde::de::Error::custom),
            serde_json::Value::Number(n) => n
                .as_i64()
                .map(NovikovScalar::from_integer)
                .ok_or_else(|| serde::de::Error::custom("non-integer numeric coefficient")),
            serde_json::Value::Array(_) => {
                NovikovScalar::from_term_list(&v).ok_or_else(|| serde::de::Error::custom("bad term list"))
            }
            _ => Err(serde::de::Error::custom("expected Novikov text form or term list")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> NovikovScalar {
        s.parse().unwrap()
    }

    #[test]
    fn ring_identities() {
        assert_eq!(&n("1 + q") * &n("1 - q"), n("1 - q^{2}"));
        assert_eq!(&n("2*q^{1/2}") + &n("3*q^{1/2}"), n("5*q^{1/2}"));
        assert_eq!(&n("q^{1/3}") * &n("q^{2/3}"), n("q"));
    }

    #[test]
    fn inversion() {
        let inv = n("1 - q").invert_to_order(&ratio(3, 1)).unwrap();
        assert_eq!(inv, n("1 + q + q^{2}"));
        let inv = n("2*q").invert_to_order(&ratio(5, 1)).unwrap();
        assert_eq!(inv, n("1/2*q^{-1}"));
        assert_eq!(NovikovScalar::zero().invert_to_order(&ratio(1, 1)), Err(NovikovError::ZeroDivisor));
    }

    #[test]
    fn inversion_with_fractional_exponents() {
        let a = n("3 + q^{1/2} - 2*q^{3/2}");
        let order = ratio(4, 1);
        let b = a.invert_to_order(&order).unwrap();
        let residual = &(&a * &b) - &NovikovScalar::one();
        assert!(residual.terms().iter().all(|t| t.exponent >= order));
    }

    #[test]
    fn valuations() {
        assert_eq!(n("2*q^{1/2} + q").valuation(), Some(ratio(1, 2)));
        assert_eq!(NovikovScalar::zero().valuation(), None);
        assert_eq!(NovikovScalar::one().valuation(), Some(ratio(0, 1)));
    }

    #[test]
    fn text_round_trip() {
        for s in ["0", "1", "-2*q^{1}", "(1-2i)*q^{3/2}", "1/2 + (0+1i)*q^{-1}", "-1*q^{1/2} + 2*q^{1}"] {
            let v = n(s);
            assert_eq!(n(&v.to_string()), v, "{s}");
        }
        assert_eq!(n("q"), NovikovScalar::q_pow(ratio(1, 1)));
        assert_eq!(n("1 - 2q^2"), n("1 + -2*q^{2}"));
        assert_eq!(n("-i"), NovikovScalar::constant(-GaussianRational::i()));
    }

    #[test]
    fn json_forms() {
        let v = n("2 + (1+1i)*q^{1/2}");
        let text = serde_json::to_string(&v).unwrap();
        assert_eq!(serde_json::from_str::<NovikovScalar>(&text).unwrap(), v);
        let list = v.to_term_list();
        assert_eq!(serde_json::from_value::<NovikovScalar>(list).unwrap(), v);
    }

    #[test]
    fn specialization() {
        assert_eq!(n("2 + 3*q^{1/2} - q").specialize_q_to_one(), GaussianRational::from_integer(4));
    }
}
