//! Arithmetic modes.
//!
//! Every computation runs in exactly one mode, selected by the scalar type it
//! is instantiated with: [`BigRational`] for exact arithmetic, `f64` for
//! ordinary floats, and [`Quad`] (128-bit significand) for rechecking
//! floating-point results. Generic code is written against [`Scalar`], so
//! mixing modes inside one computation does not type-check.

use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign as FloatSign};
use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Relative tolerance for float-mode weight normalization, 2^-40.
pub const WEIGHT_SUM_TOLERANCE: f64 = 9.094947017729282e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Float => f.write_str("float"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(Error::InvalidConfig(format!("unknown mode `{other}`"))),
        }
    }
}

/// Significand width used for float-mode runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FloatWidth {
    /// `f64`, 53 bits.
    Double,
    /// [`Quad`], 128 bits.
    Quad,
}

impl FloatWidth {
    /// 53 selects `f64`; 54 through 128 select [`Quad`].
    pub fn from_bits(bits: u32) -> Result<Self> {
        match bits {
            53 => Ok(FloatWidth::Double),
            54..=128 => Ok(FloatWidth::Quad),
            other => Err(Error::InvalidConfig(format!("unsupported precision {other}; expected 53..=128"))),
        }
    }

    pub fn bits(self) -> u32 {
        match self {
            FloatWidth::Double => 53,
            FloatWidth::Quad => QUAD_BITS as u32,
        }
    }
}

/// A real number in a fixed arithmetic mode.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const MODE: Mode;
    /// Significand bits, `None` in exact mode.
    const PRECISION: Option<u32>;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &BigRational) -> Self;
    /// Nearest value to `v`; exact in exact mode, since every finite `f64`
    /// is a dyadic rational.
    fn from_f64(v: f64) -> Self;
    fn is_zero(&self) -> bool;
    /// `self^e` for `self >= 0`. Exact mode fails with [`Error::Inexact`]
    /// when the result is irrational.
    fn powf(&self, e: &BigRational) -> Result<Self>;
    fn to_f64(&self) -> f64;
    /// String form used in JSON: `p/q` in exact mode, shortest round-trip
    /// decimal otherwise.
    fn to_literal(&self) -> String;

    fn from_i64(v: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(v)))
    }

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn powi(&self, k: u32) -> Self {
        let mut result = Self::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result * base.clone();
            }
            k >>= 1;
            if k > 0 {
                base = base.clone() * base;
            }
        }
        result
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn is_exact() -> bool {
        Self::MODE == Mode::Exact
    }
}

/// `a == b` exactly in exact mode, within `rel` relative error otherwise.
pub fn nearly_equal<T: Scalar>(a: &T, b: &T, rel: f64) -> bool {
    if T::is_exact() {
        return a == b;
    }
    let diff = (a.clone() - b.clone()).abs().to_f64();
    let scale = a.abs().to_f64().max(b.abs().to_f64()).max(f64::MIN_POSITIVE);
    diff <= rel * scale || diff == 0.0
}

/// Sum of a sequence of scalars.
pub fn sum<T: Scalar, I: IntoIterator<Item = T>>(iter: I) -> T {
    iter.into_iter().fold(T::zero(), |acc, x| acc + x)
}

impl Scalar for BigRational {
    const MODE: Mode = Mode::Exact;
    const PRECISION: Option<u32> = None;

    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).unwrap_or_else(Zero::zero)
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn powf(&self, e: &BigRational) -> Result<Self> {
        if self.is_negative() {
            return Err(Error::Domain(format!("power of negative base {self}")));
        }
        if Zero::is_zero(self) {
            return if e.is_positive() {
                Ok(Zero::zero())
            } else {
                Err(Error::Domain("non-positive power of zero".into()))
            };
        }
        let base = if e.is_negative() { self.recip() } else { self.clone() };
        let numer = e
            .numer()
            .abs()
            .to_u32()
            .ok_or_else(|| Error::Domain(format!("exponent {e} too large")))?;
        let denom = e
            .denom()
            .to_u32()
            .ok_or_else(|| Error::Domain(format!("exponent {e} too large")))?;
        let powered = num_traits::pow(base, numer as usize);
        if denom == 1 {
            return Ok(powered);
        }
        let root_n = exact_root(powered.numer(), denom);
        let root_d = exact_root(powered.denom(), denom);
        match (root_n, root_d) {
            (Some(n), Some(d)) => Ok(BigRational::new(n, d)),
            _ => Err(Error::Inexact(format!("{powered}^(1/{denom}) is irrational"))),
        }
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_literal(&self) -> String {
        format_rational(self)
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }
}

fn exact_root(v: &BigInt, k: u32) -> Option<BigInt> {
    let r = v.nth_root(k);
    if num_traits::pow(r.clone(), k as usize) == *v {
        Some(r)
    } else {
        None
    }
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float;
    const PRECISION: Option<u32> = Some(53);

    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn from_f64(v: f64) -> Self {
        v
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn powf(&self, e: &BigRational) -> Result<Self> {
        if *self < 0.0 {
            return Err(Error::Domain(format!("power of negative base {self}")));
        }
        if e.is_integer() {
            if let Some(k) = e.to_i32() {
                return Ok(f64::powi(*self, k));
            }
        }
        Ok(f64::powf(*self, Scalar::to_f64(e)))
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_literal(&self) -> String {
        format!("{self}")
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }
}

/// Significand bits carried by [`Quad`]; at least IEEE binary128's 113.
pub const QUAD_BITS: usize = 128;
const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constant cache"));
}

/// Binary floating point with a 128-bit significand.
#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub struct Quad(BigFloat);

impl Quad {
    fn from_bigint(v: &BigInt) -> BigFloat {
        let (sign, digits) = v.to_u64_digits();
        let p = QUAD_BITS.max(64 * (digits.len() + 1));
        let radix = BigFloat::from_f64(18446744073709551616.0, p);
        let mut acc = BigFloat::from_word(0, p);
        for d in digits.iter().rev() {
            acc = acc
                .mul(&radix, p, RoundingMode::None)
                .add(&BigFloat::from_word(*d, p), p, RoundingMode::None);
        }
        if sign == Sign::Minus {
            acc.neg()
        } else {
            acc
        }
    }
}

impl Add for Quad {
    type Output = Quad;
    fn add(self, rhs: Quad) -> Quad {
        Quad(self.0.add(&rhs.0, QUAD_BITS, RM))
    }
}

impl Sub for Quad {
    type Output = Quad;
    fn sub(self, rhs: Quad) -> Quad {
        Quad(self.0.sub(&rhs.0, QUAD_BITS, RM))
    }
}

impl Mul for Quad {
    type Output = Quad;
    fn mul(self, rhs: Quad) -> Quad {
        Quad(self.0.mul(&rhs.0, QUAD_BITS, RM))
    }
}

impl Div for Quad {
    type Output = Quad;
    fn div(self, rhs: Quad) -> Quad {
        Quad(self.0.div(&rhs.0, QUAD_BITS, RM))
    }
}

impl Neg for Quad {
    type Output = Quad;
    fn neg(self) -> Quad {
        Quad(self.0.neg())
    }
}

impl Scalar for Quad {
    const MODE: Mode = Mode::Float;
    const PRECISION: Option<u32> = Some(QUAD_BITS as u32);

    fn zero() -> Self {
        Quad(BigFloat::from_word(0, QUAD_BITS))
    }

    fn one() -> Self {
        Quad(BigFloat::from_word(1, QUAD_BITS))
    }

    fn from_rational(r: &BigRational) -> Self {
        let n = Quad::from_bigint(r.numer());
        let d = Quad::from_bigint(r.denom());
        Quad(n.div(&d, QUAD_BITS, RM))
    }

    fn from_f64(v: f64) -> Self {
        Quad(BigFloat::from_f64(v, QUAD_BITS))
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn powf(&self, e: &BigRational) -> Result<Self> {
        if self.0.is_negative() {
            return Err(Error::Domain("power of negative base".into()));
        }
        if e.is_integer() {
            if let Some(k) = e.to_u32() {
                return Ok(self.powi(k));
            }
        }
        if self.0.is_zero() {
            return Ok(Quad::zero());
        }
        let (Some(a), Some(b)) = (e.numer().to_u32(), e.denom().to_u32()) else {
            return Err(Error::Domain(format!("exponent {e} is too large")));
        };
        Ok(Quad(nth_root(&self.powi(a).0, b)))
    }

    fn to_f64(&self) -> f64 {
        let Some((words, _, sign, exp, _)) = self.0.as_raw_parts() else {
            return f64::NAN;
        };
        let top = match words.last() {
            Some(&w) if w != 0 => w,
            _ => return 0.0,
        };
        // Normalized mantissa: the last word carries the leading bit and the
        // value is 0.m * 2^exp.
        let mut hi = top as f64;
        if words.len() > 1 {
            hi += words[words.len() - 2] as f64 / 18446744073709551616.0;
        }
        let shift = exp as i64 - 64;
        let magnitude = scale_by_pow2(hi, shift);
        match sign {
            FloatSign::Neg => -magnitude,
            FloatSign::Pos => magnitude,
        }
    }

    fn to_literal(&self) -> String {
        CONSTS
            .with(|cc| self.0.format(Radix::Dec, RM, &mut cc.borrow_mut()))
            .unwrap_or_else(|_| format!("{}", self.to_f64()))
    }

    fn abs(&self) -> Self {
        if self.0.is_negative() {
            Quad(self.0.clone().neg())
        } else {
            self.clone()
        }
    }
}

/// `r^{1/b}` for `r > 0` by Newton iteration at twice the working
/// precision. The library `pow` does not terminate when the result is
/// exactly representable, so it is not used.
fn nth_root(r: &BigFloat, b: u32) -> BigFloat {
    if b == 1 || r.is_zero() {
        return r.clone();
    }
    const WIDE: usize = 2 * QUAD_BITS;
    let guess = Quad(r.clone()).to_f64().powf(1.0 / b as f64);
    let mut y = if guess.is_finite() && guess > 0.0 {
        BigFloat::from_f64(guess, WIDE)
    } else {
        BigFloat::from_word(1, WIDE)
    };
    let bf = BigFloat::from_word(b as u64, WIDE);
    let b1 = BigFloat::from_word(b as u64 - 1, WIDE);
    // y <- ((b-1) y + r / y^(b-1)) / b
    for _ in 0..200 {
        let yb1 = Quad(y.clone()).powi_wide(b - 1);
        let next = b1.mul(&y, WIDE, RM).add(&r.div(&yb1, WIDE, RM), WIDE, RM).div(&bf, WIDE, RM);
        let delta = next.sub(&y, WIDE, RM).abs();
        y = next;
        let scale = y.abs().mul(&BigFloat::from_f64(2f64.powi(-(QUAD_BITS as i32 + 16)), WIDE), WIDE, RM);
        if delta.cmp(&scale).is_some_and(|o| o <= 0) {
            break;
        }
    }
    let mut out = y;
    out.set_precision(QUAD_BITS, RM).expect("precision reduction");
    out
}

impl Quad {
    fn powi_wide(&self, k: u32) -> BigFloat {
        let wide = 2 * QUAD_BITS;
        let mut result = BigFloat::from_word(1, wide);
        let mut base = self.0.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base, wide, RM);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base, wide, RM);
            }
        }
        result
    }
}

fn scale_by_pow2(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// Parses `p/q`, an integer, or a decimal literal (optionally with an
/// exponent) into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let bad = || Error::InvalidLiteral(s.to_string());
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if Zero::is_zero(&d) {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32 - 1;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// `n` for integers, `p/q` otherwise.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// An `L^p` exponent, `1 <= p <= ∞`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Exponent {
    Finite(BigRational),
    Infinite,
}

impl Exponent {
    pub fn finite(p: BigRational) -> Result<Self> {
        if p < <BigRational as One>::one() {
            return Err(Error::InvalidExponent(format!("{p} < 1")));
        }
        Ok(Exponent::Finite(p))
    }

    pub fn integer(p: u32) -> Self {
        assert!(p >= 1, "exponent must be at least 1");
        Exponent::Finite(BigRational::from_integer(BigInt::from(p)))
    }

    pub fn one() -> Self {
        Exponent::integer(1)
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "Inf" | "infinity" | "∞" => Ok(Exponent::Infinite),
            t => Exponent::finite(parse_rational(t)?),
        }
    }

    /// `1/p`, zero for `p = ∞`.
    pub fn reciprocal(&self) -> BigRational {
        match self {
            Exponent::Finite(p) => p.recip(),
            Exponent::Infinite => Zero::zero(),
        }
    }

    /// Hölder conjugate `p' = p/(p-1)`.
    pub fn conjugate(&self) -> Exponent {
        match self {
            Exponent::Infinite => Exponent::one(),
            Exponent::Finite(p) if p.is_one() => Exponent::Infinite,
            Exponent::Finite(p) => Exponent::Finite(p.clone() / (p.clone() - <BigRational as One>::one())),
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Exponent::Finite(p) if p.is_one())
    }

    /// True when `L^p` norms are rational on rational data (`p ∈ {1, ∞}`).
    pub fn is_exact(&self) -> bool {
        matches!(self, Exponent::Infinite) || self.is_one()
    }

    /// The integer value of a finite integral exponent.
    pub fn as_integer(&self) -> Option<u32> {
        match self {
            Exponent::Finite(p) if p.is_integer() => p.to_integer().to_u32(),
            _ => None,
        }
    }

    pub fn to_literal(&self) -> String {
        match self {
            Exponent::Finite(p) => format_rational(p),
            Exponent::Infinite => "inf".to_string(),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_literal())
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_literal())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Exponent::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter storing a [`BigRational`] as its literal string.
pub mod rational_literal {
    use super::*;

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for a list of rational literals.
pub mod rational_list {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<BigRational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}
