//! Dual-mode real numbers.
//!
//! A [`Scalar`] is either an exact rational (arbitrary precision, always in
//! lowest terms with a positive denominator) or an `f64`. Arithmetic between
//! two exact values stays exact; any operation touching a float yields a
//! float.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(BigRational),
    Float(f64),
}

/// Which arithmetic a computation runs in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::Exact(BigRational::one())
    }

    pub fn int(v: i64) -> Self {
        Scalar::Exact(BigRational::from_integer(BigInt::from(v)))
    }

    /// `num/den` as an exact rational. Panics if `den == 0`.
    pub fn ratio(num: i64, den: i64) -> Self {
        Scalar::Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Self {
        Scalar::Exact(BigRational::new(num, den))
    }

    pub fn float(v: f64) -> Self {
        Scalar::Float(v)
    }

    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Float(_) => Mode::Float,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => rational_to_f64(r),
            Scalar::Float(v) => *v,
        }
    }

    /// Same value, forced into float mode.
    pub fn to_float(&self) -> Scalar {
        Scalar::Float(self.to_f64())
    }

    /// Convert into the requested mode (exact only from exact).
    pub fn in_mode(&self, mode: Mode) -> Scalar {
        match mode {
            Mode::Exact => self.clone(),
            Mode::Float => self.to_float(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(v) => *v == 0.0,
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Float(v) => Scalar::Float(v.abs()),
        }
    }

    pub fn signum(&self) -> i32 {
        match self {
            Scalar::Exact(r) if r.is_positive() => 1,
            Scalar::Exact(r) if r.is_negative() => -1,
            Scalar::Exact(_) => 0,
            Scalar::Float(v) if *v > 0.0 => 1,
            Scalar::Float(v) if *v < 0.0 => -1,
            Scalar::Float(_) => 0,
        }
    }

    /// Integer power; exact values stay exact. Negative powers of zero panic.
    pub fn powi(&self, exp: i32) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(num::pow::Pow::pow(r, exp)),
            Scalar::Float(v) => Scalar::Float(v.powi(exp)),
        }
    }

    /// Real power `self^exp` for `self > 0`. Exact when both are exact and
    /// `exp` is an integer; otherwise evaluated in floating point.
    pub fn powf(&self, exp: &Scalar) -> Scalar {
        if let (Scalar::Exact(_), Scalar::Exact(e)) = (self, exp) {
            if e.is_integer() {
                if let Some(k) = e.to_integer().to_i32() {
                    return self.powi(k);
                }
            }
        }
        Scalar::Float(self.to_f64().powf(exp.to_f64()))
    }

    pub fn ln(&self) -> f64 {
        match self {
            // ln of huge/tiny rationals without overflowing the f64 conversion
            Scalar::Exact(r) => ln_big(r.numer()) - ln_big(r.denom()),
            Scalar::Float(v) => v.ln(),
        }
    }

    pub fn max(self, other: Scalar) -> Scalar {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Parse a decimal (`0.51`, `-3`, `1e-3`) or a rational (`7/9`) string.
    /// Both forms are parsed exactly.
    pub fn parse(s: &str) -> Result<Scalar> {
        let t = s.trim();
        let bad = || Error::ScalarParse(s.to_string());
        if t.is_empty() {
            return Err(bad());
        }
        if let Some((n, d)) = t.split_once('/') {
            let n = parse_decimal(n.trim()).ok_or_else(bad)?;
            let d = parse_decimal(d.trim()).ok_or_else(bad)?;
            if d.is_zero() {
                return Err(bad());
            }
            return Ok(Scalar::Exact(n / d));
        }
        parse_decimal(t).map(Scalar::Exact).ok_or_else(bad)
    }

    /// `p/q` in exact mode (always with the denominator), shortest
    /// round-trip decimal in float mode.
    pub fn render(&self) -> String {
        self.to_string()
    }

    /// Decimal rendering with a fixed number of fractional digits.
    pub fn decimal(&self, digits: usize) -> String {
        format!("{:.*}", digits, self.to_f64())
    }
}

fn ln_big(v: &BigInt) -> f64 {
    let bits = v.bits();
    if bits < 1000 {
        return v.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top: BigInt = v >> shift;
    top.to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
}

fn rational_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && n.abs() < 9.0e15 && d < 9.0e15 {
            return n / d;
        }
    }
    // Scale both parts down to 64 significant bits before dividing.
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let ns = (nb - 64).max(0) as u64;
    let ds = (db - 64).max(0) as u64;
    let n = (r.numer() >> ns).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> ds).to_f64().unwrap_or(1.0);
    let e = ns as i64 - ds as i64;
    (n / d) * 2f64.powi(e.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
}

fn parse_decimal(t: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut n: BigInt = all.parse().ok()?;
    if neg {
        n = -n;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    Some(BigRational::from_integer(n) * num::pow::Pow::pow(&ten, scale))
}

impl FromStr for Scalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scalar::parse(s)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Scalar::Float(v) => write!(f, "{v:?}"),
        }
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::int(v)
    }
}

impl From<BigRational> for Scalar {
    fn from(v: BigRational) -> Self {
        Scalar::Exact(v)
    }
}

/// Serialized as its rendered string so exact values survive JSON.
impl serde::Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.render())
    }
}

impl<'de> serde::Deserialize<'de> for Scalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Scalar::parse(&text).map_err(serde::de::Error::custom)
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => self.to_f64() == other.to_f64(),
        }
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Some(a.cmp(b)),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl<'a> $trait<&'a Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a $op b),
                    _ => Scalar::Float(self.to_f64() $op rhs.to_f64()),
                }
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a $op b),
                    (a, b) => Scalar::Float(a.to_f64() $op b.to_f64()),
                }
            }
        }
        impl<'a> $trait<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl<'a> $trait<Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Float(v) => Scalar::Float(-v),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -(self.clone())
    }
}

/// Running sum that is exact for rationals and Neumaier-compensated for
/// floats. Once a float term arrives the sum switches to float.
#[derive(Clone, Debug)]
pub struct Accumulator {
    exact: BigRational,
    float: Option<(f64, f64)>,
}

impl Default for Accumulator {
    fn default() -> Self {
        Accumulator { exact: BigRational::zero(), float: None }
    }
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, v: &Scalar) {
        match (v, &mut self.float) {
            (Scalar::Exact(r), None) => self.exact += r,
            (v, state) => {
                let (sum, comp) = state.get_or_insert_with(|| (rational_to_f64(&self.exact), 0.0));
                let x = v.to_f64();
                let t = *sum + x;
                if sum.abs() >= x.abs() {
                    *comp += (*sum - t) + x;
                } else {
                    *comp += (x - t) + *sum;
                }
                *sum = t;
            }
        }
    }

    pub fn total(&self) -> Scalar {
        match self.float {
            None => Scalar::Exact(self.exact.clone()),
            Some((s, c)) => Scalar::Float(s + c),
        }
    }
}

impl Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        let mut acc = Accumulator::new();
        for v in iter {
            acc.push(&v);
        }
        acc.total()
    }
}

impl<'a> Sum<&'a Scalar> for Scalar {
    fn sum<I: Iterator<Item = &'a Scalar>>(iter: I) -> Scalar {
        let mut acc = Accumulator::new();
        for v in iter {
            acc.push(v);
        }
        acc.total()
    }
}
