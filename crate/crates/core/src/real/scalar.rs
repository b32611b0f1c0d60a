use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::interval::{rational_as_u32, Interval};

/// A real value that is either known exactly (rational) or enclosed by an interval.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(BigRational),
    Approx(Interval),
}

impl Scalar {
    pub fn from_int<T: Into<BigInt>>(v: T) -> Self {
        Scalar::Exact(BigRational::from_integer(v.into()))
    }

    pub fn zero() -> Self {
        Scalar::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::Exact(BigRational::one())
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Approx(_) => None,
        }
    }

    pub fn as_interval(&self) -> Option<&Interval> {
        match self {
            Scalar::Approx(i) => Some(i),
            Scalar::Exact(_) => None,
        }
    }

    /// Working precision, or `None` for exact values.
    pub fn prec(&self) -> Option<u32> {
        self.as_interval().map(Interval::prec)
    }

    pub fn to_interval(&self, prec: u32) -> Interval {
        match self {
            Scalar::Exact(r) => Interval::from_rational(r, prec),
            Scalar::Approx(i) => i.clone(),
        }
    }

    fn lift(a: &Scalar, b: &Scalar) -> (Interval, Interval) {
        let p = a.prec().into_iter().chain(b.prec()).max().unwrap_or(64);
        (a.to_interval(p), b.to_interval(p))
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a + b),
            _ => {
                let (a, b) = Self::lift(self, other);
                Scalar::Approx(a.add(&b))
            }
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a - b),
            _ => {
                let (a, b) = Self::lift(self, other);
                Scalar::Approx(a.sub(&b))
            }
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a * b),
            _ => {
                let (a, b) = Self::lift(self, other);
                Scalar::Approx(a.mul(&b))
            }
        }
    }

    pub fn mul_int(&self, k: &BigInt) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(a * BigRational::from_integer(k.clone())),
            Scalar::Approx(i) => Scalar::Approx(i.mul_int(k)),
        }
    }

    /// `None` when the divisor is (or may be) zero.
    pub fn div(&self, other: &Scalar) -> Option<Scalar> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                if b.is_zero() {
                    None
                } else {
                    Some(Scalar::Exact(a / b))
                }
            }
            _ => {
                let (a, b) = Self::lift(self, other);
                a.div(&b).map(Scalar::Approx)
            }
        }
    }

    pub fn recip(&self) -> Option<Scalar> {
        Scalar::one().div(self)
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(-a),
            Scalar::Approx(i) => Scalar::Approx(i.neg()),
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(a.abs()),
            Scalar::Approx(i) => Scalar::Approx(i.abs()),
        }
    }

    /// Certified sign, `None` if undecidable at the working precision.
    pub fn sign(&self) -> Option<Ordering> {
        match self {
            Scalar::Exact(a) => Some(a.cmp(&BigRational::zero())),
            Scalar::Approx(i) => i.sign(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign() == Some(Ordering::Equal)
    }

    /// `true` unless zero is excluded with certainty.
    pub fn may_be_zero(&self) -> bool {
        match self {
            Scalar::Exact(a) => a.is_zero(),
            Scalar::Approx(i) => i.contains_zero(),
        }
    }

    pub fn cmp_certain(&self, other: &Scalar) -> Option<Ordering> {
        self.sub(other).sign()
    }

    pub fn floor(&self) -> Option<BigInt> {
        match self {
            Scalar::Exact(a) => Some(a.floor().to_integer()),
            Scalar::Approx(i) => i.floor_certain(),
        }
    }

    pub fn powi(&self, n: u32) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(num_traits::pow(a.clone(), n as usize)),
            Scalar::Approx(i) => Scalar::Approx(i.powi(n)),
        }
    }

    /// `self^e`. Integer exponents stay exact; otherwise the base must be
    /// certainly positive and the result is an enclosure at `prec` bits.
    pub fn pow(&self, e: &Exponent, prec: u32) -> Option<Scalar> {
        if let Some(n) = e.as_u32() {
            return Some(self.powi(n));
        }
        let base = self.to_interval(self.prec().unwrap_or(prec));
        base.pow(&e.to_interval(base.prec())).map(Scalar::Approx)
    }

    pub fn ln(&self, prec: u32) -> Option<Interval> {
        self.to_interval(self.prec().unwrap_or(prec)).ln()
    }

    pub fn to_decimal_string(&self) -> String {
        match self {
            Scalar::Exact(a) => rational_string(a),
            Scalar::Approx(i) => i.to_decimal_string(),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar::Exact(r)
    }
}

impl From<Interval> for Scalar {
    fn from(i: Interval) -> Self {
        Scalar::Approx(i)
    }
}

/// `p/q`, or just `p` for integers.
pub fn rational_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `"p/q"`, an integer, or a finite decimal such as `"-2.75"` exactly.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{}{}", int_part, frac_part);
    let numer: BigInt = digits.parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
    let r = BigRational::new(numer, denom);
    Some(if neg { -r } else { r })
}

/// A real exponent (`s`, `k`, `d`) held as an exact rational.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Exponent(BigRational);

impl Exponent {
    pub fn new(r: BigRational) -> Self {
        Exponent(r)
    }

    pub fn from_int(n: i64) -> Self {
        Exponent(BigRational::from_integer(n.into()))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn as_u32(&self) -> Option<u32> {
        rational_as_u32(&self.0)
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn to_interval(&self, prec: u32) -> Interval {
        Interval::from_rational(&self.0, prec)
    }

    pub fn to_scalar(&self) -> Scalar {
        Scalar::Exact(self.0.clone())
    }
}

impl FromStr for Exponent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_rational(s)
            .map(Exponent)
            .ok_or_else(|| format!("not a number: {s:?}"))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = &self.0;
        if r.is_integer() {
            return write!(f, "{}", r.numer());
        }
        // Finite decimal when the denominator is 2^a 5^b.
        let mut d = r.denom().clone();
        let two = BigInt::from(2);
        let five = BigInt::from(5);
        let (mut a, mut b) = (0usize, 0usize);
        while (&d % &two).is_zero() {
            d /= &two;
            a += 1;
        }
        while (&d % &five).is_zero() {
            d /= &five;
            b += 1;
        }
        if d.is_one() {
            let places = a.max(b);
            let scaled = r * BigRational::from_integer(num_traits::pow(BigInt::from(10), places));
            let n = scaled.to_integer();
            let neg = n.is_negative();
            let digits = format!("{:0>width$}", n.abs().to_string(), width = places + 1);
            let (i, frac) = digits.split_at(digits.len() - places);
            return write!(f, "{}{}.{}", if neg { "-" } else { "" }, i, frac);
        }
        f.write_str(&rational_string(r))
    }
}
