//! The triangle map on `Δ = {1 >= x >= y > 0}` and triangle-sequence extraction.
//!
//! `Δ` splits into sectors `Δ_k = {1 - x - k·y >= 0 > 1 - x - (k+1)·y}` and on
//! `Δ_k` the map is `T(x, y) = (y/x, (1 - x - k·y)/x)`. The digit stream
//! `a_1, a_2, …` records the sector of each iterate. Digits are indexed from 1.
//! An orbit that lands on `y = 0` terminates.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::construct;
use crate::error::{Error, Result};
use crate::real::{parse_rational, rational_string, Dyadic, Interval, Rounding, Scalar};

/// The digits `(a_1, a_2, …)` of a triangle sequence.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DigitSequence {
    #[serde(with = "digits_as_strings")]
    digits: Vec<BigUint>,
    terminated: bool,
}

impl DigitSequence {
    pub fn new(digits: Vec<BigUint>, terminated: bool) -> Self {
        DigitSequence { digits, terminated }
    }

    /// An unterminated prefix from small digits.
    pub fn from_u64s(digits: &[u64]) -> Self {
        DigitSequence::new(digits.iter().map(|&d| BigUint::from(d)).collect(), false)
    }

    pub fn digits(&self) -> &[BigUint] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// `true` when the orbit reached `y = 0` after the last digit.
    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    pub fn push(&mut self, d: BigUint) {
        self.digits.push(d);
    }

    pub fn prefix(&self, n: usize) -> DigitSequence {
        let n = n.min(self.len());
        DigitSequence::new(self.digits[..n].to_vec(), self.terminated && n == self.len())
    }

    /// `self` followed by `more`; termination follows `more`.
    pub fn extended(&self, more: &DigitSequence) -> DigitSequence {
        let mut digits = self.digits.clone();
        digits.extend(more.digits.iter().cloned());
        DigitSequence::new(digits, more.terminated || (more.is_empty() && self.terminated))
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.digits.iter().map(|d| d.to_string()).collect()
    }

    /// JSON array of decimal strings.
    pub fn to_json_array(&self) -> String {
        serde_json::to_string(&self.to_strings()).expect("strings serialize")
    }

    /// Parses `"0,1,2"` (a terminating sequence is written with a trailing `,$`).
    pub fn parse_list(text: &str) -> Result<Self> {
        let mut terminated = false;
        let mut digits = Vec::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "$" {
                terminated = true;
                continue;
            }
            digits.push(
                part.parse::<BigUint>()
                    .map_err(|_| Error::InvalidInput(format!("bad digit {part:?}")))?,
            );
        }
        Ok(DigitSequence::new(digits, terminated))
    }
}

impl fmt::Display for DigitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, d) in self.digits.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{d}")?;
        }
        if self.terminated {
            write!(f, "; terminated")?;
        }
        write!(f, ")")
    }
}

pub(crate) mod digits_as_strings {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|d| d.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

/// A point `(α, β)`.
#[derive(Clone, Debug, PartialEq)]
pub enum PairRepr {
    /// Exact rationals.
    Rational { alpha: BigRational, beta: BigRational },
    /// Interval enclosures, with the precision they are carried at.
    Real {
        alpha: Interval,
        beta: Interval,
        bits: u32,
    },
    /// The point whose triangle sequence starts with `digits`, known through
    /// the nested triangle at `depth`.
    DigitDefined {
        digits: Arc<DigitSequence>,
        depth: usize,
        bits: u32,
    },
}

impl PairRepr {
    pub fn rational(alpha: BigRational, beta: BigRational) -> Self {
        PairRepr::Rational { alpha, beta }
    }

    pub fn from_ratios(a: (i64, i64), b: (i64, i64)) -> Self {
        PairRepr::rational(
            BigRational::new(a.0.into(), a.1.into()),
            BigRational::new(b.0.into(), b.1.into()),
        )
    }

    pub fn real(alpha: Interval, beta: Interval) -> Self {
        let bits = alpha.prec().max(beta.prec());
        PairRepr::Real {
            alpha: alpha.with_prec(bits),
            beta: beta.with_prec(bits),
            bits,
        }
    }

    /// Decimal inputs known to `±2^-input_bits`, carried at `bits` of working precision.
    pub fn from_decimals(alpha: &str, beta: &str, input_bits: u32, bits: u32) -> Result<Self> {
        let parse = |t: &str| {
            parse_rational(t).ok_or_else(|| Error::InvalidInput(format!("bad decimal {t:?}")))
        };
        let eps = Dyadic::new(BigInt::one(), -(input_bits as i64));
        let a = Interval::from_rational(&parse(alpha)?, bits).inflate(&eps);
        let b = Interval::from_rational(&parse(beta)?, bits).inflate(&eps);
        Ok(PairRepr::real(a, b))
    }

    pub fn digit_defined(digits: DigitSequence, depth: usize, bits: u32) -> Self {
        let depth = depth.min(digits.len());
        PairRepr::DigitDefined {
            digits: Arc::new(digits),
            depth,
            bits,
        }
    }

    /// `(q, q²)` with `q³ + q - 1 = 0`, the fixed point of `T` on `Δ_0`,
    /// enclosed to `bits` bits.
    pub fn cubic_fixed_point(bits: u32) -> Self {
        let (lo, hi) = cubic_root_bracket(bits + 8);
        let q = Interval::new(lo, hi, bits + 8);
        let q2 = q.sqr();
        PairRepr::real(q.with_prec(bits), q2.with_prec(bits))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, PairRepr::Rational { .. })
    }

    /// Working precision of an inexact pair.
    pub fn bits(&self) -> Option<u32> {
        match self {
            PairRepr::Rational { .. } => None,
            PairRepr::Real { bits, .. } | PairRepr::DigitDefined { bits, .. } => Some(*bits),
        }
    }

    /// The coordinates: exact for rational pairs; for digit-defined pairs the
    /// bounding box of the nested triangle.
    pub fn coords(&self) -> Result<(Scalar, Scalar)> {
        match self {
            PairRepr::Rational { alpha, beta } => {
                Ok((Scalar::Exact(alpha.clone()), Scalar::Exact(beta.clone())))
            }
            PairRepr::Real { alpha, beta, .. } => {
                Ok((Scalar::Approx(alpha.clone()), Scalar::Approx(beta.clone())))
            }
            PairRepr::DigitDefined {
                digits,
                depth,
                bits,
            } => {
                if *depth == 0 {
                    let full = |lo: i64, hi: i64| {
                        Scalar::Approx(Interval::new(Dyadic::from_int(lo), Dyadic::from_int(hi), *bits))
                    };
                    return Ok((full(0, 1), full(0, 1)));
                }
                let enc = construct::pair_from_digits(&digits.prefix(*depth))?;
                let hull = |f: &dyn Fn(&crate::linalg::RationalPoint2) -> BigRational| {
                    let vals: Vec<Interval> = enc
                        .vertices
                        .iter()
                        .map(|p| Interval::from_rational(&f(p), *bits))
                        .collect();
                    Scalar::Approx(vals[1..].iter().fold(vals[0].clone(), |a, b| a.hull(b)))
                };
                Ok((hull(&|p| p.u.clone()), hull(&|p| p.v.clone())))
            }
        }
    }

    /// Fails with `OutOfDomain` only when the pair is certainly outside the
    /// closed triangle `1 >= α >= β >= 0`.
    pub fn check_domain(&self) -> Result<()> {
        if let PairRepr::DigitDefined { .. } = self {
            return Ok(());
        }
        let (a, b) = self.coords()?;
        let one = Scalar::one();
        let outside = |x: &Scalar, y: &Scalar| x.cmp_certain(y) == Some(Ordering::Less);
        if outside(&one, &a) || outside(&a, &b) || outside(&b, &Scalar::zero()) {
            return Err(Error::OutOfDomain);
        }
        Ok(())
    }
}

impl fmt::Display for PairRepr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairRepr::Rational { alpha, beta } => {
                write!(f, "{},{}", rational_string(alpha), rational_string(beta))
            }
            PairRepr::Real { alpha, beta, .. } => write!(f, "{alpha},{beta}"),
            PairRepr::DigitDefined { digits, depth, .. } => {
                write!(f, "digits{} at depth {depth}", digits)
            }
        }
    }
}

fn cubic_root_bracket(bits: u32) -> (Dyadic, Dyadic) {
    // q^3 + q - 1 is increasing; q lies in [1/2, 1].
    let f = |x: &Dyadic| x.mul(x).mul(x).add(x).sub(&Dyadic::one());
    let mut lo = Dyadic::new(BigInt::one(), -1);
    let mut hi = Dyadic::one();
    while hi.sub(&lo).magnitude() > -(bits as i64) {
        let mid = Dyadic::midpoint(&lo, &hi);
        if f(&mid).is_negative() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    debug_assert!(f(&lo).is_negative() && f(&hi).is_positive());
    (lo.round(bits, Rounding::Down), hi.round(bits, Rounding::Up))
}

/// Sector index and image under one application of `T`, on raw coordinates.
fn step(alpha: &Scalar, beta: &Scalar, done: usize, so_far: &[BigUint]) -> Result<(BigUint, Scalar, Scalar)> {
    let exhausted = || Error::PrecisionExhausted {
        certified: done,
        digits: so_far.iter().map(|d| d.to_string()).collect(),
    };
    match beta.sign() {
        Some(Ordering::Equal) => return Err(Error::Terminated { step: done }),
        Some(Ordering::Less) => return Err(Error::OutOfDomain),
        Some(Ordering::Greater) => {}
        None => return Err(exhausted()),
    }
    let t = Scalar::one().sub(alpha).div(beta).ok_or_else(exhausted)?;
    let k = t.floor().ok_or_else(exhausted)?;
    let k = k.to_biguint().ok_or(Error::OutOfDomain)?;
    let kk = BigInt::from(k.clone());
    if alpha.sign() != Some(Ordering::Greater) {
        return Err(exhausted());
    }
    let next_alpha = beta.div(alpha).ok_or_else(exhausted)?;
    let rest = Scalar::one().sub(alpha).sub(&beta.mul_int(&kk));
    let next_beta = rest.div(alpha).ok_or_else(exhausted)?;
    Ok((k, next_alpha, next_beta))
}

fn rebuild(like: &PairRepr, alpha: Scalar, beta: Scalar) -> PairRepr {
    match (alpha, beta) {
        (Scalar::Exact(a), Scalar::Exact(b)) => PairRepr::Rational { alpha: a, beta: b },
        (a, b) => {
            let bits = like.bits().unwrap_or(64);
            PairRepr::real(a.to_interval(bits), b.to_interval(bits))
        }
    }
}

/// The `k` with `1 - α - kβ >= 0 > 1 - α - (k+1)β`.
pub fn sector_index(pair: &PairRepr) -> Result<BigUint> {
    if let PairRepr::DigitDefined { digits, depth, .. } = pair {
        return match digits.digits().first() {
            Some(d) if *depth > 0 => Ok(d.clone()),
            None if digits.is_terminated() => Err(Error::Terminated { step: 0 }),
            _ => Err(Error::PrecisionExhausted {
                certified: 0,
                digits: vec![],
            }),
        };
    }
    pair.check_domain()?;
    let (a, b) = pair.coords()?;
    step(&a, &b, 0, &[]).map(|(k, _, _)| k)
}

/// `T(α, β) = (β/α, (1 - α - kβ)/α)`.
pub fn apply_t(pair: &PairRepr) -> Result<PairRepr> {
    if let PairRepr::DigitDefined { digits, depth, bits } = pair {
        sector_index(pair)?;
        let tail = DigitSequence::new(digits.digits()[1..].to_vec(), digits.is_terminated());
        return Ok(PairRepr::digit_defined(tail, depth - 1, *bits));
    }
    pair.check_domain()?;
    let (a, b) = pair.coords()?;
    let (_, na, nb) = step(&a, &b, 0, &[])?;
    Ok(rebuild(pair, na, nb))
}

/// The first `n` digits, or fewer if the orbit terminates first.
pub fn triangle_sequence(pair: &PairRepr, n: usize) -> Result<DigitSequence> {
    if let PairRepr::DigitDefined { digits, depth, .. } = pair {
        if n <= *depth || (digits.is_terminated() && *depth == digits.len()) {
            return Ok(digits.prefix(n.min(*depth)));
        }
        return Err(Error::PrecisionExhausted {
            certified: *depth,
            digits: digits.prefix(*depth).to_strings(),
        });
    }
    pair.check_domain()?;
    let (mut a, mut b) = pair.coords()?;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        match step(&a, &b, i, &out) {
            Ok((k, na, nb)) => {
                out.push(k);
                a = na;
                b = nb;
            }
            Err(Error::Terminated { .. }) => return Ok(DigitSequence::new(out, true)),
            Err(e) => return Err(e),
        }
    }
    // A rational orbit may land on y = 0 exactly at the last step.
    let terminated = b.is_exact() && b.is_zero();
    Ok(DigitSequence::new(out, terminated))
}

/// `[pair, T(pair), …, T^n(pair)]`, stopping at the first point with `β = 0`.
pub fn orbit(pair: &PairRepr, n: usize) -> Result<Vec<PairRepr>> {
    pair.check_domain()?;
    let mut out = vec![pair.clone()];
    for _ in 0..n {
        let last = out.last().unwrap();
        match apply_t(last) {
            Ok(next) => out.push(next),
            Err(Error::Terminated { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Small helper for tests and reports: the first digit as `u64` if it fits.
pub fn digit_u64(d: &BigUint) -> Option<u64> {
    d.to_u64()
}

/// `true` if the rational point lies strictly inside `Δ` (away from all edges).
pub fn strictly_inside(alpha: &BigRational, beta: &BigRational) -> bool {
    beta.is_positive() && beta < alpha && alpha < &BigRational::one() && !alpha.is_zero()
}
