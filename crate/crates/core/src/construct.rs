//! Pairs with prescribed triangle sequences, and the fast-growing digit
//! sequences used for divergence witnesses.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::convergents::nested_triangle_vectors;
use crate::error::{Error, Result};
use crate::linalg::{hat, projective_triangle_area, IntMat3, IntVec3, RationalPoint2};
use crate::real::{Dyadic, Exponent, Interval, Rounding};
use crate::trimap::{triangle_sequence, DigitSequence, PairRepr};

/// Default cap on the size of a generated digit.
pub const DEFAULT_BIT_BUDGET: u64 = 1 << 20;

/// The nested triangle of all points whose triangle sequence starts with `digits`.
#[derive(Clone, Debug, PartialEq)]
pub struct Enclosure {
    pub digits: DigitSequence,
    pub depth: usize,
    /// Projective vertex vectors, each with a positive first coordinate.
    pub vectors: [IntVec3; 3],
    pub vertices: [RationalPoint2; 3],
    /// Farey sum of the three vertices; strictly interior.
    pub representative: RationalPoint2,
}

impl Enclosure {
    pub fn representative_pair(&self) -> PairRepr {
        PairRepr::rational(self.representative.u.clone(), self.representative.v.clone())
    }

    /// Projective area `det / (x_0 x_1 x_2)` of the vertex vectors.
    pub fn area(&self) -> BigRational {
        let [a, b, c] = &self.vectors;
        projective_triangle_area(&IntMat3::from_columns([a, b, c]))
            .expect("enclosure vertices have positive lead coordinates")
    }

    fn orientation(&self) -> BigInt {
        let [a, b, c] = &self.vectors;
        IntMat3::from_columns([a, b, c]).det()
    }

    /// Barycentric signs of `p` relative to the three edges.
    fn edge_signs(&self, p: &RationalPoint2) -> [BigInt; 3] {
        let h = p.homogeneous();
        let [a, b, c] = &self.vectors;
        let d = |x: &IntVec3, y: &IntVec3, z: &IntVec3| IntMat3::from_columns([x, y, z]).det();
        let o = self.orientation();
        [d(&h, b, c) * &o, d(a, &h, c) * &o, d(a, b, &h) * &o]
    }

    /// `p` lies in the closed triangle.
    pub fn contains(&self, p: &RationalPoint2) -> bool {
        self.edge_signs(p).iter().all(|s| !s.is_negative())
    }

    /// `p` lies in the open triangle.
    pub fn contains_strictly(&self, p: &RationalPoint2) -> bool {
        self.edge_signs(p).iter().all(|s| s.is_positive())
    }

    /// The interior point with positive barycentric weights `w` on the vertex vectors.
    pub fn interior_point(&self, w: [u64; 3]) -> Result<RationalPoint2> {
        if w.contains(&0) {
            return Err(Error::InvalidInput("weights must be positive".into()));
        }
        let [a, b, c] = &self.vectors;
        let v = &(&a.scale(&w[0].into()) + &b.scale(&w[1].into())) + &c.scale(&w[2].into());
        hat(&v)
    }
}

fn degenerate(e: Error) -> Error {
    match e {
        Error::ZeroLeadCoordinate => Error::DegenerateTriangle("vertex with zero lead coordinate".into()),
        other => other,
    }
}

/// Enclosure at the deepest level of `digits`. The representative's own
/// triangle sequence is checked to start with `digits`.
pub fn pair_from_digits(digits: &DigitSequence) -> Result<Enclosure> {
    let vectors = nested_triangle_vectors(digits)?;
    let vertices = [
        hat(&vectors[0]).map_err(degenerate)?,
        hat(&vectors[1]).map_err(degenerate)?,
        hat(&vectors[2]).map_err(degenerate)?,
    ];
    let sum = &(&vectors[0] + &vectors[1]) + &vectors[2];
    let representative = hat(&sum).map_err(degenerate)?;
    let enc = Enclosure {
        digits: DigitSequence::new(digits.digits().to_vec(), false),
        depth: digits.len(),
        vectors,
        vertices,
        representative,
    };
    let seq = triangle_sequence(&enc.representative_pair(), digits.len())?;
    if seq.digits() != digits.digits() {
        return Err(Error::DegenerateTriangle(format!(
            "representative {} has sequence {}, expected prefix {}",
            enc.representative, seq, digits
        )));
    }
    Ok(enc)
}

/// Deepens `enclosure` by `extra` digits.
pub fn refine(enclosure: &Enclosure, extra: &DigitSequence) -> Result<Enclosure> {
    if extra.is_empty() {
        return Ok(enclosure.clone());
    }
    pair_from_digits(&enclosure.digits.extended(extra))
}

/// Growth function presets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthFn {
    /// `f(m) = m`
    Linear,
    /// `f(m) = ln(m + 1)`
    Log,
    /// `f(m) = c`
    Constant(String),
}

impl GrowthFn {
    /// Enclosure of `f(m)`.
    pub fn eval(&self, m: u64, prec: u32) -> Result<Interval> {
        match self {
            GrowthFn::Linear => Ok(Interval::from_int(m, prec)),
            GrowthFn::Log => Ok(Interval::from_int(m + 1, prec)
                .ln()
                .expect("m + 1 is positive")),
            GrowthFn::Constant(c) => {
                let e: Exponent = c.parse().map_err(Error::InvalidInput)?;
                Ok(e.to_interval(prec))
            }
        }
    }

    /// Whether the preset increases to infinity.
    pub fn is_unbounded(&self) -> bool {
        !matches!(self, GrowthFn::Constant(_))
    }
}

impl fmt::Display for GrowthFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrowthFn::Linear => f.write_str("linear"),
            GrowthFn::Log => f.write_str("log"),
            GrowthFn::Constant(c) => write!(f, "constant:{c}"),
        }
    }
}

impl FromStr for GrowthFn {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(GrowthFn::Linear),
            "log" => Ok(GrowthFn::Log),
            _ => match s.strip_prefix("constant:") {
                Some(c) => {
                    let e: Exponent = c.parse().map_err(Error::InvalidInput)?;
                    Ok(GrowthFn::Constant(e.to_string()))
                }
                None => Err(Error::InvalidInput(format!(
                    "unknown growth function {s:?} (linear, log, constant:<c>)"
                ))),
            },
        }
    }
}

/// Parameters for [`theorem1_digits`].
#[derive(Clone, Debug, PartialEq)]
pub struct Theorem1Config {
    pub k: Exponent,
    pub f: GrowthFn,
    /// Number of digits to generate, `a_1` included.
    pub m_max: usize,
    pub a_1: BigUint,
    pub bit_budget: u64,
}

impl Theorem1Config {
    pub fn new(k: Exponent, f: GrowthFn, m_max: usize, a_1: u64) -> Self {
        Theorem1Config {
            k,
            f,
            m_max,
            a_1: a_1.into(),
            bit_budget: DEFAULT_BIT_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.a_1 < BigUint::from(3u32) {
            return Err(Error::InvalidInput(format!("a_1 must be at least 3, got {}", self.a_1)));
        }
        if !self.k.is_positive() {
            return Err(Error::InvalidInput(format!("k must be positive, got {}", self.k)));
        }
        if self.m_max == 0 {
            return Err(Error::InvalidInput("m_max must be at least 1".into()));
        }
        Ok(())
    }
}

/// `N_m = a_1 + … + a_m + m`.
pub fn block_length(digits: &[BigUint]) -> BigUint {
    digits.iter().fold(BigUint::from(digits.len()), |acc, a| acc + a)
}

/// `f(m+1)·N_m^k` for the first `m = digits.len()` digits.
fn growth_exponent(cfg: &Theorem1Config, digits: &[BigUint], prec: u32) -> Result<Interval> {
    let n = Interval::from_int(BigInt::from(block_length(digits)), prec);
    let nk = match cfg.k.as_u32() {
        Some(e) => n.powi(e),
        None => n.pow(&cfg.k.to_interval(prec)).expect("N_m is positive"),
    };
    Ok(cfg.f.eval(digits.len() as u64 + 1, prec)?.mul(&nk))
}

/// Digits `a_1 … a_{m_max}` with `a_{m+1} = floor(e^{f(m+1)·N_m^k}) + 1`.
pub fn theorem1_digits(cfg: &Theorem1Config) -> Result<DigitSequence> {
    let (digits, overflow) = theorem1_digits_partial(cfg)?;
    match overflow {
        Some(e) => Err(e),
        None => Ok(digits),
    }
}

/// Like [`theorem1_digits`], but returns the digits generated before an
/// overflow together with the overflow.
pub fn theorem1_digits_partial(cfg: &Theorem1Config) -> Result<(DigitSequence, Option<Error>)> {
    cfg.validate()?;
    let mut digits = vec![cfg.a_1.clone()];
    let ln2 = Interval::ln2(64);
    while digits.len() < cfg.m_max {
        let rough = growth_exponent(cfg, &digits, 64)?;
        // log2(a) is about y / ln 2.
        let needed = rough.div(&ln2).expect("ln 2 is positive");
        let needed_bits: BigInt = needed.hi().ceil() + 1;
        if needed_bits > BigInt::from(cfg.bit_budget) {
            let overflow = Error::DepthOverflow {
                achieved: digits.len(),
                needed_bits: needed.hi().to_sci_string(4),
                budget_bits: cfg.bit_budget,
            };
            return Ok((DigitSequence::new(digits, false), Some(overflow)));
        }
        let bits = needed_bits.to_u32().unwrap_or(u32::MAX);
        let mag = rough.hi().magnitude().max(0) as u32;
        let prec = bits + mag + 64;
        let y = growth_exponent(cfg, &digits, prec)?;
        let upper = y.exp().hi().clone();
        let next: BigInt = upper.round(prec, Rounding::Up).floor() + 1;
        let next = next.to_biguint().expect("exponential is positive");
        debug_assert!(!next.is_zero());
        digits.push(next);
    }
    Ok((DigitSequence::new(digits, false), None))
}

/// Certified `a > e^{f(m+1)·N_m^k}` for `a = digits[m]`, with `m` in `1..len`.
pub fn theorem1_growth_holds(cfg: &Theorem1Config, digits: &[BigUint], m: usize) -> Result<bool> {
    let a = digits
        .get(m)
        .ok_or_else(|| Error::InvalidInput(format!("no digit a_{}", m + 1)))?;
    let rough = growth_exponent(cfg, &digits[..m], 64)?;
    let prec = a.bits() as u32 + rough.hi().magnitude().max(0) as u32 + 64;
    let e = growth_exponent(cfg, &digits[..m], prec)?.exp();
    Ok(e.hi() < &Dyadic::from_int(BigInt::from(a.clone())))
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = &self.vertices;
        write!(f, "[{a}; {b}; {c}] rep {}", self.representative)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ds(v: &[u64]) -> DigitSequence {
        DigitSequence::from_u64s(v)
    }

    #[test]
    fn zeros_approach_fixed_point() {
        let enc = pair_from_digits(&ds(&[0; 30])).unwrap();
        let (q, q2) = PairRepr::cubic_fixed_point(128).coords().unwrap();
        let rep = enc.representative_pair();
        let (u, v) = rep.coords().unwrap();
        let tol = crate::real::Scalar::Exact(BigRational::new(1.into(), 1_000_000.into()));
        assert_eq!(u.sub(&q).abs().cmp_certain(&tol), Some(std::cmp::Ordering::Less));
        assert_eq!(v.sub(&q2).abs().cmp_certain(&tol), Some(std::cmp::Ordering::Less));
    }

    #[test]
    fn round_trip_examples() {
        for d in [vec![0, 1], vec![5], vec![3, 2981]] {
            let enc = pair_from_digits(&ds(&d)).unwrap();
            let seq = triangle_sequence(&enc.representative_pair(), d.len()).unwrap();
            assert_eq!(seq.digits(), ds(&d).digits());
            assert!(enc.contains_strictly(&enc.representative));
        }
        assert!(pair_from_digits(&ds(&[])).is_err());
    }

    #[test]
    fn refine_nests_and_shrinks() {
        let enc = pair_from_digits(&ds(&[0; 5])).unwrap();
        assert_eq!(refine(&enc, &ds(&[])).unwrap(), enc);
        let deeper = refine(&enc, &ds(&[0])).unwrap();
        assert!(deeper.area() < enc.area());
        for v in &deeper.vertices {
            assert!(enc.contains(v));
        }
    }

    #[test]
    fn theorem1_first_digits() {
        let cfg = Theorem1Config::new(Exponent::from_int(1), GrowthFn::Linear, 3, 3);
        let digits = theorem1_digits(&cfg).unwrap();
        assert_eq!(digits.digits()[1], BigUint::from(2981u32));
        assert_eq!(block_length(&digits.digits()[..1]), BigUint::from(4u32));
        assert_eq!(block_length(&digits.digits()[..2]), BigUint::from(2986u32));
        let a3 = &digits.digits()[2];
        assert!((12_900..12_950).contains(&a3.bits()), "{} bits", a3.bits());
        for m in 1..3 {
            assert!(theorem1_growth_holds(&cfg, digits.digits(), m).unwrap());
        }
    }

    #[test]
    fn theorem1_overflow_and_validation() {
        let cfg = Theorem1Config::new(Exponent::from_int(1), GrowthFn::Linear, 4, 3);
        match theorem1_digits(&cfg) {
            Err(Error::DepthOverflow { achieved, .. }) => assert_eq!(achieved, 3),
            other => panic!("{other:?}"),
        }
        let bad = Theorem1Config::new(Exponent::from_int(1), GrowthFn::Linear, 2, 2);
        assert!(matches!(theorem1_digits(&bad), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn growth_fn_parse() {
        assert_eq!("log".parse::<GrowthFn>().unwrap(), GrowthFn::Log);
        assert_eq!("constant:3/2".parse::<GrowthFn>().unwrap().to_string(), "constant:1.5");
        assert!("cubic".parse::<GrowthFn>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn representative_round_trips(d in proptest::collection::vec(0u64..=5, 1..=6)) {
            let enc = pair_from_digits(&ds(&d)).unwrap();
            let seq = triangle_sequence(&enc.representative_pair(), d.len()).unwrap();
            let want = ds(&d);
            prop_assert_eq!(seq.digits(), want.digits());
        }

        #[test]
        fn refinement_shrinks(d in proptest::collection::vec(0u64..=5, 1..=5), e in 0u64..=5) {
            let enc = pair_from_digits(&ds(&d)).unwrap();
            let deeper = refine(&enc, &ds(&[e])).unwrap();
            prop_assert!(deeper.area() < enc.area());
            prop_assert!(deeper.vertices.iter().all(|v| enc.contains(v)));
        }
    }
}
