//! Convergent vectors `C_k`, approximation errors `d_k`, the cross products
//! `X_n = C_n × C_{n+1}`, and the nested triangles they cut out.
//!
//! Indices run from `-3`. With digits `a_1, a_2, …` the recurrence is
//! `C_j = C_{j-3} - C_{j-2} - a_{j+1}·C_{j-1}` from the seeds
//! `C_{-3} = e1, C_{-2} = e2, C_{-1} = e3`, so `m` digits give `C_0 … C_{m-1}`.
//! Likewise `d_j = (1, α, β)·C_j`.

use std::cmp::Ordering;
use std::ops::Index;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::linalg::{farey_sum, hat, hs_product, word_product, IntMat3, IntVec3, Letter, RationalPoint2, Word};
use crate::real::Scalar;
use crate::trimap::{triangle_sequence, DigitSequence, PairRepr};

/// Longest word materialized by [`word_for_digits`].
pub const MAX_WORD_LEN: usize = 1 << 24;

/// A list indexed from `-3`.
#[derive(Clone, Debug, PartialEq)]
pub struct FromMinus3<T>(Vec<T>);

impl<T> FromMinus3<T> {
    pub fn get(&self, k: isize) -> Option<&T> {
        usize::try_from(k + 3).ok().and_then(|i| self.0.get(i))
    }

    /// Highest stored index.
    pub fn last_index(&self) -> isize {
        self.0.len() as isize - 4
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn iter_indexed(&self) -> impl Iterator<Item = (isize, &T)> {
        self.0.iter().enumerate().map(|(i, v)| (i as isize - 3, v))
    }
}

impl<T> Index<isize> for FromMinus3<T> {
    type Output = T;
    fn index(&self, k: isize) -> &T {
        self.get(k).unwrap_or_else(|| panic!("index {k} out of range"))
    }
}

fn digit_int(d: &BigUint) -> BigInt {
    BigInt::from(d.clone())
}

/// `C_{-3}, …, C_{m-1}` for `m` digits.
pub fn c_vectors(digits: &DigitSequence) -> FromMinus3<IntVec3> {
    let mut c = vec![IntVec3::e1(), IntVec3::e2(), IntVec3::e3()];
    for a in digits.digits() {
        let n = c.len();
        let next = &(&c[n - 3] - &c[n - 2]) - &c[n - 1].scale(&digit_int(a));
        c.push(next);
    }
    FromMinus3(c)
}

/// `d_{-3}, …, d_{m-1}` by the three-term recurrence.
pub fn d_values(pair: &PairRepr, digits: &DigitSequence) -> Result<FromMinus3<Scalar>> {
    let (alpha, beta) = pair.coords()?;
    let mut d = vec![Scalar::one(), alpha, beta];
    for a in digits.digits() {
        let n = d.len();
        let next = d[n - 3].sub(&d[n - 2]).sub(&d[n - 1].mul_int(&digit_int(a)));
        d.push(next);
    }
    Ok(FromMinus3(d))
}

/// Digits from the `d` recurrence alone: `a_{j+1}` is the integer with
/// `d_{j-3} - d_{j-2} - a·d_{j-1} >= 0 > d_{j-3} - d_{j-2} - (a+1)·d_{j-1}`.
pub fn digits_from_d(pair: &PairRepr, n: usize) -> Result<DigitSequence> {
    pair.check_domain()?;
    let (alpha, beta) = pair.coords()?;
    let mut d = [Scalar::one(), alpha, beta];
    let mut out: Vec<BigUint> = Vec::with_capacity(n);
    let exhausted = |out: &[BigUint]| Error::PrecisionExhausted {
        certified: out.len(),
        digits: out.iter().map(|d| d.to_string()).collect(),
    };
    for _ in 0..n {
        match d[2].sign() {
            Some(Ordering::Equal) => return Ok(DigitSequence::new(out, true)),
            Some(Ordering::Greater) => {}
            Some(Ordering::Less) => return Err(Error::OutOfDomain),
            None => return Err(exhausted(&out)),
        }
        let gap = d[0].sub(&d[1]);
        let a = gap
            .div(&d[2])
            .and_then(|t| t.floor())
            .ok_or_else(|| exhausted(&out))?;
        let a = a.to_biguint().ok_or(Error::OutOfDomain)?;
        let next = gap.sub(&d[2].mul_int(&BigInt::from(a.clone())));
        out.push(a);
        d = [d[1].clone(), d[2].clone(), next];
    }
    let terminated = d[2].is_exact() && d[2].is_zero();
    Ok(DigitSequence::new(out, terminated))
}

/// `X_{-3}, …, X_{m-1}` for `m` digits via
/// `X_n = X_{n-1} + a_{n+1}·X_{n-2} + X_{n-3}`, seeded by
/// `X_{-3} = e3, X_{-2} = e1, X_{-1} = (1, 1, 0)ᵀ`.
///
/// `X_n` depends only on `a_1 … a_{n+1}`. [`x_vectors_by_cross`] computes the
/// same list from the definition.
pub fn x_vectors(digits: &DigitSequence) -> FromMinus3<IntVec3> {
    let mut x = vec![IntVec3::e3(), IntVec3::e1(), IntVec3::new(1, 1, 0)];
    for a in digits.digits() {
        let n = x.len();
        let next = &(&x[n - 1] + &x[n - 2].scale(&digit_int(a))) + &x[n - 3];
        x.push(next);
    }
    // x holds X_{-3} … X_{m-1}: one more than the seeds per digit.
    FromMinus3(x)
}

/// `X_n = C_n × C_{n+1}`. The deepest entry uses
/// `C_{m-1} × (C_{m-3} - C_{m-2})`, which equals `C_{m-1} × C_m` whatever the
/// next digit is.
pub fn x_vectors_by_cross(digits: &DigitSequence) -> FromMinus3<IntVec3> {
    let c = c_vectors(digits);
    let last = c.last_index();
    let mut x: Vec<IntVec3> = (-3..last).map(|n| c[n].cross(&c[n + 1])).collect();
    let tail = &c[last - 2] - &c[last - 1];
    x.push(c[last].cross(&tail));
    FromMinus3(x)
}

/// Projective vertex vectors of the nested triangle for the digit prefix:
/// `X_{n-1}`, `X_n` and `X_n + X_{n-2}`, with `n = m - 1`.
pub fn nested_triangle_vectors(digits: &DigitSequence) -> Result<[IntVec3; 3]> {
    if digits.is_empty() {
        return Err(Error::InvalidInput("nested triangle needs at least one digit".into()));
    }
    let x = x_vectors(digits);
    let n = x.last_index();
    Ok([x[n - 1].clone(), x[n].clone(), &x[n] + &x[n - 2]])
}

/// Vertices `hat(X_{n-1})`, `hat(X_n)`, `X_n +̂ X_{n-2}` of the subtriangle of
/// points whose triangle sequence begins with `digits`.
pub fn nested_triangle(digits: &DigitSequence) -> Result<[RationalPoint2; 3]> {
    let x = x_vectors(digits);
    let [v0, v1, _] = nested_triangle_vectors(digits)?;
    let n = x.last_index();
    Ok([hat(&v0)?, hat(&v1)?, farey_sum(&[x[n].clone(), x[n - 2].clone()])?])
}

/// `det(X_k + X_{k-2}, X_{k-1}, X_k)`.
pub fn unimodular_det(x: &FromMinus3<IntVec3>, k: isize) -> BigInt {
    IntMat3::from_columns([&(&x[k] + &x[k - 2]), &x[k - 1], &x[k]]).det()
}

/// Result of checking `|d_k| <= 1/|x_{k+1}|`.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaBound {
    /// `|d_k|·|x_{k+1}|`.
    pub ratio: Scalar,
    /// The ratio is certainly at most one.
    pub holds: bool,
}

/// Checks `|d_k|·|x_{k+1}| <= 1`, where `x_{k+1}` is the first coordinate of
/// `X_{k+1}`. Needs the digits through `a_{k+2}`.
pub fn lemma_bound(pair: &PairRepr, digits: &DigitSequence, k: isize) -> Result<LemmaBound> {
    let x = x_vectors(digits);
    if k < -3 || k + 1 > x.last_index() {
        return Err(Error::InvalidInput(format!(
            "level {k} needs digits through a_{}, have {}",
            k + 2,
            digits.len()
        )));
    }
    let lead = &x[k + 1].x;
    if lead == &BigInt::from(0) {
        return Err(Error::ZeroX { level: k + 1 });
    }
    let d = d_values(pair, digits)?;
    let ratio = d[k].abs().mul_int(&lead.magnitude().clone().into());
    let holds = match &ratio {
        Scalar::Exact(r) => r <= &BigRational::one(),
        Scalar::Approx(i) => i.hi() <= &crate::real::Dyadic::one(),
    };
    Ok(LemmaBound { ratio, holds })
}

/// The word `1^{a_1} 0 1^{a_2} 0 … 1^{a_k} 0`.
pub fn word_for_digits(digits: &DigitSequence) -> Result<Word> {
    let mut letters = Vec::new();
    for a in digits.digits() {
        let run = a
            .to_usize()
            .filter(|&r| letters.len() + r < MAX_WORD_LEN)
            .ok_or_else(|| Error::InvalidInput(format!("word for digit {a} is too long")))?;
        letters.extend(std::iter::repeat(Letter::One).take(run));
        letters.push(Letter::Zero);
    }
    Ok(Word(letters))
}

/// Outcome of [`word_column_identity`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordColumnCheck {
    pub holds: bool,
    pub diagnostic: Option<String>,
}

/// The product of the word for `a_1 … a_k` has columns `C_{k-3}, C_{k-2}, C_{k-1}`.
pub fn word_column_identity(digits: &DigitSequence) -> Result<WordColumnCheck> {
    let word = word_for_digits(digits)?;
    let product = word_product(word.letters());
    let c = c_vectors(digits);
    let k = digits.len() as isize;
    for (col, idx) in (k - 3..k).enumerate() {
        let got = product.column(col);
        if got != c[idx] {
            return Ok(WordColumnCheck {
                holds: false,
                diagnostic: Some(format!(
                    "column {} of word {} is {}, expected C_{} = {}",
                    col + 1,
                    word,
                    got,
                    idx,
                    c[idx]
                )),
            });
        }
    }
    Ok(WordColumnCheck {
        holds: true,
        diagnostic: None,
    })
}

/// `M * A^I = d_{k-1}` for the word of `a_1 … a_k`. Intervals only need to overlap.
pub fn word_value_identity(pair: &PairRepr, digits: &DigitSequence) -> Result<bool> {
    let word = word_for_digits(digits)?;
    let hs = hs_product(pair, &word_product(word.letters()))?;
    let d = d_values(pair, digits)?;
    let target = &d[digits.len() as isize - 1];
    Ok(match (hs.as_rational(), target.as_rational()) {
        (Some(a), Some(b)) => a == b,
        _ => hs.cmp_certain(target).is_none() || hs.cmp_certain(target) == Some(Ordering::Equal),
    })
}

/// Everything derived from a pair's digit prefix.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergentTable {
    pub digits: DigitSequence,
    pub c: FromMinus3<IntVec3>,
    pub d: FromMinus3<Scalar>,
    pub x: FromMinus3<IntVec3>,
}

impl ConvergentTable {
    /// Table for the first `n` digits of the pair's own triangle sequence.
    pub fn build(pair: &PairRepr, n: usize) -> Result<Self> {
        let digits = triangle_sequence(pair, n)?;
        Self::from_digits(pair, digits)
    }

    pub fn from_digits(pair: &PairRepr, digits: DigitSequence) -> Result<Self> {
        Ok(ConvergentTable {
            c: c_vectors(&digits),
            d: d_values(pair, &digits)?,
            x: x_vectors(&digits),
            digits,
        })
    }
}
