//! Exact 3×3 integer linear algebra for the triangle map.
//!
//! The two generators `A_0` and `A_1` have determinant one, so every word in
//! them is unimodular. Entries are unbounded integers throughout: the digits
//! that drive the divergence construction are far beyond any machine width.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{rational_string, Scalar};
use crate::trimap::PairRepr;

/// Offset `c` such that every entry of a word product of length `N` is at most
/// `F_{N+c}` in absolute value. Pinned by exhaustive search over `N <= 14`
/// (third-column entries already fit under `F_N`).
pub const FIBONACCI_ENTRY_OFFSET: usize = 1;

/// One letter of a generator word: `A_0` or `A_1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    Zero,
    One,
}

impl Letter {
    pub fn from_bit(bit: u8) -> Option<Letter> {
        match bit {
            0 => Some(Letter::Zero),
            1 => Some(Letter::One),
            _ => None,
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Letter::Zero => 0,
            Letter::One => 1,
        }
    }
}

/// A word `(σ_1, …, σ_N)` over the two generators.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn from_bits(bits: &[u8]) -> Option<Word> {
        bits.iter().map(|&b| Letter::from_bit(b)).collect::<Option<Vec<_>>>().map(Word)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{}", l.bit())?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(Letter::Zero),
                '1' => Ok(Letter::One),
                _ => Err(format!("bad letter {c:?} in word {s:?}")),
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(Word)
    }
}

/// An integer column vector `(x, y, z)ᵀ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntVec3 {
    #[serde(with = "bigint_string")]
    pub x: BigInt,
    #[serde(with = "bigint_string")]
    pub y: BigInt,
    #[serde(with = "bigint_string")]
    pub z: BigInt,
}

impl IntVec3 {
    pub fn new<T: Into<BigInt>>(x: T, y: T, z: T) -> Self {
        IntVec3 {
            x: x.into(),
            y: y.into(),
            z: z.into(),
        }
    }

    pub fn e1() -> Self {
        IntVec3::new(1, 0, 0)
    }

    pub fn e2() -> Self {
        IntVec3::new(0, 1, 0)
    }

    pub fn e3() -> Self {
        IntVec3::new(0, 0, 1)
    }

    pub fn scale(&self, k: &BigInt) -> IntVec3 {
        IntVec3 {
            x: &self.x * k,
            y: &self.y * k,
            z: &self.z * k,
        }
    }

    pub fn dot(&self, other: &IntVec3) -> BigInt {
        &self.x * &other.x + &self.y * &other.y + &self.z * &other.z
    }

    pub fn cross(&self, other: &IntVec3) -> IntVec3 {
        IntVec3 {
            x: &self.y * &other.z - &self.z * &other.y,
            y: &self.z * &other.x - &self.x * &other.z,
            z: &self.x * &other.y - &self.y * &other.x,
        }
    }

    pub fn max_abs(&self) -> BigInt {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn gcd(&self) -> BigInt {
        self.x.gcd(&self.y).gcd(&self.z)
    }

    /// `x + α·y + β·z` for the pair's coordinates.
    pub fn linear_form(&self, alpha: &Scalar, beta: &Scalar) -> Scalar {
        Scalar::from_int(self.x.clone())
            .add(&alpha.mul_int(&self.y))
            .add(&beta.mul_int(&self.z))
    }
}

impl fmt::Display for IntVec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl Add for &IntVec3 {
    type Output = IntVec3;
    fn add(self, o: &IntVec3) -> IntVec3 {
        IntVec3 {
            x: &self.x + &o.x,
            y: &self.y + &o.y,
            z: &self.z + &o.z,
        }
    }
}

impl Sub for &IntVec3 {
    type Output = IntVec3;
    fn sub(self, o: &IntVec3) -> IntVec3 {
        IntVec3 {
            x: &self.x - &o.x,
            y: &self.y - &o.y,
            z: &self.z - &o.z,
        }
    }
}

/// A 3×3 integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMat3 {
    rows: [[BigInt; 3]; 3],
}

impl IntMat3 {
    pub fn from_rows(rows: [[i64; 3]; 3]) -> Self {
        IntMat3 {
            rows: rows.map(|r| r.map(BigInt::from)),
        }
    }

    pub fn identity() -> Self {
        IntMat3::from_rows([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    }

    pub fn from_columns(c: [&IntVec3; 3]) -> Self {
        IntMat3 {
            rows: [
                [c[0].x.clone(), c[1].x.clone(), c[2].x.clone()],
                [c[0].y.clone(), c[1].y.clone(), c[2].y.clone()],
                [c[0].z.clone(), c[1].z.clone(), c[2].z.clone()],
            ],
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigInt {
        &self.rows[i][j]
    }

    pub fn column(&self, j: usize) -> IntVec3 {
        IntVec3 {
            x: self.rows[0][j].clone(),
            y: self.rows[1][j].clone(),
            z: self.rows[2][j].clone(),
        }
    }

    pub fn det(&self) -> BigInt {
        self.column(0).dot(&self.column(1).cross(&self.column(2)))
    }

    pub fn max_abs_entry(&self) -> BigInt {
        self.rows
            .iter()
            .flatten()
            .map(|v| v.abs())
            .max()
            .unwrap_or_default()
    }
}

impl Mul for &IntMat3 {
    type Output = IntMat3;
    fn mul(self, o: &IntMat3) -> IntMat3 {
        let mut rows: [[BigInt; 3]; 3] = Default::default();
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| &self.rows[i][k] * &o.rows[k][j]).sum();
            }
        }
        IntMat3 { rows }
    }
}

/// A point of the plane with exact rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalPoint2 {
    pub u: BigRational,
    pub v: BigRational,
}

impl RationalPoint2 {
    pub fn new(u: BigRational, v: BigRational) -> Self {
        RationalPoint2 { u, v }
    }

    /// Homogeneous integer vector `(den, u·den, v·den)` over a common denominator.
    pub fn homogeneous(&self) -> IntVec3 {
        let den = self.u.denom().lcm(self.v.denom());
        let scale = BigRational::from_integer(den.clone());
        IntVec3 {
            x: den,
            y: (&self.u * &scale).to_integer(),
            z: (&self.v * &scale).to_integer(),
        }
    }
}

impl fmt::Display for RationalPoint2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", rational_string(&self.u), rational_string(&self.v))
    }
}

/// `A_0` for [`Letter::Zero`], `A_1` for [`Letter::One`].
pub fn generator(letter: Letter) -> IntMat3 {
    match letter {
        Letter::Zero => IntMat3::from_rows([[0, 0, 1], [1, 0, -1], [0, 1, 0]]),
        Letter::One => IntMat3::from_rows([[1, 0, 0], [0, 1, 0], [-1, 0, 1]]),
    }
}

/// `A_{σ_1} A_{σ_2} ⋯ A_{σ_N}`; the empty word gives the identity.
pub fn word_product(word: &[Letter]) -> IntMat3 {
    let a0 = generator(Letter::Zero);
    let a1 = generator(Letter::One);
    word.iter().fold(IntMat3::identity(), |acc, l| match l {
        Letter::Zero => &acc * &a0,
        Letter::One => &acc * &a1,
    })
}

/// Hilbert–Schmidt product `M * A`, where `M` has third column `(1, α, β)ᵀ`
/// and zeros elsewhere. Only the third column of `A` contributes, so this is
/// `x + α·y + β·z`. Exact for rational pairs.
pub fn hs_product(pair: &PairRepr, a: &IntMat3) -> Result<Scalar> {
    let (alpha, beta) = pair.coords()?;
    Ok(a.column(2).linear_form(&alpha, &beta))
}

/// `(a, b, c)ᵀ ↦ (b/a, c/a)`.
pub fn hat(v: &IntVec3) -> Result<RationalPoint2> {
    if v.x.is_zero() {
        return Err(Error::ZeroLeadCoordinate);
    }
    Ok(RationalPoint2 {
        u: BigRational::new(v.y.clone(), v.x.clone()),
        v: BigRational::new(v.z.clone(), v.x.clone()),
    })
}

/// Farey sum of two or three vectors: the hat of their componentwise sum.
pub fn farey_sum(vs: &[IntVec3]) -> Result<RationalPoint2> {
    if !(2..=3).contains(&vs.len()) {
        return Err(Error::InvalidInput(format!(
            "farey sum takes 2 or 3 vectors, got {}",
            vs.len()
        )));
    }
    let total = vs[1..].iter().fold(vs[0].clone(), |acc, v| &acc + v);
    hat(&total)
}

/// `det(A) / (a11·a12·a13)`: the area convention for the triangle whose
/// vertices are the hats of the three columns. This is twice the Euclidean
/// area, and carries a sign from the orientation.
pub fn projective_triangle_area(a: &IntMat3) -> Result<BigRational> {
    let leads = [a.entry(0, 0), a.entry(0, 1), a.entry(0, 2)];
    if leads.iter().any(|v| v.is_zero()) {
        return Err(Error::ZeroLeadCoordinate);
    }
    let den = leads[0] * leads[1] * leads[2];
    Ok(BigRational::new(a.det(), den))
}

/// Fibonacci numbers with `F_1 = F_2 = 1` (and `F_0 = 0`).
pub fn fibonacci(n: usize) -> BigInt {
    let (mut a, mut b) = (BigInt::zero(), BigInt::one());
    for _ in 0..n {
        let next = &a + &b;
        a = std::mem::replace(&mut b, next);
    }
    a
}

pub(crate) mod bigint_string {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
