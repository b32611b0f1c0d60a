use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Rounding direction for a directed operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rounding {
    Down,
    Up,
}

impl Rounding {
    pub fn flip(self) -> Self {
        match self {
            Rounding::Down => Rounding::Up,
            Rounding::Up => Rounding::Down,
        }
    }
}

/// A binary floating value `mant * 2^exp` with an unbounded mantissa.
///
/// Arithmetic here is either exact (`add`, `sub`, `mul`, shifts) or explicitly
/// rounded with a [`Rounding`] direction, which is what the interval layer
/// builds its enclosures from.
#[derive(Clone, Debug)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        if mant.is_zero() {
            return Self::zero();
        }
        Dyadic { mant, exp }
    }

    pub fn zero() -> Self {
        Dyadic {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic {
            mant: BigInt::one(),
            exp: 0,
        }
    }

    pub fn from_int<T: Into<BigInt>>(v: T) -> Self {
        Dyadic::new(v.into(), 0)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum(&self) -> Ordering {
        match self.mant.sign() {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    /// Smallest `t` with `|self| < 2^t`. Meaningless for zero (returns `i64::MIN`).
    pub fn magnitude(&self) -> i64 {
        if self.is_zero() {
            return i64::MIN;
        }
        self.exp + self.mant.bits() as i64
    }

    pub fn neg(&self) -> Self {
        Dyadic {
            mant: -&self.mant,
            exp: self.exp,
        }
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            mant: self.mant.abs(),
            exp: self.exp,
        }
    }

    /// Multiply by `2^k` exactly.
    pub fn shl(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Dyadic {
            mant: self.mant.clone(),
            exp: self.exp + k,
        }
    }

    fn aligned(a: &Dyadic, b: &Dyadic) -> (BigInt, BigInt, i64) {
        let e = a.exp.min(b.exp);
        let am = &a.mant << ((a.exp - e) as usize);
        let bm = &b.mant << ((b.exp - e) as usize);
        (am, bm, e)
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (a, b, e) = Self::aligned(self, other);
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mant * &other.mant, self.exp + other.exp)
    }

    /// Round to at most `prec` significant bits in direction `dir`.
    pub fn round(&self, prec: u32, dir: Rounding) -> Dyadic {
        let bits = self.mant.bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let shift = (bits - prec as u64) as usize;
        let mant = match dir {
            // BigInt >> rounds toward negative infinity.
            Rounding::Down => &self.mant >> shift,
            Rounding::Up => -((-&self.mant) >> shift),
        };
        Dyadic::new(mant, self.exp + shift as i64)
    }

    /// `self + other`, rounded to `prec` bits in direction `dir`.
    ///
    /// Operands far below the rounding window are replaced by a one-sided proxy
    /// so that a huge exponent gap never forces a huge aligned mantissa.
    pub fn add_round(&self, other: &Dyadic, prec: u32, dir: Rounding) -> Dyadic {
        if self.is_zero() {
            return other.round(prec, dir);
        }
        if other.is_zero() {
            return self.round(prec, dir);
        }
        let (big, small) = if self.magnitude() >= other.magnitude() {
            (self, other)
        } else {
            (other, self)
        };
        let floor_pos = big.magnitude() - prec as i64 - 4;
        if small.magnitude() < floor_pos {
            let proxy = match (dir, small.is_positive()) {
                (Rounding::Up, true) => Dyadic::new(BigInt::one(), floor_pos),
                (Rounding::Down, false) => Dyadic::new(-BigInt::one(), floor_pos),
                _ => Dyadic::zero(),
            };
            return big.add(&proxy).round(prec, dir);
        }
        big.add(small).round(prec, dir)
    }

    pub fn sub_round(&self, other: &Dyadic, prec: u32, dir: Rounding) -> Dyadic {
        self.add_round(&other.neg(), prec, dir)
    }

    pub fn mul_round(&self, other: &Dyadic, prec: u32, dir: Rounding) -> Dyadic {
        self.mul(other).round(prec, dir)
    }

    /// `self / other` with at most `prec` significant bits, rounded in `dir`.
    ///
    /// Panics if `other` is zero.
    pub fn div_round(&self, other: &Dyadic, prec: u32, dir: Rounding) -> Dyadic {
        assert!(!other.is_zero(), "division by zero dyadic");
        if self.is_zero() {
            return Self::zero();
        }
        let want = prec as i64 + 2 + other.mant.bits() as i64 - self.mant.bits() as i64;
        let shift = want.max(0) as usize;
        let num = &self.mant << shift;
        let q = match dir {
            Rounding::Down => num.div_floor(&other.mant),
            Rounding::Up => num.div_ceil(&other.mant),
        };
        Dyadic::new(q, self.exp - shift as i64 - other.exp).round(prec, dir)
    }

    /// Positive integer power with directed rounding. The base must be non-negative.
    pub fn pow_round(&self, n: u32, prec: u32, dir: Rounding) -> Dyadic {
        debug_assert!(!self.is_negative());
        let mut acc = Dyadic::one();
        let mut base = self.round(prec, dir);
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_round(&base, prec, dir);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_round(&base, prec, dir);
            }
        }
        acc
    }

    pub fn from_rational(r: &BigRational, prec: u32, dir: Rounding) -> Dyadic {
        Dyadic::from_int(r.numer().clone()).div_round(&Dyadic::from_int(r.denom().clone()), prec, dir)
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << (self.exp as usize))
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << ((-self.exp) as usize))
        }
    }

    pub fn floor(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << (self.exp as usize)
        } else {
            &self.mant >> ((-self.exp) as usize)
        }
    }

    pub fn ceil(&self) -> BigInt {
        -self.neg().floor()
    }

    /// Midpoint of two dyadics, exact.
    pub fn midpoint(a: &Dyadic, b: &Dyadic) -> Dyadic {
        a.add(b).shl(-1)
    }

    pub fn min<'a>(a: &'a Dyadic, b: &'a Dyadic) -> &'a Dyadic {
        if a <= b {
            a
        } else {
            b
        }
    }

    pub fn max<'a>(a: &'a Dyadic, b: &'a Dyadic) -> &'a Dyadic {
        if a >= b {
            a
        } else {
            b
        }
    }

    /// Approximate conversion for diagnostics only.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits() as i64;
        let keep = bits.min(60);
        let top = &self.mant >> ((bits - keep) as usize);
        let m: f64 = top.to_string().parse().unwrap_or(0.0);
        m * 2f64.powf((self.exp + bits - keep) as f64)
    }

    /// Decimal scientific notation with `sig` significant digits, rounded to nearest.
    pub fn to_sci_string(&self, sig: usize) -> String {
        let sig = sig.max(1);
        if self.is_zero() {
            return "0".to_string();
        }
        let neg = self.is_negative();
        let r = self.abs().to_rational();
        // Estimate the decimal exponent from the binary magnitude, then correct.
        let mut e10 = ((self.magnitude() - 1) as f64 * std::f64::consts::LOG10_2).floor() as i64;
        let ten = BigInt::from(10u32);
        loop {
            let shift = sig as i64 - 1 - e10;
            let scaled = if shift >= 0 {
                &r * BigRational::from_integer(ten.pow(shift as u32))
            } else {
                &r / BigRational::from_integer(ten.pow((-shift) as u32))
            };
            let digits = (scaled + BigRational::new(BigInt::one(), BigInt::from(2))).floor().to_integer();
            let text = digits.to_string();
            if text.len() > sig {
                e10 += 1;
                continue;
            }
            if text.len() < sig {
                e10 -= 1;
                continue;
            }
            let mut out = String::new();
            if neg {
                out.push('-');
            }
            out.push_str(&text[..1]);
            if sig > 1 {
                out.push('.');
                out.push_str(&text[1..]);
            }
            out.push_str(&format!("e{}", e10));
            return out;
        }
    }
}

impl PartialEq for Dyadic {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Dyadic {}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == Ordering::Equal {
            return Ordering::Equal;
        }
        let (ma, mb) = (self.magnitude(), other.magnitude());
        if ma != mb {
            let by_mag = ma.cmp(&mb);
            return if sa == Ordering::Greater { by_mag } else { by_mag.reverse() };
        }
        let (a, b, _) = Self::aligned(self, other);
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci_string(20))
    }
}
