use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use super::dyadic::{Dyadic, Rounding};

/// A closed interval `[lo, hi]` with dyadic endpoints and a working precision.
///
/// Every operation rounds its lower endpoint down and its upper endpoint up,
/// so the result always encloses the exact result of the operation applied
/// to any points of the operands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: Dyadic,
    hi: Dyadic,
    prec: u32,
}

impl Interval {
    pub fn new(lo: Dyadic, hi: Dyadic, prec: u32) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Interval { lo, hi, prec }
    }

    /// The exact dyadic `d`, without rounding.
    pub fn exact(d: Dyadic, prec: u32) -> Self {
        Interval {
            lo: d.clone(),
            hi: d,
            prec,
        }
    }

    /// Outward-rounded enclosure of `d` at `prec` bits.
    pub fn point(d: &Dyadic, prec: u32) -> Self {
        Interval {
            lo: d.round(prec, Rounding::Down),
            hi: d.round(prec, Rounding::Up),
            prec,
        }
    }

    pub fn from_int<T: Into<BigInt>>(v: T, prec: u32) -> Self {
        Self::point(&Dyadic::from_int(v), prec)
    }

    pub fn from_rational(r: &BigRational, prec: u32) -> Self {
        Interval {
            lo: Dyadic::from_rational(r, prec, Rounding::Down),
            hi: Dyadic::from_rational(r, prec, Rounding::Up),
            prec,
        }
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Interval {
            lo: self.lo.round(prec, Rounding::Down),
            hi: self.hi.round(prec, Rounding::Up),
            prec,
        }
    }

    /// Widen by `eps` on both sides.
    pub fn inflate(&self, eps: &Dyadic) -> Self {
        let eps = eps.abs();
        Interval {
            lo: self.lo.sub_round(&eps, self.prec, Rounding::Down),
            hi: self.hi.add_round(&eps, self.prec, Rounding::Up),
            prec: self.prec,
        }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn contains(&self, d: &Dyadic) -> bool {
        &self.lo <= d && d <= &self.hi
    }

    pub fn contains_rational(&self, r: &BigRational) -> bool {
        &self.lo.to_rational() <= r && r <= &self.hi.to_rational()
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    pub fn mid(&self) -> Dyadic {
        Dyadic::midpoint(&self.lo, &self.hi)
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: Dyadic::min(&self.lo, &other.lo).clone(),
            hi: Dyadic::max(&self.hi, &other.hi).clone(),
            prec: self.prec.max(other.prec),
        }
    }

    /// Certified ordering: `None` when the intervals overlap (and are not the same point).
    pub fn cmp_certain(&self, other: &Interval) -> Option<Ordering> {
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if self.lo > other.hi {
            Some(Ordering::Greater)
        } else if self.is_point() && other.is_point() && self.lo == other.lo {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Certified sign; `None` when the interval straddles zero.
    pub fn sign(&self) -> Option<Ordering> {
        if self.is_positive() {
            Some(Ordering::Greater)
        } else if self.is_negative() {
            Some(Ordering::Less)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// The common floor of every point, if there is one.
    pub fn floor_certain(&self) -> Option<BigInt> {
        let a = self.lo.floor();
        if a == self.hi.floor() {
            Some(a)
        } else {
            None
        }
    }

    pub fn neg(&self) -> Interval {
        Interval {
            lo: self.hi.neg(),
            hi: self.lo.neg(),
            prec: self.prec,
        }
    }

    pub fn abs(&self) -> Interval {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            Interval {
                lo: Dyadic::zero(),
                hi: Dyadic::max(&self.lo.neg(), &self.hi).clone(),
                prec: self.prec,
            }
        }
    }

    pub fn add(&self, other: &Interval) -> Interval {
        let p = self.prec.max(other.prec);
        Interval {
            lo: self.lo.add_round(&other.lo, p, Rounding::Down),
            hi: self.hi.add_round(&other.hi, p, Rounding::Up),
            prec: p,
        }
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        let p = self.prec.max(other.prec);
        Interval {
            lo: self.lo.sub_round(&other.hi, p, Rounding::Down),
            hi: self.hi.sub_round(&other.lo, p, Rounding::Up),
            prec: p,
        }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        let p = self.prec.max(other.prec);
        if !self.lo.is_negative() && !other.lo.is_negative() {
            return Interval {
                lo: self.lo.mul_round(&other.lo, p, Rounding::Down),
                hi: self.hi.mul_round(&other.hi, p, Rounding::Up),
                prec: p,
            };
        }
        let products = [
            self.lo.mul(&other.lo),
            self.lo.mul(&other.hi),
            self.hi.mul(&other.lo),
            self.hi.mul(&other.hi),
        ];
        let lo = products.iter().min().unwrap();
        let hi = products.iter().max().unwrap();
        Interval {
            lo: lo.round(p, Rounding::Down),
            hi: hi.round(p, Rounding::Up),
            prec: p,
        }
    }

    /// Multiply by an exact integer.
    pub fn mul_int(&self, k: &BigInt) -> Interval {
        self.mul(&Interval::exact(Dyadic::from_int(k.clone()), self.prec))
    }

    pub fn sqr(&self) -> Interval {
        let a = self.abs();
        Interval {
            lo: a.lo.mul_round(&a.lo, a.prec, Rounding::Down),
            hi: a.hi.mul_round(&a.hi, a.prec, Rounding::Up),
            prec: a.prec,
        }
    }

    /// `None` when the divisor contains zero.
    pub fn div(&self, other: &Interval) -> Option<Interval> {
        if other.contains_zero() {
            return None;
        }
        if other.is_negative() {
            return self.neg().div(&other.neg());
        }
        let p = self.prec.max(other.prec);
        let (lo_num, lo_den, hi_num, hi_den) = if !self.lo.is_negative() {
            (&self.lo, &other.hi, &self.hi, &other.lo)
        } else if !self.hi.is_positive() {
            (&self.lo, &other.lo, &self.hi, &other.hi)
        } else {
            (&self.lo, &other.lo, &self.hi, &other.lo)
        };
        Some(Interval {
            lo: lo_num.div_round(lo_den, p, Rounding::Down),
            hi: hi_num.div_round(hi_den, p, Rounding::Up),
            prec: p,
        })
    }

    pub fn recip(&self) -> Option<Interval> {
        Interval::exact(Dyadic::one(), self.prec).div(self)
    }

    /// Divide by a nonzero integer.
    pub fn div_int(&self, k: i64) -> Interval {
        self.div(&Interval::exact(Dyadic::from_int(k), self.prec))
            .expect("nonzero integer divisor")
    }

    /// Integer power.
    pub fn powi(&self, n: u32) -> Interval {
        if n == 0 {
            return Interval::exact(Dyadic::one(), self.prec);
        }
        let p = self.prec;
        if n % 2 == 0 {
            let a = self.abs();
            return Interval {
                lo: a.lo.pow_round(n, p, Rounding::Down),
                hi: a.hi.pow_round(n, p, Rounding::Up),
                prec: p,
            };
        }
        // Odd powers are monotone.
        let endpoint = |d: &Dyadic, dir: Rounding| {
            if d.is_negative() {
                d.neg().pow_round(n, p, dir.flip()).neg()
            } else {
                d.pow_round(n, p, dir)
            }
        };
        Interval {
            lo: endpoint(&self.lo, Rounding::Down),
            hi: endpoint(&self.hi, Rounding::Up),
            prec: p,
        }
    }

    pub fn exp(&self) -> Interval {
        let lo = exp_enclosure(&self.lo, self.prec).lo;
        let hi = exp_enclosure(&self.hi, self.prec).hi;
        Interval {
            lo,
            hi,
            prec: self.prec,
        }
    }

    /// Natural logarithm; `None` unless the interval is strictly positive.
    pub fn ln(&self) -> Option<Interval> {
        if !self.is_positive() {
            return None;
        }
        let lo = ln_enclosure(&self.lo, self.prec).lo;
        let hi = ln_enclosure(&self.hi, self.prec).hi;
        Some(Interval {
            lo,
            hi,
            prec: self.prec,
        })
    }

    /// `self^e` for a strictly positive base.
    pub fn pow(&self, e: &Interval) -> Option<Interval> {
        Some(self.ln()?.mul(e).exp())
    }

    /// Square root; `None` if the interval has negative points.
    pub fn sqrt(&self) -> Option<Interval> {
        if self.lo.is_negative() {
            return None;
        }
        Some(Interval {
            lo: sqrt_round(&self.lo, self.prec, Rounding::Down),
            hi: sqrt_round(&self.hi, self.prec, Rounding::Up),
            prec: self.prec,
        })
    }

    /// `ln 2` at `prec` bits, cached.
    pub fn ln2(prec: u32) -> Interval {
        static CACHE: OnceLock<Mutex<HashMap<u32, Interval>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(v) = cache.lock().unwrap().get(&prec) {
            return v.clone();
        }
        let w = prec + 16;
        let third = Interval::exact(Dyadic::one(), w).div_int(3);
        let v = atanh_series(&third).add(&atanh_series(&third)).with_prec(prec);
        cache.lock().unwrap().insert(prec, v.clone());
        v
    }

    /// Number of decimal digits the enclosure actually certifies.
    pub fn certified_digits(&self) -> usize {
        let max = ((self.prec as f64) * std::f64::consts::LOG10_2).floor().max(1.0) as usize;
        let mid = self.mid();
        if mid.is_zero() {
            return 1;
        }
        let w = self.width();
        if w.is_zero() {
            return max;
        }
        let gap = mid.magnitude() - w.magnitude() - 1;
        let digits = (gap as f64 * std::f64::consts::LOG10_2).floor();
        (digits.max(1.0) as usize).min(max)
    }

    /// Midpoint rendered with the certified number of significant digits.
    pub fn to_decimal_string(&self) -> String {
        self.mid().to_sci_string(self.certified_digits())
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

/// `atanh(z) = z + z^3/3 + z^5/5 + ...` for `|z| <= 1/3`, with a rigorous tail.
fn atanh_series(z: &Interval) -> Interval {
    let w = z.prec();
    let z2 = z.sqr();
    let mut sum = z.clone();
    let mut power = z.clone();
    let mut i: i64 = 1;
    loop {
        power = power.mul(&z2);
        sum = sum.add(&power.div_int(2 * i + 1));
        i += 1;
        let mag = power.abs().hi.magnitude();
        if power.abs().hi.is_zero() || mag < -(w as i64) - 4 {
            break;
        }
    }
    // Remaining terms sum to less than |power| * z^2 / (1 - z^2) < |power|.
    let tail = power.abs().hi.clone();
    sum.inflate(&tail)
}

fn exp_enclosure(x: &Dyadic, prec: u32) -> Interval {
    if x.is_zero() {
        return Interval::exact(Dyadic::one(), prec);
    }
    let extra = (((prec as f64).sqrt() / 2.0) as i64).clamp(8, 96);
    let j = (x.magnitude() + extra).max(0);
    let w = prec + j as u32 + 24;
    // |r| < 2^-extra
    let r = Interval::exact(x.shl(-j), w);
    let mut sum = Interval::exact(Dyadic::one(), w);
    let mut term = Interval::exact(Dyadic::one(), w);
    let mut i: i64 = 1;
    loop {
        term = term.mul(&r).div_int(i);
        sum = sum.add(&term);
        i += 1;
        let t = term.abs().hi.clone();
        if t.is_zero() || t.magnitude() < -(w as i64) - 4 {
            break;
        }
    }
    // Tail bound: sum_{k > n} |r|^k / k! <= 2 |term_n| |r| for |r| <= 1/2.
    let tail = term.abs().hi.mul(&Dyadic::new(BigInt::one(), 1 - extra));
    let mut v = sum.inflate(&tail);
    for _ in 0..j {
        v = v.sqr();
    }
    v.with_prec(prec)
}

fn ln_enclosure(x: &Dyadic, prec: u32) -> Interval {
    assert!(x.is_positive());
    let mut e = x.magnitude() - 1;
    let mut m = x.shl(-e);
    // m in [1, 2); fold the upper half to [3/4, 1) so |z| <= 1/5.
    if m >= Dyadic::new(BigInt::from(3), -1) {
        m = m.shl(-1);
        e += 1;
    }
    let w = prec + 24 + (64 - (e.unsigned_abs()).leading_zeros());
    let m = Interval::exact(m, w);
    let one = Interval::exact(Dyadic::one(), w);
    let z = m.sub(&one).div(&m.add(&one)).expect("m + 1 > 0");
    let series = atanh_series(&z);
    let mut v = series.add(&series);
    if e != 0 {
        v = v.add(&Interval::ln2(w).mul_int(&BigInt::from(e)));
    }
    v.with_prec(prec)
}

fn sqrt_round(d: &Dyadic, prec: u32, dir: Rounding) -> Dyadic {
    if d.is_zero() {
        return Dyadic::zero();
    }
    let m = d.mantissa();
    let e = d.exponent();
    let mut t = 2 * prec as i64 + 4 - m.bits() as i64;
    if (e - t).rem_euclid(2) != 0 {
        t += 1;
    }
    let scaled = if t >= 0 {
        m << (t as usize)
    } else {
        let s = (-t) as usize;
        match dir {
            Rounding::Down => m >> s,
            Rounding::Up => -((-m) >> s),
        }
    };
    let mut r = scaled.sqrt();
    if dir == Rounding::Up && &r * &r != scaled {
        r += 1;
    }
    Dyadic::new(r, (e - t) / 2).round(prec, dir)
}

/// `true` if `x` is an exact integer value (used for fast paths on exponents).
pub(crate) fn rational_as_u32(r: &BigRational) -> Option<u32> {
    if r.is_integer() && !r.is_negative() {
        r.to_integer().to_string().parse().ok()
    } else {
        None
    }
}
