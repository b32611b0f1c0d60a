//! Experiments around the divergence and convergence theorems: Diophantine
//! fits, Fibonacci bounds, free-energy trends and divergence witnesses.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::construct::{block_length, pair_from_digits, theorem1_digits_partial, theorem1_growth_holds, Theorem1Config};
use crate::convergents::{lemma_bound, x_vectors};
use crate::error::{Error, Result};
use crate::linalg;
use crate::partition::{distinguished_term, free_energy_trace, z_value_with, FreeEnergyTrace, PartitionConfig, Precision};
use crate::real::{Exponent, Interval, Scalar};
use crate::trimap::PairRepr;

/// Precision used for the Diophantine scan of inexact pairs.
const SCAN_BITS: u32 = 128;

/// Result of [`diophantine_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct DiophantineFit {
    /// Smallest `C` with `1/(C·b^d) <= |p + αq + βr|` over the scan.
    pub c: Scalar,
    pub d: Exponent,
    pub b_max: u64,
    /// The triple attaining `C`.
    pub witness: (i64, i64, i64),
    /// `|p + αq + βr|` at the witness.
    pub witness_value: Scalar,
}

struct Best {
    score: Scalar,
    triple: (i64, i64, i64),
    value: Scalar,
}

fn better(a: Option<Best>, b: Option<Best>) -> Option<Best> {
    match (a, b) {
        (Some(x), Some(y)) => {
            // Ties and uncertain comparisons keep the earlier (lexicographically smaller) triple.
            if y.score.cmp_certain(&x.score) == Some(Ordering::Less) {
                Some(y)
            } else {
                Some(x)
            }
        }
        (x, y) => x.or(y),
    }
}

fn earlier_zero(a: Option<(i64, (i64, i64, i64))>, b: Option<(i64, (i64, i64, i64))>) -> Option<(i64, (i64, i64, i64))> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    }
}

fn gcd3(p: i64, q: i64, r: i64) -> i64 {
    p.gcd(&q).gcd(&r)
}

/// The relatively prime zero of `p + αq + βr` with the smallest
/// `max(|p|, |q|, |r|)`, lexicographically first among those; integer
/// arithmetic over a common denominator.
fn first_exact_zero(alpha: &BigRational, beta: &BigRational, bound: i64) -> Option<(i64, i64, i64)> {
    let den = alpha.denom().lcm(beta.denom());
    let scale = |r: &BigRational| r.numer() * (&den / r.denom());
    let (d, a, b) = (den.to_i128()?, scale(alpha).to_i128()?, scale(beta).to_i128()?);
    d.checked_mul(3 * bound as i128)?;
    let mut best: Option<(i64, (i64, i64, i64))> = None;
    for p in -bound..=bound {
        for q in -bound..=bound {
            let pq = p as i128 * d + q as i128 * a;
            for r in -bound..=bound {
                if (q == 0 && r == 0) || pq + r as i128 * b != 0 || gcd3(p, q, r) != 1 {
                    continue;
                }
                let m = p.abs().max(q.abs()).max(r.abs());
                best = earlier_zero(best, Some((m, (p, q, r))));
            }
        }
    }
    best.map(|(_, t)| t)
}

/// Scans all relatively prime `(p, q, r)` with `max(|p|, |q|, |r|) = b <= b_max`
/// and `(q, r) != 0`, and fits the smallest `C` with `1/(C·b^d) <= |p + αq + βr|`.
pub fn diophantine_check(pair: &PairRepr, d: &Exponent, b_max: u64) -> Result<DiophantineFit> {
    diophantine_check_with(pair, d, b_max, 0)
}

/// [`diophantine_check`] on a dedicated pool of `threads` workers (`0` for the global pool).
pub fn diophantine_check_with(pair: &PairRepr, d: &Exponent, b_max: u64, threads: usize) -> Result<DiophantineFit> {
    if b_max == 0 {
        return Err(Error::InvalidInput("B_max must be at least 1".into()));
    }
    if d.value() < &BigRational::from_integer(2.into()) {
        return Err(Error::InvalidInput(format!("d must be at least 2, got {d}")));
    }
    pair.check_domain()?;
    let bound = b_max as i64;
    if let PairRepr::Rational { alpha, beta } = pair {
        if let Some((p, q, r)) = first_exact_zero(alpha, beta, bound) {
            return Err(Error::ExactZero { p, q, r });
        }
    }
    let (alpha, beta) = pair.coords()?;
    let prec = pair.bits().unwrap_or(SCAN_BITS).max(SCAN_BITS);
    let b_pow: Vec<Scalar> = (0..=bound)
        .map(|b| Scalar::from_int(b).pow(d, prec).expect("b is non-negative"))
        .collect();

    let scan_p = |p: i64| -> Result<(Option<Best>, Option<(i64, (i64, i64, i64))>)> {
        let mut best: Option<Best> = None;
        let mut zero = None;
        for q in -bound..=bound {
            let pq = Scalar::from_int(p).add(&alpha.mul_int(&q.into()));
            for r in -bound..=bound {
                if (q == 0 && r == 0) || gcd3(p, q, r) != 1 {
                    continue;
                }
                let b = p.abs().max(q.abs()).max(r.abs());
                let value = pq.add(&beta.mul_int(&r.into())).abs();
                if value.is_zero() {
                    zero = earlier_zero(zero, Some((b, (p, q, r))));
                    continue;
                }
                if value.may_be_zero() {
                    return Err(Error::PrecisionExhausted {
                        certified: 0,
                        digits: vec![],
                    });
                }
                let score = value.mul(&b_pow[b as usize]);
                best = better(
                    best,
                    Some(Best {
                        score,
                        triple: (p, q, r),
                        value,
                    }),
                );
            }
        }
        Ok((best, zero))
    };

    let run = || -> Result<Vec<(Option<Best>, Option<(i64, (i64, i64, i64))>)>> {
        (-bound..=bound).into_par_iter().map(scan_p).collect()
    };
    let parts = if threads == 0 {
        run()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
            .install(run)?
    };
    let mut best = None;
    let mut zero = None;
    for (b, z) in parts {
        best = better(best, b);
        zero = earlier_zero(zero, z);
    }
    if let Some((_, (p, q, r))) = zero {
        return Err(Error::ExactZero { p, q, r });
    }
    let best = best.expect("scan is non-empty");
    Ok(DiophantineFit {
        c: best.score.recip().expect("score is positive"),
        d: d.clone(),
        b_max,
        witness: best.triple,
        witness_value: best.value,
    })
}

/// `F_N` with `F_1 = F_2 = 1`.
pub fn fibonacci(n: usize) -> BigInt {
    linalg::fibonacci(n)
}

/// `(φ^N - ψ^N)/√5` as an interval; a cross-check on [`fibonacci`].
pub fn fibonacci_closed_form(n: u32, prec: u32) -> Interval {
    let w = prec + 2 * n + 16;
    let sqrt5 = Interval::from_int(5, w).sqrt().expect("5 is positive");
    let one = Interval::from_int(1, w);
    let phi = one.add(&sqrt5).div_int(2);
    let psi = one.sub(&sqrt5).div_int(2);
    phi.powi(n).sub(&psi.powi(n)).div(&sqrt5).expect("sqrt 5 is positive").with_prec(prec)
}

/// `2^N·C^s·F_N^{s·d}`.
pub fn fibonacci_bound(n: usize, s: &Exponent, c: &Scalar, d: &Exponent, prec: u32) -> Scalar {
    let two_n = Scalar::Exact(BigRational::from_integer(BigInt::one() << n));
    let cs = c.pow(s, prec).expect("C is positive");
    let sd = Exponent::new(s.value() * d.value());
    let f = Scalar::from_int(fibonacci(n)).pow(&sd, prec).expect("F_N is positive");
    two_n.mul(&cs).mul(&f)
}

/// Whether an experiment runs inside the theorem's hypotheses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `s > 2` and `k > 1`.
    Theorem,
    Exploratory,
}

impl Regime {
    pub fn of(s: &Exponent, k: &Exponent) -> Regime {
        let two = BigRational::from_integer(2.into());
        if s.value() > &two && k.value() > &BigRational::one() {
            Regime::Theorem
        } else {
            Regime::Exploratory
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Theorem => "theorem",
            Regime::Exploratory => "exploratory",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck {
    pub n: usize,
    pub bound: Scalar,
    /// `Z_N <= bound`, certified.
    pub holds: bool,
}

/// Output of [`theorem2_experiment`].
#[derive(Clone, Debug, PartialEq)]
pub struct Theorem2Report {
    pub regime: Regime,
    pub fit: DiophantineFit,
    pub trace: FreeEnergyTrace,
    pub bounds: Vec<BoundCheck>,
    /// Normalized values strictly decrease over the whole range.
    pub tail_decreasing: bool,
    /// Normalized value at the largest `N`.
    pub final_value: Interval,
}

impl Theorem2Report {
    pub fn bounds_hold(&self) -> bool {
        self.bounds.iter().all(|b| b.holds)
    }
}

/// Free-energy trace over `ns`, a Diophantine fit at exponent `d` and scan
/// bound `b_max`, and the pointwise check `Z_N <= 2^N·C^s·F_N^{s·d}`.
pub fn theorem2_experiment(
    pair: &PairRepr,
    s: &Exponent,
    k: &Exponent,
    ns: &[usize],
    d: &Exponent,
    b_max: u64,
    cfg: &PartitionConfig,
) -> Result<Theorem2Report> {
    if ns.is_empty() {
        return Err(Error::InvalidInput("empty N range".into()));
    }
    let fit = diophantine_check_with(pair, d, b_max, cfg.threads)?;
    let trace = free_energy_trace(pair, ns, s, k, cfg)?;
    if let Some(row) = trace.rows.iter().find(|r| r.is_pole()) {
        return Err(Error::Pole {
            n: row.n,
            words: row.pole_words.clone(),
        });
    }
    let prec = match cfg.precision {
        Precision::Bits(b) => b,
        Precision::Exact => crate::partition::DEFAULT_PRECISION,
    };
    let bounds = trace
        .rows
        .iter()
        .map(|row| {
            let z = &row.result.as_ref().expect("no pole rows").value;
            let bound = fibonacci_bound(row.n, s, &fit.c, d, prec);
            let holds = matches!(z.cmp_certain(&bound), Some(Ordering::Less | Ordering::Equal));
            BoundCheck { n: row.n, bound, holds }
        })
        .collect();
    let final_value = trace.entries().last().expect("non-empty trace").1.clone();
    Ok(Theorem2Report {
        regime: Regime::of(s, k),
        tail_decreasing: trace.strictly_decreasing(),
        fit,
        trace,
        bounds,
        final_value,
    })
}

/// One level of a divergence witness.
#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceLevel {
    pub m: usize,
    /// `a_{m+1}`.
    pub a_next: BigUint,
    /// `N_m = a_1 + … + a_m + m`.
    pub n_m: BigUint,
    /// First coordinate of the level-`m` cross product, which exceeds `a_{m+1}`.
    pub x: BigInt,
    /// `s·log x / N_m^k`.
    pub lower_bound: Interval,
    /// `s·f(m+1)`.
    pub threshold: Interval,
    pub x_exceeds_a: bool,
    pub a_exceeds_exp: bool,
    /// `lower_bound > threshold`, certified.
    pub holds: bool,
}

/// Direct comparison of one summand against the whole `Z_{N_m}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectCheck {
    pub m: usize,
    pub n: usize,
    /// The pair used: the representative of the enclosure for `a_1 … a_{m+1}`.
    pub pair: PairRepr,
    pub term: Scalar,
    pub z: Scalar,
    /// `term < Z_{N_m}`.
    pub holds: bool,
    /// `term >= x^s` through `|d|·|x| <= 1`.
    pub lemma_holds: bool,
}

/// Output of [`theorem1_witness`].
#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceReport {
    pub cfg: Theorem1Config,
    pub s: Exponent,
    pub digits: Vec<BigUint>,
    pub levels: Vec<DivergenceLevel>,
    pub direct: Vec<DirectCheck>,
    /// Present when digit generation stopped at the bit budget.
    pub overflow: Option<Error>,
    pub verdict: bool,
}

const WITNESS_BITS: u32 = 128;

/// Builds the fast-growing digits and checks, at every achieved level,
/// `x > a_{m+1} > e^{f(m+1)·N_m^k}` and `s·log x / N_m^k > s·f(m+1)`. Levels
/// with `N_m <= n_ceiling` also get the direct check `1/|d|^s < Z_{N_m}`.
pub fn theorem1_witness(cfg: &Theorem1Config, s: &Exponent, n_ceiling: usize) -> Result<DivergenceReport> {
    if !s.is_positive() {
        return Err(Error::InvalidInput(format!("s must be positive, got {s}")));
    }
    let (digits, overflow) = theorem1_digits_partial(cfg)?;
    let a = digits.digits().to_vec();
    let x = x_vectors(&digits);
    let prec = WITNESS_BITS;
    let s_i = s.to_interval(prec);
    let mut levels = Vec::new();
    for m in 1..a.len() {
        let n_m = block_length(&a[..m]);
        let xm = x[m as isize].x.clone();
        let a_next = a[m].clone();
        let x_exceeds_a = xm > BigInt::from(a_next.clone());
        let a_exceeds_exp = theorem1_growth_holds(cfg, &a, m)?;
        let n_i = Interval::from_int(BigInt::from(n_m.clone()), prec);
        let nk = match cfg.k.as_u32() {
            Some(e) => n_i.powi(e),
            None => n_i.pow(&cfg.k.to_interval(prec)).expect("N_m is positive"),
        };
        let lower_bound = Interval::from_int(xm.clone(), prec)
            .ln()
            .expect("x is positive")
            .mul(&s_i)
            .div(&nk)
            .expect("N_m is positive");
        let threshold = s_i.mul(&cfg.f.eval(m as u64 + 1, prec)?);
        let holds = x_exceeds_a && a_exceeds_exp && lower_bound.cmp_certain(&threshold) == Some(Ordering::Greater);
        levels.push(DivergenceLevel {
            m,
            a_next,
            n_m,
            x: xm,
            lower_bound,
            threshold,
            x_exceeds_a,
            a_exceeds_exp,
            holds,
        });
    }

    let mut direct = Vec::new();
    for level in &levels {
        let n = match level.n_m.to_usize() {
            Some(n) if n <= n_ceiling => n,
            _ => continue,
        };
        let prefix = digits.prefix(level.m + 1);
        let pair = pair_from_digits(&prefix)?.representative_pair();
        let pcfg = if s.as_u32().is_some() {
            PartitionConfig::exact()
        } else {
            PartitionConfig::bits(crate::partition::DEFAULT_PRECISION)
        };
        let term = distinguished_term(&pair, &prefix, level.m, s, crate::partition::DEFAULT_PRECISION)?;
        let z = z_value_with(&pair, n, s, &pcfg)?.value;
        let holds = term.cmp_certain(&z) == Some(Ordering::Less);
        let lemma = lemma_bound(&pair, &prefix, level.m as isize - 1)?;
        direct.push(DirectCheck {
            m: level.m,
            n,
            pair,
            term,
            z,
            holds,
            lemma_holds: lemma.holds,
        });
    }

    let verdict = !levels.is_empty() && levels.iter().all(|l| l.holds) && direct.iter().all(|d| d.holds && d.lemma_holds);
    Ok(DivergenceReport {
        cfg: cfg.clone(),
        s: s.clone(),
        digits: a,
        levels,
        direct,
        overflow,
        verdict,
    })
}

/// Largest `|entry|` of the third column over all words of length `n`, and over all entries.
pub fn max_word_entries(n: usize) -> (BigInt, BigInt) {
    let mut third = BigInt::zero();
    let mut all = BigInt::zero();
    for bits in 0..1usize << n {
        let letters: Vec<linalg::Letter> = (0..n)
            .map(|i| linalg::Letter::from_bit(((bits >> (n - 1 - i)) & 1) as u8).expect("bit"))
            .collect();
        let a = linalg::word_product(&letters);
        third = third.max(a.column(2).max_abs());
        all = all.max(a.max_abs_entry());
    }
    (third, all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::GrowthFn;

    fn e(n: i64) -> Exponent {
        Exponent::from_int(n)
    }

    #[test]
    fn fibonacci_values() {
        let f: Vec<i64> = [1, 2, 3, 10].iter().map(|&n| fibonacci(n).to_i64().unwrap()).collect();
        assert_eq!(f, vec![1, 1, 2, 55]);
        for n in 1..=64u32 {
            let cf = fibonacci_closed_form(n, 128);
            assert!(cf.contains_rational(&BigRational::from_integer(fibonacci(n as usize))), "n = {n}");
        }
    }

    #[test]
    fn fibonacci_bound_example() {
        let b = fibonacci_bound(6, &e(3), &Scalar::one(), &e(2), 128);
        assert_eq!(b, Scalar::from_int(16_777_216));
    }

    #[test]
    fn rationally_dependent_pair() {
        let pair = PairRepr::from_ratios((1, 2), (1, 3));
        for d in [2, 3] {
            assert_eq!(
                diophantine_check(&pair, &e(d), 10),
                Err(Error::ExactZero { p: -1, q: 2, r: 0 })
            );
        }
    }

    #[test]
    fn fixed_point_fit() {
        let pair = PairRepr::cubic_fixed_point(256);
        let fit = diophantine_check(&pair, &e(2), 12).unwrap();
        assert!(fit.c.sign() == Some(Ordering::Greater));
        let (p, q, r) = fit.witness;
        assert_eq!(gcd3(p, q, r), 1);
        let small = diophantine_check(&pair, &e(2), 1).unwrap();
        assert_ne!(small.c.cmp_certain(&fit.c), Some(Ordering::Greater));
        let steeper = diophantine_check(&pair, &e(3), 12).unwrap();
        assert_ne!(steeper.c.cmp_certain(&fit.c), Some(Ordering::Greater));
    }

    #[test]
    fn threads_agree() {
        let pair = PairRepr::from_ratios((7, 11), (3, 13));
        let a = diophantine_check_with(&pair, &e(2), 9, 1).unwrap();
        let b = diophantine_check_with(&pair, &e(2), 9, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn regime_labels() {
        assert_eq!(Regime::of(&e(3), &e(2)), Regime::Theorem);
        assert_eq!(Regime::of(&e(2), &e(2)), Regime::Exploratory);
        assert_eq!(Regime::of(&e(3), &e(1)), Regime::Exploratory);
    }

    #[test]
    fn theorem2_small_run() {
        let pair = PairRepr::cubic_fixed_point(256);
        let ns: Vec<usize> = (4..=9).collect();
        let report = theorem2_experiment(&pair, &e(3), &e(2), &ns, &e(2), 10, &PartitionConfig::bits(256)).unwrap();
        assert_eq!(report.regime, Regime::Theorem);
        assert!(report.bounds_hold());
        let pole = PairRepr::from_ratios((1, 2), (1, 2));
        assert!(theorem2_experiment(&pole, &e(3), &e(2), &ns, &e(2), 5, &PartitionConfig::bits(128)).is_err());
    }

    #[test]
    fn witness_first_levels() {
        let cfg = Theorem1Config::new(e(1), GrowthFn::Linear, 3, 3);
        let report = theorem1_witness(&cfg, &e(1), 20).unwrap();
        assert!(report.verdict);
        assert_eq!(report.levels.len(), 2);
        assert_eq!(report.levels[0].x, BigInt::from(2986));
        assert_eq!(report.levels[0].n_m, BigUint::from(4u32));
        assert_eq!(report.direct.len(), 1);
        assert_eq!(report.direct[0].n, 4);
        let again = theorem1_witness(&cfg, &e(5), 20).unwrap();
        assert!(again.verdict);
    }

    #[test]
    fn word_entry_growth() {
        for n in 1..=10 {
            let (third, all) = max_word_entries(n);
            assert!(third <= fibonacci(n), "n = {n}");
            assert!(all <= fibonacci(n + linalg::FIBONACCI_ENTRY_OFFSET), "n = {n}");
        }
    }
}
