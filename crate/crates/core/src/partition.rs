//! The partition sum `Z_N(α, β, s) = Σ_{|I| = N} 1/|x(I) + α·y(I) + β·z(I)|^s`
//! over all words `I` in the generators, and free-energy traces built on it.
//!
//! Words are enumerated depth first, carrying the row vector
//! `r = (1, α, β)·A^{prefix}`. Appending a letter is one subtraction:
//! `r·A_0 = (r_2, r_3, r_1 - r_2)` and `r·A_1 = (r_1 - r_3, r_2, r_3)`.
//! The term for a complete word is `1/|r_3|^s`.
//!
//! Work is split into blocks by fixed-length prefix (`min(N, 8)` letters).
//! Block sums are combined in prefix order, so the result does not depend
//! on the number of worker threads.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convergents::{d_values, word_for_digits};
use crate::error::{Error, Result};
use crate::linalg::{Letter, Word};
use crate::real::{Dyadic, Exponent, Interval, Scalar};
use crate::trimap::{DigitSequence, PairRepr};

/// Working precision when none is given.
pub const DEFAULT_PRECISION: u32 = 256;
/// Longest word length the engine accepts.
pub const HARD_N_CAP: usize = 34;
/// Output schema version for serialized traces.
pub const SCHEMA_VERSION: u32 = 1;

const BLOCK_PREFIX: usize = 8;
/// Pole words kept per evaluation.
const MAX_POLE_WORDS: usize = 32;

/// How the sum is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// Exact rational arithmetic; rational pairs and positive integer `s` only.
    Exact,
    /// Interval arithmetic at this many bits.
    Bits(u32),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionConfig {
    pub precision: Precision,
    /// Worker threads; `0` uses the global pool.
    pub threads: usize,
    /// Re-run once at doubled precision when the smallest denominator is
    /// below `2^(-bits/2)`.
    pub rerun: bool,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            precision: Precision::Bits(DEFAULT_PRECISION),
            threads: 0,
            rerun: true,
        }
    }
}

impl PartitionConfig {
    pub fn bits(bits: u32) -> Self {
        PartitionConfig {
            precision: Precision::Bits(bits),
            ..Default::default()
        }
    }

    pub fn exact() -> Self {
        PartitionConfig {
            precision: Precision::Exact,
            ..Default::default()
        }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }
}

/// One evaluated `Z_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionResult {
    pub n: usize,
    pub s: Exponent,
    pub value: Scalar,
    /// Smallest `|x + αy + βz|` over the words.
    pub min_denom: Scalar,
    /// `None` in exact mode.
    pub precision_bits: Option<u32>,
}

struct BlockOut<S, M> {
    sum: S,
    min: Option<M>,
    poles: Vec<Vec<Letter>>,
}

impl<S, M> BlockOut<S, M> {
    fn add_pole(&mut self, word: Vec<Letter>) {
        if self.poles.len() < MAX_POLE_WORDS {
            self.poles.push(word);
        }
    }
}

trait Mode: Sync {
    type Num: Clone + Send + Sync;
    type Sum: Send;
    type Min: Send;

    fn sub(&self, a: &Self::Num, b: &Self::Num) -> Self::Num;
    fn empty(&self) -> BlockOut<Self::Sum, Self::Min>;
    /// Adds the term for `r3`; `false` when the denominator may vanish.
    fn leaf(&self, r3: &Self::Num, out: &mut BlockOut<Self::Sum, Self::Min>) -> bool;
    fn merge(&self, a: &mut BlockOut<Self::Sum, Self::Min>, b: BlockOut<Self::Sum, Self::Min>);
    /// Called once per block and once on the total.
    fn finish(&self, _out: &mut BlockOut<Self::Sum, Self::Min>) {}
}

fn step<M: Mode>(mode: &M, r: &[M::Num; 3], letter: Letter) -> [M::Num; 3] {
    match letter {
        Letter::Zero => [r[1].clone(), r[2].clone(), mode.sub(&r[0], &r[1])],
        Letter::One => [mode.sub(&r[0], &r[2]), r[1].clone(), r[2].clone()],
    }
}

fn dfs<M: Mode>(
    mode: &M,
    r: &[M::Num; 3],
    left: usize,
    word: &mut Vec<Letter>,
    out: &mut BlockOut<M::Sum, M::Min>,
) {
    if left == 0 {
        if !mode.leaf(&r[2], out) {
            out.add_pole(word.clone());
        }
        return;
    }
    for letter in [Letter::Zero, Letter::One] {
        word.push(letter);
        dfs(mode, &step(mode, r, letter), left - 1, word, out);
        word.pop();
    }
}

fn prefix_letters(block: usize, len: usize) -> Vec<Letter> {
    (0..len)
        .map(|i| {
            if (block >> (len - 1 - i)) & 1 == 1 {
                Letter::One
            } else {
                Letter::Zero
            }
        })
        .collect()
}

fn enumerate<M: Mode>(mode: &M, start: [M::Num; 3], n: usize, threads: usize) -> BlockOut<M::Sum, M::Min> {
    let b = n.min(BLOCK_PREFIX);
    let run = || {
        let blocks: Vec<BlockOut<M::Sum, M::Min>> = (0..1usize << b)
            .into_par_iter()
            .map(|block| {
                let mut word = prefix_letters(block, b);
                let r = word.iter().fold(start.clone(), |r, &l| step(mode, &r, l));
                let mut out = mode.empty();
                dfs(mode, &r, n - b, &mut word, &mut out);
                mode.finish(&mut out);
                out
            })
            .collect();
        let mut total = mode.empty();
        for block in blocks {
            mode.merge(&mut total, block);
        }
        mode.finish(&mut total);
        total
    };
    if threads == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
            .install(run)
    }
}

struct ExactMode {
    s: u32,
}

/// Pairwise sum; keeps operand sizes balanced.
fn tree_sum(mut terms: Vec<BigRational>) -> BigRational {
    if terms.is_empty() {
        return BigRational::zero();
    }
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut it = terms.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => a + b,
                None => a,
            });
        }
        terms = next;
    }
    terms.pop().expect("one term left")
}

impl Mode for ExactMode {
    type Num = BigInt;
    /// Terms not yet added.
    type Sum = Vec<BigRational>;
    type Min = BigInt;

    fn sub(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a - b
    }

    fn empty(&self) -> BlockOut<Vec<BigRational>, BigInt> {
        BlockOut {
            sum: Vec::new(),
            min: None,
            poles: Vec::new(),
        }
    }

    fn leaf(&self, r3: &BigInt, out: &mut BlockOut<Vec<BigRational>, BigInt>) -> bool {
        if r3.is_zero() {
            return false;
        }
        let a = r3.abs();
        out.sum
            .push(BigRational::new(BigInt::one(), num_traits::pow(a.clone(), self.s as usize)));
        if out.min.as_ref().map_or(true, |m| &a < m) {
            out.min = Some(a);
        }
        true
    }

    fn merge(&self, a: &mut BlockOut<Vec<BigRational>, BigInt>, b: BlockOut<Vec<BigRational>, BigInt>) {
        a.sum.extend(b.sum);
        if let Some(m) = b.min {
            if a.min.as_ref().map_or(true, |x| &m < x) {
                a.min = Some(m);
            }
        }
        for w in b.poles {
            a.add_pole(w);
        }
    }

    fn finish(&self, out: &mut BlockOut<Vec<BigRational>, BigInt>) {
        let terms = std::mem::take(&mut out.sum);
        out.sum = vec![tree_sum(terms)];
    }
}

struct IntervalMode {
    s: Exponent,
    s_int: Option<u32>,
    prec: u32,
}

impl Mode for IntervalMode {
    type Num = Interval;
    type Sum = Interval;
    type Min = (Dyadic, Dyadic);

    fn sub(&self, a: &Interval, b: &Interval) -> Interval {
        a.sub(b)
    }

    fn empty(&self) -> BlockOut<Interval, (Dyadic, Dyadic)> {
        BlockOut {
            sum: Interval::from_int(0, self.prec),
            min: None,
            poles: Vec::new(),
        }
    }

    fn leaf(&self, r3: &Interval, out: &mut BlockOut<Interval, (Dyadic, Dyadic)>) -> bool {
        if r3.contains_zero() {
            return false;
        }
        let a = r3.abs();
        let p = match self.s_int {
            Some(e) => a.powi(e),
            None => a.pow(&self.s.to_interval(self.prec)).expect("positive base"),
        };
        out.sum = out.sum.add(&p.recip().expect("positive power"));
        out.min = Some(match out.min.take() {
            None => (a.lo().clone(), a.hi().clone()),
            Some((lo, hi)) => (Dyadic::min(&lo, a.lo()).clone(), Dyadic::min(&hi, a.hi()).clone()),
        });
        true
    }

    fn merge(&self, a: &mut BlockOut<Interval, (Dyadic, Dyadic)>, b: BlockOut<Interval, (Dyadic, Dyadic)>) {
        a.sum = a.sum.add(&b.sum);
        a.min = match (a.min.take(), b.min) {
            (Some((l1, h1)), Some((l2, h2))) => {
                Some((Dyadic::min(&l1, &l2).clone(), Dyadic::min(&h1, &h2).clone()))
            }
            (x, y) => x.or(y),
        };
        for w in b.poles {
            a.add_pole(w);
        }
    }
}

fn pole(n: usize, words: Vec<Vec<Letter>>) -> Error {
    Error::Pole {
        n,
        words: words.into_iter().map(|w| Word(w).to_string()).collect(),
    }
}

fn check_args(n: usize, s: &Exponent) -> Result<()> {
    if n == 0 || n > HARD_N_CAP {
        return Err(Error::InvalidInput(format!("N must be in 1..={HARD_N_CAP}, got {n}")));
    }
    if !s.is_positive() {
        return Err(Error::InvalidInput(format!("s must be positive, got {s}")));
    }
    Ok(())
}

fn z_exact(alpha: &BigRational, beta: &BigRational, n: usize, s: &Exponent, threads: usize) -> Result<PartitionResult> {
    let se = s
        .as_u32()
        .ok_or_else(|| Error::InvalidInput(format!("exact mode needs a positive integer s, got {s}")))?;
    let d = alpha.denom().lcm(beta.denom());
    let scale = |r: &BigRational| r.numer() * (&d / r.denom());
    let start = [d.clone(), scale(alpha), scale(beta)];
    let out = enumerate(&ExactMode { s: se }, start, n, threads);
    if !out.poles.is_empty() {
        return Err(pole(n, out.poles));
    }
    let ds = BigRational::from_integer(num_traits::pow(d.clone(), se as usize));
    Ok(PartitionResult {
        n,
        s: s.clone(),
        value: Scalar::Exact(tree_sum(out.sum) * ds),
        min_denom: Scalar::Exact(BigRational::new(out.min.expect("at least one word"), d)),
        precision_bits: None,
    })
}

fn z_interval(pair: &PairRepr, n: usize, s: &Exponent, prec: u32, threads: usize) -> Result<PartitionResult> {
    let (alpha, beta) = pair.coords()?;
    let start = [
        Interval::from_int(1, prec),
        alpha.to_interval(prec).with_prec(prec),
        beta.to_interval(prec).with_prec(prec),
    ];
    let mode = IntervalMode {
        s: s.clone(),
        s_int: s.as_u32(),
        prec,
    };
    let out = enumerate(&mode, start, n, threads);
    if !out.poles.is_empty() {
        return Err(pole(n, out.poles));
    }
    let (lo, hi) = out.min.expect("at least one word");
    Ok(PartitionResult {
        n,
        s: s.clone(),
        value: Scalar::Approx(out.sum),
        min_denom: Scalar::Approx(Interval::new(lo, hi, prec)),
        precision_bits: Some(prec),
    })
}

/// `Z_N(α, β, s)` at `precision` bits.
pub fn z_value(pair: &PairRepr, n: usize, s: &Exponent, precision: u32) -> Result<PartitionResult> {
    z_value_with(pair, n, s, &PartitionConfig::bits(precision))
}

/// `Z_N(α, β, s)` under an explicit configuration.
pub fn z_value_with(pair: &PairRepr, n: usize, s: &Exponent, cfg: &PartitionConfig) -> Result<PartitionResult> {
    check_args(n, s)?;
    pair.check_domain()?;
    match cfg.precision {
        Precision::Exact => match pair {
            PairRepr::Rational { alpha, beta } => z_exact(alpha, beta, n, s, cfg.threads),
            _ => Err(Error::InvalidInput("exact mode needs a rational pair".into())),
        },
        Precision::Bits(bits) => {
            if bits < 64 {
                return Err(Error::InvalidInput(format!("precision must be at least 64 bits, got {bits}")));
            }
            let first = z_interval(pair, n, s, bits, cfg.threads);
            let small = match &first {
                Ok(r) => r.min_denom.to_interval(bits).lo().magnitude() <= -((bits / 2) as i64),
                Err(Error::Pole { .. }) => !pair.is_exact(),
                Err(_) => false,
            };
            if cfg.rerun && small {
                z_interval(pair, n, s, bits * 2, cfg.threads)
            } else {
                first
            }
        }
    }
}

/// Reference implementation: materializes every `A^I` by full matrix products.
pub fn z_value_naive(pair: &PairRepr, n: usize, s: &Exponent, precision: u32) -> Result<Scalar> {
    check_args(n, s)?;
    let mut total: Option<Scalar> = None;
    let mut poles = Vec::new();
    for bits in 0..1usize << n {
        let letters = prefix_letters(bits, n);
        let a = crate::linalg::word_product(&letters);
        let den = crate::linalg::hs_product(pair, &a)?.abs();
        if den.may_be_zero() {
            if poles.len() < MAX_POLE_WORDS {
                poles.push(letters);
            }
            continue;
        }
        let term = den
            .pow(s, precision)
            .and_then(|p| p.recip())
            .expect("positive denominator");
        total = Some(match total {
            None => term,
            Some(t) => t.add(&term),
        });
    }
    if !poles.is_empty() {
        return Err(pole(n, poles));
    }
    Ok(total.expect("at least one word"))
}

/// One row of a free-energy trace.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceEntry {
    pub n: usize,
    /// `None` for pole rows.
    pub result: Option<PartitionResult>,
    pub log_value: Option<Interval>,
    /// `log Z_N / (s·N^k)`.
    pub normalized: Option<Interval>,
    /// Words whose denominator vanishes; empty unless this is a pole row.
    pub pole_words: Vec<String>,
}

impl TraceEntry {
    pub fn is_pole(&self) -> bool {
        !self.pole_words.is_empty()
    }
}

/// `log Z_N / (s·N^k)` over a range of `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeEnergyTrace {
    pub s: Exponent,
    pub k: Exponent,
    pub precision: Precision,
    /// Every requested `N`, pole rows included, in increasing order.
    pub rows: Vec<TraceEntry>,
}

impl FreeEnergyTrace {
    /// `(N, normalized)` for the non-pole rows.
    pub fn entries(&self) -> Vec<(usize, Interval)> {
        self.rows
            .iter()
            .filter_map(|r| r.normalized.clone().map(|v| (r.n, v)))
            .collect()
    }

    pub fn all_poles(&self) -> bool {
        self.rows.iter().all(TraceEntry::is_pole)
    }

    /// The normalized values are certainly strictly decreasing.
    pub fn strictly_decreasing(&self) -> bool {
        self.entries()
            .windows(2)
            .all(|w| w[1].1.cmp_certain(&w[0].1) == Some(Ordering::Less))
    }
}

/// `s·N^k` as an interval.
pub fn normalizer(n: usize, s: &Exponent, k: &Exponent, prec: u32) -> Interval {
    let nn = Interval::from_int(n as u64, prec);
    let nk = match k.as_u32() {
        Some(e) => nn.powi(e),
        None => nn.pow(&k.to_interval(prec)).expect("N is positive"),
    };
    s.to_interval(prec).mul(&nk)
}

/// Evaluates `Z_N` for each `N` in `ns` and normalizes by `s·N^k`. Poles
/// become flagged rows; other errors propagate.
pub fn free_energy_trace(
    pair: &PairRepr,
    ns: &[usize],
    s: &Exponent,
    k: &Exponent,
    cfg: &PartitionConfig,
) -> Result<FreeEnergyTrace> {
    if !k.is_positive() {
        return Err(Error::InvalidInput(format!("k must be positive, got {k}")));
    }
    let mut sorted = ns.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let log_bits = match cfg.precision {
        Precision::Bits(b) => b,
        Precision::Exact => DEFAULT_PRECISION,
    };
    let mut rows = Vec::with_capacity(sorted.len());
    for n in sorted {
        match z_value_with(pair, n, s, cfg) {
            Ok(result) => {
                let bits = result.precision_bits.unwrap_or(log_bits);
                let log_value = result.value.ln(bits).expect("Z_N is positive");
                let normalized = log_value
                    .div(&normalizer(n, s, k, bits))
                    .expect("normalizer is positive");
                rows.push(TraceEntry {
                    n,
                    result: Some(result),
                    log_value: Some(log_value),
                    normalized: Some(normalized),
                    pole_words: Vec::new(),
                });
            }
            Err(Error::Pole { words, .. }) => rows.push(TraceEntry {
                n,
                result: None,
                log_value: None,
                normalized: None,
                pole_words: words,
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(FreeEnergyTrace {
        s: s.clone(),
        k: k.clone(),
        precision: cfg.precision,
        rows,
    })
}

/// The term `1/|d_{m-1}|^s` contributed to `Z_{N_m}` by the word
/// `1^{a_1} 0 … 1^{a_m} 0`, of length `N_m = a_1 + … + a_m + m`.
pub fn distinguished_term(pair: &PairRepr, digits: &DigitSequence, m: usize, s: &Exponent, precision: u32) -> Result<Scalar> {
    if m == 0 || m > digits.len() {
        return Err(Error::InvalidInput(format!("level {m} needs {m} digits, have {}", digits.len())));
    }
    let prefix = digits.prefix(m);
    let d = d_values(pair, &prefix)?;
    let den = d[m as isize - 1].abs();
    if den.is_zero() || den.may_be_zero() {
        let word = word_for_digits(&prefix).map(|w| w.to_string()).unwrap_or_default();
        return Err(Error::Pole {
            n: word.len(),
            words: vec![word],
        });
    }
    den.pow(s, precision)
        .and_then(|p| p.recip())
        .ok_or_else(|| Error::InvalidInput("could not raise denominator to s".into()))
}
