//! A seeded run over the library's invariants, behind `tricf verify`.

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::construct::pair_from_digits;
use crate::convergents::{digits_from_d, lemma_bound, unimodular_det, word_column_identity, x_vectors, x_vectors_by_cross};
use crate::error::Error;
use crate::linalg::{fibonacci, word_product, Letter, FIBONACCI_ENTRY_OFFSET};
use crate::partition::{z_value_naive, z_value_with, PartitionConfig};
use crate::real::Exponent;
use crate::trimap::{apply_t, sector_index, triangle_sequence, DigitSequence, PairRepr};

/// Outcome of one invariant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub cases: usize,
    /// First few failure descriptions.
    pub failures: Vec<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }
}

const MAX_FAILURES: usize = 5;

struct Check {
    outcome: CheckOutcome,
}

impl Check {
    fn new(name: &str) -> Self {
        Check {
            outcome: CheckOutcome {
                name: name.into(),
                cases: 0,
                failures: Vec::new(),
            },
        }
    }

    fn case(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.outcome.cases += 1;
        if !ok && self.outcome.failures.len() < MAX_FAILURES {
            self.outcome.failures.push(describe());
        }
    }
}

/// A random rational pair `b/den <= a/den < 1`.
pub fn random_pair(rng: &mut impl Rng, max_den: i64) -> PairRepr {
    let den = rng.gen_range(2..=max_den);
    let a = rng.gen_range(1..den);
    let b = rng.gen_range(1..=a);
    PairRepr::from_ratios((a, den), (b, den))
}

fn random_digits(rng: &mut impl Rng, max_len: usize, max_digit: u64) -> DigitSequence {
    let len = rng.gen_range(1..=max_len);
    let v: Vec<u64> = (0..len).map(|_| rng.gen_range(0..=max_digit)).collect();
    DigitSequence::from_u64s(&v)
}

fn in_triangle(p: &PairRepr) -> bool {
    match p {
        PairRepr::Rational { alpha, beta } => {
            alpha <= &BigRational::one() && beta <= alpha && beta >= &BigRational::zero()
        }
        _ => false,
    }
}

/// Runs every invariant on `cases` seeded random instances.
pub fn run_suite(seed: u64, cases: usize) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let mut c = Check::new("triangle map stays in the triangle");
    for _ in 0..cases {
        let p = random_pair(&mut rng, 1_000_000);
        let ok = sector_index(&p).is_ok() && apply_t(&p).map(|t| in_triangle(&t)).unwrap_or(false);
        c.case(ok, || format!("pair {p}"));
    }
    checks.push(c.outcome);

    let mut c = Check::new("orbit digits equal d-recurrence digits");
    for _ in 0..cases {
        let p = random_pair(&mut rng, 1_000_000);
        let a = triangle_sequence(&p, 15);
        let b = digits_from_d(&p, 15);
        c.case(a.is_ok() && a == b, || format!("pair {p}: {a:?} vs {b:?}"));
    }
    checks.push(c.outcome);

    let mut c = Check::new("x recurrence equals cross products; unimodular");
    for _ in 0..cases {
        let d = random_digits(&mut rng, 8, 9);
        let x = x_vectors(&d);
        let det_ok = (-1..=x.last_index()).all(|k| unimodular_det(&x, k).is_one());
        c.case(x == x_vectors_by_cross(&d) && det_ok, || format!("digits {d}"));
    }
    checks.push(c.outcome);

    let mut c = Check::new("word columns are convergents");
    for _ in 0..cases {
        let d = random_digits(&mut rng, 5, 4);
        let r = word_column_identity(&d);
        c.case(matches!(&r, Ok(w) if w.holds), || format!("digits {d}: {r:?}"));
    }
    checks.push(c.outcome);

    let mut c = Check::new("enclosure representative reproduces digits");
    for _ in 0..cases {
        let d = random_digits(&mut rng, 6, 5);
        let r = pair_from_digits(&d);
        c.case(r.is_ok(), || format!("digits {d}: {r:?}"));
    }
    checks.push(c.outcome);

    let mut c = Check::new("lemma bound |d_k||x_(k+1)| <= 1");
    for _ in 0..cases {
        let p = random_pair(&mut rng, 1 << 40);
        let digits = match triangle_sequence(&p, 12) {
            Ok(d) => d,
            Err(e) => {
                c.case(false, || format!("pair {p}: {e}"));
                continue;
            }
        };
        let top = digits.len() as isize - 2;
        let ok = (0..=top).all(|k| match lemma_bound(&p, &digits, k) {
            Ok(l) => l.holds,
            Err(Error::ZeroX { .. }) => true,
            Err(_) => false,
        });
        c.case(ok, || format!("pair {p}"));
    }
    checks.push(c.outcome);

    let mut c = Check::new("word entries bounded by Fibonacci numbers");
    for _ in 0..cases {
        let n = rng.gen_range(1..=24usize);
        let letters: Vec<Letter> = (0..n).map(|_| if rng.gen_bool(0.5) { Letter::One } else { Letter::Zero }).collect();
        let a = word_product(&letters);
        let ok = a.det().is_one()
            && a.max_abs_entry() <= fibonacci(n + FIBONACCI_ENTRY_OFFSET)
            && a.column(2).max_abs() <= fibonacci(n);
        c.case(ok, || format!("word of length {n}"));
    }
    checks.push(c.outcome);

    let mut c = Check::new("incremental partition sum equals naive sum");
    let s2 = Exponent::from_int(2);
    for _ in 0..cases.min(40) {
        let p = random_pair(&mut rng, 1 << 30);
        let n = rng.gen_range(1..=6usize);
        let fast = z_value_with(&p, n, &s2, &PartitionConfig::exact()).map(|r| r.value);
        let slow = z_value_naive(&p, n, &s2, 64);
        c.case(fast == slow, || format!("pair {p}, N = {n}"));
    }
    checks.push(c.outcome);

    let mut c = Check::new("thread count does not change the partition sum");
    for _ in 0..cases.min(10) {
        let p = random_pair(&mut rng, 1 << 30);
        let cfg = |t| PartitionConfig::bits(128).with_threads(t);
        let a = z_value_with(&p, 9, &s2, &cfg(1));
        let b = z_value_with(&p, 9, &s2, &cfg(3));
        c.case(a == b, || format!("pair {p}"));
    }
    checks.push(c.outcome);

    VerifyReport { seed, checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        let report = run_suite(42, 30);
        for c in &report.checks {
            assert!(c.passed(), "{}: {:?}", c.name, c.failures);
            assert!(c.cases > 0);
        }
    }

    #[test]
    fn suite_is_seeded() {
        assert_eq!(run_suite(7, 5), run_suite(7, 5));
    }
}
