//! Acceptance criteria. Each prints one PASS/FAIL line with its runtime and
//! budget; the process fails if any criterion fails.

use std::cmp::Ordering;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tricf::classify::{diophantine_check, theorem1_witness, theorem2_experiment};
use tricf::construct::{pair_from_digits, GrowthFn, Theorem1Config};
use tricf::convergents::{digits_from_d, lemma_bound};
use tricf::partition::{z_value_with, PartitionConfig};
use tricf::real::{Dyadic, Exponent, Scalar};
use tricf::{triangle_sequence, DigitSequence, Error, PairRepr};

type Mat = [[i64; 3]; 3];

const A0: Mat = [[0, 0, 1], [1, 0, -1], [0, 1, 0]];
const A1: Mat = [[1, 0, 0], [0, 1, 0], [-1, 0, 1]];

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let mut c = [[0i64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

fn det(m: &Mat) -> i64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// `(word, A^word)` for every word of length `n`, letters in lexicographic order.
fn all_words(n: usize) -> Vec<(String, Mat)> {
    (0..1usize << n)
        .map(|bits| {
            let mut m: Mat = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
            let mut w = String::new();
            for i in 0..n {
                let one = (bits >> (n - 1 - i)) & 1 == 1;
                m = mat_mul(&m, if one { &A1 } else { &A0 });
                w.push(if one { '1' } else { '0' });
            }
            (w, m)
        })
        .collect()
}

fn fib(n: usize) -> i64 {
    let (mut a, mut b) = (0i64, 1i64);
    for _ in 0..n {
        let c = a + b;
        a = b;
        b = c;
    }
    a
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn random_pair(rng: &mut ChaCha8Rng, max_den: i64) -> (BigRational, BigRational) {
    let den = rng.gen_range(2..=max_den);
    let a = rng.gen_range(1..den);
    let b = rng.gen_range(1..=a);
    (q(a, den), q(b, den))
}

fn random_big_pair(rng: &mut ChaCha8Rng, bits: u64) -> (BigRational, BigRational) {
    let den: BigInt = (BigInt::one() << bits) + BigInt::from(rng.gen::<u64>());
    let draw = |rng: &mut ChaCha8Rng, below: &BigInt| -> BigInt {
        let words: Vec<u32> = (0..(bits / 32 + 2)).map(|_| rng.gen()).collect();
        BigInt::from_slice(num_bigint::Sign::Plus, &words).mod_floor(below)
    };
    let a: BigInt = draw(rng, &den) + 1;
    let a = a.min(&den - 1);
    let b: BigInt = draw(rng, &a) + 1;
    (BigRational::new(a, den.clone()), BigRational::new(b, den))
}

fn pair(p: &(BigRational, BigRational)) -> PairRepr {
    PairRepr::rational(p.0.clone(), p.1.clone())
}

/// `Σ 1/|x + αy + βz|^s` over third columns, with the zero-denominator words.
fn naive_z(words: &[(String, Mat)], a: &BigRational, b: &BigRational, s: u32) -> (BigRational, Vec<String>) {
    let mut terms = Vec::new();
    let mut poles = Vec::new();
    for (w, m) in words {
        let den = BigRational::from_integer(m[0][2].into()) + a * BigInt::from(m[1][2]) + b * BigInt::from(m[2][2]);
        if den.is_zero() {
            poles.push(w.clone());
        } else {
            terms.push(num_traits::pow(den.abs(), s as usize).recip());
        }
    }
    // add in halves so operands stay of similar size
    while terms.len() > 1 {
        let odd = (terms.len() % 2 == 1).then(|| terms.pop().unwrap());
        let half = terms.split_off(terms.len() / 2);
        terms = terms.into_iter().zip(half).map(|(x, y)| x + y).collect();
        terms.extend(odd);
    }
    (terms.pop().unwrap_or_else(BigRational::zero), poles)
}

/// Triangle-map digits by direct iteration on exact rationals.
fn orbit_digits(mut a: BigRational, mut b: BigRational, n: usize) -> Vec<BigInt> {
    let mut out = Vec::new();
    let one = BigRational::one();
    while out.len() < n && !b.is_zero() {
        let k = ((&one - &a) / &b).floor().to_integer();
        let na = &b / &a;
        let nb = (&one - &a - &b * &k) / &a;
        out.push(k);
        a = na;
        b = nb;
    }
    out
}

fn s_exp(n: i64) -> Exponent {
    Exponent::from_int(n)
}

fn check(ok: bool, what: impl FnOnce() -> String) {
    if !ok {
        panic!("{}", what());
    }
}

fn criterion_1() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let one = BigRational::one();
    let two_200 = BigRational::from_integer(BigInt::one() << 200);
    let mut poles = 0;
    for _ in 0..100 {
        let (a, b) = random_pair(&mut rng, 1_000);
        let p = pair(&(a.clone(), b.clone()));
        for s in [2u32, 3] {
            let inv = |x: BigRational| num_traits::pow(x.abs(), s as usize).recip();
            let z1 = inv(&one - &a) + inv(b.clone());
            let dens = [&a - &b, &one - &a, &one - &a - &b, b.clone()];
            let words = ["00", "01", "10", "11"];
            let zero_words: Vec<String> = words
                .iter()
                .zip(&dens)
                .filter(|(_, d)| d.is_zero())
                .map(|(w, _)| w.to_string())
                .collect();
            for (n, expected) in [(1usize, Some(z1.clone())), (2, None)] {
                let exact = z_value_with(&p, n, &s_exp(s as i64), &PartitionConfig::exact());
                let approx = z_value_with(&p, n, &s_exp(s as i64), &PartitionConfig::bits(256));
                let expected = match (n, expected) {
                    (1, e) => e,
                    _ if zero_words.is_empty() => Some(dens.iter().cloned().map(inv).fold(BigRational::zero(), |x, y| x + y)),
                    _ => None,
                };
                match expected {
                    Some(z) => {
                        let got = exact.unwrap().value;
                        check(got == Scalar::Exact(z.clone()), || format!("exact Z_{n} at {a},{b}"));
                        let iv = approx.unwrap().value;
                        let iv = iv.as_interval().unwrap();
                        check(iv.contains_rational(&z), || format!("enclosure misses Z_{n} at {a},{b}"));
                        let err = (iv.mid().to_rational() - &z).abs();
                        check(err * &two_200 <= z, || format!("relative error above 2^-200 at {a},{b}"));
                    }
                    None => {
                        poles += 1;
                        let want = Error::Pole { n, words: zero_words.clone() };
                        check(exact.err() == Some(want.clone()), || format!("exact pole at {a},{b}"));
                        check(approx.err() == Some(want), || format!("interval pole at {a},{b}"));
                    }
                }
            }
        }
    }
    format!("100 pairs, s = 2 and 3, N = 1 and 2; {poles} pole cases named correctly")
}

fn criterion_2() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let tables: Vec<Vec<(String, Mat)>> = (0..=10).map(all_words).collect();
    let mut compared = 0;
    for _ in 0..25 {
        let (a, b) = random_pair(&mut rng, 1_000_000);
        let p = pair(&(a.clone(), b.clone()));
        for n in 1..=10 {
            let (sum, poles) = naive_z(&tables[n], &a, &b, 2);
            let got = z_value_with(&p, n, &s_exp(2), &PartitionConfig::exact());
            if poles.is_empty() {
                check(got.map(|r| r.value) == Ok(Scalar::Exact(sum)), || format!("N = {n} at {a},{b}"));
            } else {
                check(got == Err(Error::Pole { n, words: poles }), || format!("pole words, N = {n} at {a},{b}"));
            }
            compared += 1;
        }
    }
    format!("{compared} (pair, N) comparisons exact")
}

fn criterion_3() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut digits = 0;
    for _ in 0..200 {
        let (a, b) = random_big_pair(&mut rng, 64);
        let p = pair(&(a.clone(), b.clone()));
        let orbit = triangle_sequence(&p, 15).unwrap();
        let from_d = digits_from_d(&p, 15).unwrap();
        check(orbit == from_d, || format!("orbit vs d digits at {a},{b}"));
        let direct: Vec<BigInt> = orbit_digits(a.clone(), b.clone(), 15);
        let lib: Vec<BigInt> = orbit.digits().iter().cloned().map(BigInt::from).collect();
        check(direct == lib, || format!("library vs direct iteration at {a},{b}"));
        digits += lib.len();
    }
    format!("200 pairs, {digits} digits agree")
}

fn criterion_4() -> String {
    let p = PairRepr::cubic_fixed_point(512);
    let seq = triangle_sequence(&p, 30).unwrap();
    check(seq == DigitSequence::from_u64s(&[0; 30]), || format!("got {seq}"));
    // the enclosure really is the root of q^3 + q - 1
    let (qq, _) = p.coords().unwrap();
    let iv = qq.as_interval().unwrap().clone();
    let f = iv.powi(3).add(&iv).sub(&tricf::Interval::from_int(1, 512));
    check(f.contains_zero() && f.width() < Dyadic::new(BigInt::one(), -500), || "enclosure too wide".into());
    "30 zero digits at 512 bits".into()
}

fn criterion_5() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    let mut worst = BigRational::zero();
    for _ in 0..100 {
        let (a, b) = random_big_pair(&mut rng, 160);
        let p = pair(&(a.clone(), b.clone()));
        let digits = triangle_sequence(&p, 23).unwrap();
        let m = digits.len();
        // C_k and d_k from the recurrence, X_{k+1} from C_{k+1} x C_{k+2}
        let mut c: Vec<[BigInt; 3]> = vec![
            [1.into(), 0.into(), 0.into()],
            [0.into(), 1.into(), 0.into()],
            [0.into(), 0.into(), 1.into()],
        ];
        for a_j in digits.digits() {
            let n = c.len();
            let aj = BigInt::from(a_j.clone());
            let next: [BigInt; 3] = std::array::from_fn(|i| &c[n - 3][i] - &c[n - 2][i] - &aj * &c[n - 1][i]);
            c.push(next);
        }
        let idx = |k: i64| (k + 3) as usize;
        let d = |k: i64| {
            let v = &c[idx(k)];
            BigRational::from_integer(v[0].clone()) + &a * &v[1] + &b * &v[2]
        };
        for k in 0..=20i64 {
            if k + 2 > m as i64 - 1 {
                break;
            }
            let (u, v) = (&c[idx(k + 1)], &c[idx(k + 2)]);
            let x = &u[1] * &v[2] - &u[2] * &v[1];
            let ratio = d(k).abs() * BigRational::from_integer(x.abs());
            check(ratio <= BigRational::one(), || format!("violation at k = {k}, pair {a},{b}"));
            let lib = lemma_bound(&p, &digits, k as isize).unwrap();
            check(lib.holds && lib.ratio == Scalar::Exact(ratio.clone()), || format!("library disagrees at k = {k}"));
            if ratio > worst {
                worst = ratio;
            }
            checked += 1;
        }
    }
    format!("{checked} (pair, k) checks, 0 violations, max ratio {:.4}", worst.to_f64().unwrap())
}

fn criterion_6() -> String {
    let mut cases = 0;
    for code in 0..5usize.pow(5) {
        let digits: Vec<u64> = (0..5).map(|i| ((code / 5usize.pow(i)) % 5) as u64).collect();
        // word 1^{a_1} 0 ... 1^{a_5} 0
        let mut m: Mat = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
        for &a in &digits {
            for _ in 0..a {
                m = mat_mul(&m, &A1);
            }
            m = mat_mul(&m, &A0);
        }
        let mut c: Vec<[i64; 3]> = vec![[1, 0, 0], [0, 1, 0], [0, 0, 1]];
        for &a in &digits {
            let n = c.len();
            c.push(std::array::from_fn(|i| c[n - 3][i] - c[n - 2][i] - a as i64 * c[n - 1][i]));
        }
        let k = digits.len();
        for col in 0..3 {
            let want = c[k + col];
            let got = [m[0][col], m[1][col], m[2][col]];
            check(got == want, || format!("digits {digits:?}, column {col}"));
        }
        let lib = tricf::convergents::word_column_identity(&DigitSequence::from_u64s(&digits)).unwrap();
        check(lib.holds, || format!("library check fails for {digits:?}"));
        cases += 1;
    }
    format!("{cases} digit sequences")
}

fn criterion_7() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut hits = 0;
    let mut total = 0;
    for _ in 0..50 {
        let len = rng.gen_range(1..=5);
        let d: Vec<u64> = (0..len).map(|_| rng.gen_range(0..=4)).collect();
        let digits = DigitSequence::from_u64s(&d);
        let enc = pair_from_digits(&digits).unwrap();
        for _ in 0..20 {
            let w = [rng.gen_range(1..=1000), rng.gen_range(1..=1000), rng.gen_range(1..=1000)];
            let point = enc.interior_point(w).unwrap();
            check(enc.contains_strictly(&point), || "sample not interior".into());
            let seq = orbit_digits(point.u.clone(), point.v.clone(), len);
            total += 1;
            if seq == d.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>() {
                hits += 1;
            }
        }
    }
    check(hits == total, || format!("{hits}/{total}"));
    format!("{hits}/{total} interior points reproduce their prefix")
}

fn criterion_8() -> String {
    let mut words = 0;
    for n in 1..=14 {
        for (w, m) in all_words(n) {
            if n <= 12 {
                check(det(&m) == 1, || format!("det of {w}"));
            }
            let max = m.iter().flatten().map(|v| v.abs()).max().unwrap();
            check(max <= fib(n + tricf::linalg::FIBONACCI_ENTRY_OFFSET), || format!("entry bound at {w}"));
            words += 1;
        }
    }
    // the offset is needed: some word reaches F_{N+1} beyond F_N
    let reaches = (1..=14).any(|n| all_words(n).iter().any(|(_, m)| m.iter().flatten().any(|v| v.abs() > fib(n))));
    check(reaches, || "offset not needed".into());
    format!("{words} words, det = 1 for N <= 12, entries <= F_(N+{})", tricf::linalg::FIBONACCI_ENTRY_OFFSET)
}

fn criterion_9() -> String {
    let p = PairRepr::cubic_fixed_point(256);
    let ns: Vec<usize> = (10..=22).collect();
    let report = theorem2_experiment(&p, &s_exp(3), &s_exp(2), &ns, &s_exp(2), 50, &PartitionConfig::bits(256)).unwrap();
    check(report.tail_decreasing, || "normalized trace not strictly decreasing".into());
    let limit = Scalar::Exact(q(5, 100));
    let last = Scalar::Approx(report.final_value.clone());
    check(last.cmp_certain(&limit) == Some(Ordering::Less), || format!("final value {last}"));
    check(report.bounds_hold(), || "Fibonacci ceiling violated".into());
    let first = report.trace.entries()[0].1.clone();
    format!(
        "normalized {} (N=10) down to {} (N=22); C = {} at B_max = 50; ceiling holds",
        first, report.final_value, report.fit.c
    )
}

fn criterion_10() -> String {
    let cfg = Theorem1Config::new(s_exp(1), GrowthFn::Linear, 3, 3);
    let report = theorem1_witness(&cfg, &s_exp(1), 20).unwrap();
    check(report.levels.len() == 2, || "levels".into());
    for l in &report.levels {
        check(l.x_exceeds_a && l.a_exceeds_exp && l.holds, || format!("level {}", l.m));
    }
    check(report.levels[0].a_next == 2981u32.into(), || "a_2".into());
    let direct = &report.direct[0];
    check(direct.n == 4 && direct.holds && direct.lemma_holds, || "direct check".into());
    check(report.verdict, || "verdict".into());
    format!(
        "a_2 = {}, a_3 has {} bits; 1/|d|^s = {} < Z_4 = {}",
        report.levels[0].a_next,
        report.levels[1].a_next.bits(),
        direct.term,
        direct.z
    )
}

fn criterion_11() -> String {
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_tricf"))
            .args(["partition", "--pair", "cubic-fixed-point", "--n", "1..16", "--s", "3", "--k", "2", "--threads", threads])
            .output()
            .unwrap();
        check(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned());
        out.stdout
    };
    let one = run("1");
    for t in ["2", "8"] {
        check(run(t) == one, || format!("output differs with {t} threads"));
    }
    format!("{} bytes identical across 1, 2 and 8 threads", one.len())
}

fn criterion_12() -> String {
    let p = PairRepr::from_ratios((1, 2), (1, 2));
    match z_value_with(&p, 2, &s_exp(2), &PartitionConfig::default()) {
        Err(Error::Pole { words, .. }) => check(words.iter().any(|w| w == "10"), || format!("{words:?}")),
        other => panic!("expected a pole, got {other:?}"),
    }
    let p = PairRepr::from_ratios((1, 2), (1, 3));
    match diophantine_check(&p, &s_exp(2), 50) {
        Err(Error::ExactZero { p: a, q: b, r: c }) => {
            check(a.gcd(&b).gcd(&c) == 1, || "witness not primitive".into());
            check(6 * a + 3 * b + 2 * c == 0, || "witness is not a zero".into());
            format!("pole words include 10; ExactZero witness ({a}, {b}, {c})")
        }
        other => panic!("expected ExactZero, got {other:?}"),
    }
}

fn main() {
    let criteria: [(&str, fn() -> String, u64); 12] = [
        ("closed forms for Z_1, Z_2", criterion_1, 10),
        ("incremental vs naive Z_N", criterion_2, 60),
        ("dual digit extraction", criterion_3, 30),
        ("fixed-point sequence", criterion_4, 5),
        ("lemma bound", criterion_5, 60),
        ("word-column identity", criterion_6, 60),
        ("nested-triangle membership", criterion_7, 120),
        ("unimodularity and Fibonacci growth", criterion_8, 120),
        ("free-energy trend for (q, q^2)", criterion_9, 600),
        ("divergence witness", criterion_10, 60),
        ("thread determinism", criterion_11, 60),
        ("pole handling", criterion_12, 5),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f));
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(*budget);
        match outcome {
            Ok(detail) if in_time => println!("PASS {id:>2} {name} [{:.1}s / {budget}s]: {detail}", took.as_secs_f64()),
            Ok(detail) => {
                failed += 1;
                println!("FAIL {id:>2} {name} [{:.1}s / {budget}s]: over budget; {detail}", took.as_secs_f64());
            }
            Err(e) => {
                failed += 1;
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("FAIL {id:>2} {name} [{:.1}s / {budget}s]: {msg}", took.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
