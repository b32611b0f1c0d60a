//! The `tricf` command line.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | module error, or a failed `verify` |
//! | 2 | pair outside the triangle, or bad usage |
//! | 3 | precision exhausted (the certified prefix is still printed) |
//! | 4 | every requested `N` is a pole |
//! | 5 | `N` above the ceiling |
//!
//! Data goes to stdout; diagnostics go to stderr as one JSON object.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::classify::{diophantine_check_with, theorem1_witness, theorem2_experiment, DivergenceReport, Theorem2Report};
use crate::construct::{pair_from_digits, refine, GrowthFn, Theorem1Config};
use crate::error::Error;
use crate::partition::{free_energy_trace, FreeEnergyTrace, PartitionConfig, Precision, HARD_N_CAP, SCHEMA_VERSION};
use crate::real::{parse_rational, rational_string, Exponent, Interval};
use crate::trimap::{triangle_sequence, DigitSequence, PairRepr};
use crate::verify::run_suite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;
pub const EXIT_ALL_POLES: i32 = 4;
pub const EXIT_CEILING: i32 = 5;

/// Default ceiling on word length.
pub const DEFAULT_N_CEILING: usize = 28;

#[derive(Parser, Debug)]
#[command(name = "tricf", version, about = "Triangle sequences, nested triangles and partition sums for pairs (alpha, beta)")]
pub struct Cli {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Working precision in bits (at least 64).
    #[arg(long, global = true, env = "TRICF_PRECISION", default_value_t = 256)]
    pub precision: u32,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "TRICF_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Output format. `partition` defaults to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Largest word length accepted without --force (at most 34).
    #[arg(long, global = true, default_value_t = DEFAULT_N_CEILING)]
    pub n_ceiling: usize,
    /// Raise the word-length ceiling to the hard cap of 34.
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// log Z_N / (s N^k)
    Snk,
    /// log Z_N / N
    N,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Triangle sequence of a pair.
    TriSeq {
        /// `a/b,c/d`, decimals with --input-bits, or `cubic-fixed-point`.
        #[arg(long)]
        pair: String,
        #[arg(long, default_value_t = 20)]
        depth: usize,
        /// Accuracy of decimal inputs, in bits.
        #[arg(long)]
        input_bits: Option<u32>,
    },
    /// Partition sums Z_N and normalized free energies over a range of N.
    Partition {
        #[arg(long)]
        pair: String,
        /// `N`, `A..B` (inclusive) or a comma list.
        #[arg(long)]
        n: String,
        #[arg(long, default_value = "2")]
        s: Exponent,
        #[arg(long, default_value = "1")]
        k: Exponent,
        #[arg(long, value_enum, default_value_t = Normalization::Snk)]
        normalization: Normalization,
        /// Exact rational arithmetic (rational pairs, integer s).
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        input_bits: Option<u32>,
    },
    /// Run the seeded invariant suite.
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        cases: usize,
    },
    /// Nested-triangle enclosure for a digit prefix.
    Construct {
        /// Comma-separated digits.
        #[arg(long)]
        digits: String,
        /// Further digits to refine by.
        #[arg(long)]
        refine: Option<String>,
    },
    /// Divergence witness built from fast-growing digits.
    Theorem1 {
        #[arg(long, default_value = "1")]
        k: Exponent,
        /// `linear`, `log` or `constant:<c>`.
        #[arg(long, default_value = "linear")]
        f: String,
        #[arg(long, default_value = "1")]
        s: Exponent,
        #[arg(long, default_value_t = 2)]
        levels: usize,
        #[arg(long, default_value_t = 3)]
        a1: u64,
        #[arg(long, default_value_t = crate::construct::DEFAULT_BIT_BUDGET)]
        bit_budget: u64,
    },
    /// Free-energy trend with a Diophantine fit and the Fibonacci ceiling.
    Theorem2 {
        #[arg(long, default_value = "cubic-fixed-point")]
        pair: String,
        #[arg(long, default_value = "3")]
        s: Exponent,
        #[arg(long, default_value = "2")]
        k: Exponent,
        #[arg(long, default_value = "10..22")]
        n: String,
        #[arg(long, default_value = "2")]
        d: Exponent,
        #[arg(long, default_value_t = 50)]
        b_max: u64,
        #[arg(long)]
        input_bits: Option<u32>,
    },
    /// Smallest C with 1/(C b^d) <= |p + alpha q + beta r| over a box of triples.
    Diophantine {
        #[arg(long)]
        pair: String,
        #[arg(long, default_value = "2")]
        d: Exponent,
        #[arg(long, default_value_t = 50)]
        b_max: u64,
        #[arg(long)]
        input_bits: Option<u32>,
    },
}

/// Settings shared by every subcommand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub precision_bits: u32,
    pub threads: usize,
    pub n_ceiling: usize,
    pub format: Option<Format>,
}

impl RunConfig {
    fn from_args(a: &RunArgs) -> Result<Self, Failure> {
        if a.precision < 64 {
            return Err(Failure::usage(format!("--precision must be at least 64, got {}", a.precision)));
        }
        if a.n_ceiling > HARD_N_CAP {
            return Err(Failure::usage(format!("--n-ceiling must be at most {HARD_N_CAP}")));
        }
        Ok(RunConfig {
            precision_bits: a.precision,
            threads: a.threads,
            n_ceiling: if a.force { HARD_N_CAP } else { a.n_ceiling },
            format: a.format,
        })
    }

    fn partition_config(&self, exact: bool) -> PartitionConfig {
        PartitionConfig {
            precision: if exact { Precision::Exact } else { Precision::Bits(self.precision_bits) },
            threads: self.threads,
            rerun: true,
        }
    }
}

/// A failed run: exit code plus a JSON diagnostic.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub diagnostic: serde_json::Value,
    /// Data still worth printing to stdout.
    pub partial: Option<String>,
}

impl Failure {
    fn new(code: i32, kind: &str, message: String) -> Self {
        Failure {
            code,
            diagnostic: json!({ "schema_version": SCHEMA_VERSION, "error": kind, "message": message }),
            partial: None,
        }
    }

    fn usage(message: String) -> Self {
        Failure::new(EXIT_USAGE, "usage", message)
    }

    fn with(mut self, key: &str, value: serde_json::Value) -> Self {
        self.diagnostic[key] = value;
        self
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::OutOfDomain => Failure::new(EXIT_USAGE, "out_of_domain", message),
            Error::InvalidInput(_) => Failure::new(EXIT_USAGE, "invalid_input", message),
            Error::PrecisionExhausted { certified, digits } => {
                Failure::new(EXIT_PRECISION, "precision_exhausted", message)
                    .with("certified", json!(certified))
                    .with("digits", json!(digits))
            }
            Error::Pole { n, words } => Failure::new(EXIT_ERROR, "pole", message)
                .with("n", json!(n))
                .with("words", json!(words)),
            Error::ExactZero { p, q, r } => {
                Failure::new(EXIT_ERROR, "exact_zero", message).with("witness", json!([p, q, r]))
            }
            Error::DepthOverflow { achieved, .. } => {
                Failure::new(EXIT_ERROR, "depth_overflow", message).with("achieved", json!(achieved))
            }
            Error::ZeroLeadCoordinate => Failure::new(EXIT_ERROR, "zero_lead_coordinate", message),
            Error::Terminated { .. } => Failure::new(EXIT_ERROR, "terminated", message),
            Error::ZeroX { .. } => Failure::new(EXIT_ERROR, "zero_x", message),
            Error::DegenerateTriangle(_) => Failure::new(EXIT_ERROR, "degenerate_triangle", message),
        }
    }
}

/// Parses `a/b,c/d`, decimals (needs `input_bits`), or `cubic-fixed-point`.
pub fn parse_pair(text: &str, input_bits: Option<u32>, precision: u32) -> Result<PairRepr, Failure> {
    let text = text.trim();
    if text == "cubic-fixed-point" {
        return Ok(PairRepr::cubic_fixed_point(precision));
    }
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| Failure::usage(format!("pair {text:?} is not of the form alpha,beta")))?;
    if a.contains('.') || b.contains('.') {
        let bits = input_bits
            .ok_or_else(|| Failure::usage("decimal pairs need --input-bits".into()))?;
        return Ok(PairRepr::from_decimals(a, b, bits, precision.max(bits + 8))?);
    }
    let parse = |t: &str| parse_rational(t).ok_or_else(|| Failure::usage(format!("not a rational number: {t:?}")));
    Ok(PairRepr::rational(parse(a)?, parse(b)?))
}

/// Parses `N`, `A..B` (inclusive) or `A,B,C`.
pub fn parse_n_range(text: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::usage(format!("bad N range {text:?}"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    let ns: Vec<usize> = if let Some((a, b)) = text.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        text.split(',').map(num).collect::<Result<_, _>>()?
    };
    if ns.is_empty() || ns.contains(&0) {
        return Err(bad());
    }
    Ok(ns)
}

fn check_ceiling(ns: &[usize], cfg: &RunConfig) -> Result<(), Failure> {
    let max = *ns.iter().max().expect("non-empty");
    if max > cfg.n_ceiling {
        let hint = if cfg.n_ceiling < HARD_N_CAP { "; pass --force to raise it" } else { "" };
        return Err(Failure::new(
            EXIT_CEILING,
            "n_ceiling",
            format!("N = {max} exceeds the ceiling of {}{hint}", cfg.n_ceiling),
        ));
    }
    Ok(())
}

/// `tri-seq` output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriSeqRecord {
    pub schema_version: u32,
    pub pair: String,
    pub depth: usize,
    pub digits: Vec<String>,
    pub terminated: bool,
    /// False when precision ran out before `depth` digits.
    pub complete: bool,
}

/// One `partition` row; also the CSV schema.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub s: String,
    pub k: String,
    pub value: Option<String>,
    pub log_value: Option<String>,
    pub normalized: Option<String>,
    pub min_denom: Option<String>,
    pub pole: bool,
    pub precision_bits: String,
    /// Vanishing words, separated by `;`.
    pub pole_word: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionRecord {
    pub schema_version: u32,
    pub pair: String,
    pub s: String,
    pub k: String,
    pub normalization: String,
    pub rows: Vec<PartitionRow>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructRecord {
    pub schema_version: u32,
    pub digits: Vec<String>,
    pub depth: usize,
    pub vertices: Vec<[String; 2]>,
    pub representative: [String; 2],
    pub area: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiophantineRecord {
    pub schema_version: u32,
    pub pair: String,
    pub d: String,
    pub b_max: u64,
    pub c: String,
    pub witness: [i64; 3],
    pub witness_value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitEntry {
    pub value: String,
    pub bits: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub m: usize,
    pub a_next: DigitEntry,
    pub n_m: String,
    pub x: DigitEntry,
    pub lower_bound: String,
    pub threshold: String,
    pub x_exceeds_a: bool,
    pub a_exceeds_exp: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectRecord {
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub pair: String,
    pub term: String,
    pub z: String,
    pub holds: bool,
    pub lemma_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theorem1Record {
    pub schema_version: u32,
    pub k: String,
    pub f: String,
    pub s: String,
    pub digits: Vec<DigitEntry>,
    pub levels: Vec<LevelRecord>,
    pub direct: Vec<DirectRecord>,
    pub overflow: Option<String>,
    pub verdict: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theorem2Row {
    #[serde(rename = "N")]
    pub n: usize,
    pub value: String,
    pub normalized: String,
    pub bound: String,
    pub bound_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theorem2Record {
    pub schema_version: u32,
    pub pair: String,
    pub s: String,
    pub k: String,
    pub regime: String,
    pub d: String,
    pub b_max: u64,
    pub c: String,
    pub witness: [i64; 3],
    pub rows: Vec<Theorem2Row>,
    pub tail_decreasing: bool,
    pub final_value: String,
}

fn digit_entry<T: ToString>(v: &T, bits: u64) -> DigitEntry {
    DigitEntry {
        value: v.to_string(),
        bits,
    }
}

fn pair_label(pair: &PairRepr, text: &str) -> String {
    match pair {
        PairRepr::Rational { .. } => pair.to_string(),
        _ => text.trim().to_string(),
    }
}

pub fn partition_record(pair: &str, trace: &FreeEnergyTrace, normalization: Normalization) -> PartitionRecord {
    let rows = trace
        .rows
        .iter()
        .map(|row| {
            let result = row.result.as_ref();
            let normalized = match normalization {
                Normalization::Snk => row.normalized.clone(),
                Normalization::N => row.log_value.as_ref().map(|l| l.div_int(row.n as i64)),
            };
            PartitionRow {
                n: row.n,
                s: trace.s.to_string(),
                k: trace.k.to_string(),
                value: result.map(|r| r.value.to_decimal_string()),
                log_value: row.log_value.as_ref().map(Interval::to_decimal_string),
                normalized: normalized.as_ref().map(Interval::to_decimal_string),
                min_denom: result.map(|r| r.min_denom.to_decimal_string()),
                pole: row.is_pole(),
                precision_bits: match result.and_then(|r| r.precision_bits) {
                    Some(b) => b.to_string(),
                    None => match trace.precision {
                        Precision::Exact => "exact".into(),
                        Precision::Bits(b) => b.to_string(),
                    },
                },
                pole_word: (!row.pole_words.is_empty()).then(|| row.pole_words.join(";")),
            }
        })
        .collect();
    PartitionRecord {
        schema_version: SCHEMA_VERSION,
        pair: pair.into(),
        s: trace.s.to_string(),
        k: trace.k.to_string(),
        normalization: match normalization {
            Normalization::Snk => "log Z_N/(s N^k)".into(),
            Normalization::N => "log Z_N/N".into(),
        },
        rows,
    }
}

pub fn theorem1_record(r: &DivergenceReport) -> Theorem1Record {
    Theorem1Record {
        schema_version: SCHEMA_VERSION,
        k: r.cfg.k.to_string(),
        f: r.cfg.f.to_string(),
        s: r.s.to_string(),
        digits: r.digits.iter().map(|d| digit_entry(d, d.bits())).collect(),
        levels: r
            .levels
            .iter()
            .map(|l| LevelRecord {
                m: l.m,
                a_next: digit_entry(&l.a_next, l.a_next.bits()),
                n_m: l.n_m.to_string(),
                x: digit_entry(&l.x, l.x.bits()),
                lower_bound: l.lower_bound.to_decimal_string(),
                threshold: l.threshold.to_decimal_string(),
                x_exceeds_a: l.x_exceeds_a,
                a_exceeds_exp: l.a_exceeds_exp,
                holds: l.holds,
            })
            .collect(),
        direct: r
            .direct
            .iter()
            .map(|d| DirectRecord {
                m: d.m,
                n: d.n,
                pair: d.pair.to_string(),
                term: d.term.to_decimal_string(),
                z: d.z.to_decimal_string(),
                holds: d.holds,
                lemma_holds: d.lemma_holds,
            })
            .collect(),
        overflow: r.overflow.as_ref().map(Error::to_string),
        verdict: r.verdict,
    }
}

pub fn theorem2_record(pair: &str, d: &Exponent, b_max: u64, r: &Theorem2Report) -> Theorem2Record {
    let rows = r
        .trace
        .rows
        .iter()
        .zip(&r.bounds)
        .map(|(row, b)| Theorem2Row {
            n: row.n,
            value: row.result.as_ref().map(|x| x.value.to_decimal_string()).unwrap_or_default(),
            normalized: row.normalized.as_ref().map(Interval::to_decimal_string).unwrap_or_default(),
            bound: b.bound.to_decimal_string(),
            bound_holds: b.holds,
        })
        .collect();
    let (p, q, rr) = r.fit.witness;
    Theorem2Record {
        schema_version: SCHEMA_VERSION,
        pair: pair.into(),
        s: r.trace.s.to_string(),
        k: r.trace.k.to_string(),
        regime: r.regime.as_str().into(),
        d: d.to_string(),
        b_max,
        c: r.fit.c.to_decimal_string(),
        witness: [p, q, rr],
        rows,
        tail_decreasing: r.tail_decreasing,
        final_value: r.final_value.to_decimal_string(),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("records serialize");
    s.push('\n');
    s
}

fn to_csv<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("rows serialize");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8")
}

/// Successful output: stdout text and exit code.
struct Output {
    stdout: String,
    code: i32,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output { stdout, code: EXIT_OK }
    }
}

fn dispatch(cli: Cli) -> Result<Output, Failure> {
    let cfg = RunConfig::from_args(&cli.run)?;
    let bits = cfg.precision_bits;
    match cli.command {
        Command::TriSeq { pair, depth, input_bits } => {
            let p = parse_pair(&pair, input_bits, bits)?;
            p.check_domain()?;
            let label = pair_label(&p, &pair);
            let record = |digits: Vec<String>, terminated, complete| TriSeqRecord {
                schema_version: SCHEMA_VERSION,
                pair: label.clone(),
                depth,
                digits,
                terminated,
                complete,
            };
            match triangle_sequence(&p, depth) {
                Ok(seq) => Ok(Output::ok(to_json(&record(seq.to_strings(), seq.is_terminated(), true)))),
                Err(Error::PrecisionExhausted { certified, digits }) => {
                    let mut f = Failure::from(Error::PrecisionExhausted {
                        certified,
                        digits: digits.clone(),
                    });
                    f.partial = Some(to_json(&record(digits, false, false)));
                    Err(f)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Partition {
            pair,
            n,
            s,
            k,
            normalization,
            exact,
            input_bits,
        } => {
            let ns = parse_n_range(&n)?;
            check_ceiling(&ns, &cfg)?;
            let p = parse_pair(&pair, input_bits, bits)?;
            let trace = free_energy_trace(&p, &ns, &s, &k, &cfg.partition_config(exact))?;
            let record = partition_record(&pair_label(&p, &pair), &trace, normalization);
            let stdout = match cfg.format.unwrap_or(Format::Csv) {
                Format::Csv => to_csv(&record.rows),
                Format::Json => to_json(&record),
            };
            let code = if trace.all_poles() { EXIT_ALL_POLES } else { EXIT_OK };
            Ok(Output { stdout, code })
        }
        Command::Verify { seed, cases } => {
            let report = run_suite(seed, cases);
            let stdout = match cfg.format {
                Some(Format::Json) => to_json(&report),
                _ => {
                    let mut s = String::new();
                    for c in &report.checks {
                        if c.passed() {
                            s.push_str(&format!("ok    {} ({} cases)\n", c.name, c.cases));
                        } else {
                            s.push_str(&format!("FAIL  {}: {}\n", c.name, c.failures.join("; ")));
                        }
                    }
                    if report.passed() {
                        s.push_str("all invariants passed\n");
                    }
                    s
                }
            };
            let code = if report.passed() { EXIT_OK } else { EXIT_ERROR };
            Ok(Output { stdout, code })
        }
        Command::Construct { digits, refine: extra } => {
            let d = DigitSequence::parse_list(&digits)?;
            let mut enc = pair_from_digits(&d)?;
            if let Some(extra) = extra {
                enc = refine(&enc, &DigitSequence::parse_list(&extra)?)?;
            }
            let point = |p: &crate::linalg::RationalPoint2| [rational_string(&p.u), rational_string(&p.v)];
            let record = ConstructRecord {
                schema_version: SCHEMA_VERSION,
                digits: enc.digits.to_strings(),
                depth: enc.depth,
                vertices: enc.vertices.iter().map(point).collect(),
                representative: point(&enc.representative),
                area: rational_string(&enc.area()),
            };
            let stdout = match cfg.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&record),
                Format::Csv => {
                    #[derive(Serialize)]
                    struct Row<'a> {
                        kind: &'a str,
                        u: &'a str,
                        v: &'a str,
                    }
                    let mut rows: Vec<Row> = record
                        .vertices
                        .iter()
                        .map(|[u, v]| Row { kind: "vertex", u, v })
                        .collect();
                    rows.push(Row {
                        kind: "representative",
                        u: &record.representative[0],
                        v: &record.representative[1],
                    });
                    to_csv(&rows)
                }
            };
            Ok(Output::ok(stdout))
        }
        Command::Theorem1 {
            k,
            f,
            s,
            levels,
            a1,
            bit_budget,
        } => {
            let f: GrowthFn = f.parse()?;
            let mut t = Theorem1Config::new(k, f, levels + 1, a1);
            t.bit_budget = bit_budget;
            let report = theorem1_witness(&t, &s, cfg.n_ceiling.min(20))?;
            Ok(Output::ok(to_json(&theorem1_record(&report))))
        }
        Command::Theorem2 {
            pair,
            s,
            k,
            n,
            d,
            b_max,
            input_bits,
        } => {
            let ns = parse_n_range(&n)?;
            check_ceiling(&ns, &cfg)?;
            let p = parse_pair(&pair, input_bits, bits)?;
            let report = theorem2_experiment(&p, &s, &k, &ns, &d, b_max, &cfg.partition_config(false))?;
            let record = theorem2_record(&pair_label(&p, &pair), &d, b_max, &report);
            let stdout = match cfg.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&record),
                Format::Csv => to_csv(&record.rows),
            };
            Ok(Output::ok(stdout))
        }
        Command::Diophantine {
            pair,
            d,
            b_max,
            input_bits,
        } => {
            let p = parse_pair(&pair, input_bits, bits)?;
            let fit = diophantine_check_with(&p, &d, b_max, cfg.threads)?;
            let (a, b, c) = fit.witness;
            let record = DiophantineRecord {
                schema_version: SCHEMA_VERSION,
                pair: pair_label(&p, &pair),
                d: d.to_string(),
                b_max,
                c: fit.c.to_decimal_string(),
                witness: [a, b, c],
                witness_value: fit.witness_value.to_decimal_string(),
            };
            Ok(Output::ok(to_json(&record)))
        }
    }
}

/// Runs the command line on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli) {
        Ok(o) => {
            let _ = out.write_all(o.stdout.as_bytes());
            o.code
        }
        Err(f) => {
            if let Some(p) = &f.partial {
                let _ = out.write_all(p.as_bytes());
            }
            let _ = writeln!(err, "{}", f.diagnostic);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("tricf").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    fn round_trips<T: Serialize + for<'de> Deserialize<'de>>(text: &str) {
        let parsed: T = serde_json::from_str(text).unwrap();
        assert_eq!(to_json(&parsed), text);
    }

    #[test]
    fn tri_seq_examples() {
        let (code, out, _) = call(&["tri-seq", "--pair", "3/4,1/2", "--depth", "10"]);
        assert_eq!(code, 0);
        let r: TriSeqRecord = serde_json::from_str(&out).unwrap();
        assert_eq!(r.digits, vec!["0", "1"]);
        assert!(r.terminated);
        round_trips::<TriSeqRecord>(&out);

        let (code, out, _) = call(&["tri-seq", "--pair", "cubic-fixed-point", "--depth", "30"]);
        assert_eq!(code, 0);
        let r: TriSeqRecord = serde_json::from_str(&out).unwrap();
        assert_eq!(r.digits, vec!["0"; 30]);

        let (code, out, err) = call(&["tri-seq", "--pair", "2,1"]);
        assert_eq!(code, 2);
        assert!(out.is_empty());
        assert!(err.contains("out_of_domain"));
    }

    #[test]
    fn tri_seq_exhaustion_prints_prefix() {
        let (code, out, err) = call(&["tri-seq", "--pair", "0.6823278,0.4655712", "--input-bits", "24", "--depth", "40"]);
        assert_eq!(code, 3, "{err}");
        let r: TriSeqRecord = serde_json::from_str(&out).unwrap();
        assert!(!r.complete);
        assert!(!r.digits.is_empty() && r.digits.iter().all(|d| d == "0"));
        assert!(err.contains("precision_exhausted"));
        let (code, _, _) = call(&["tri-seq", "--pair", "0.6823278,0.4655712"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn partition_pole_row() {
        let (code, out, _) = call(&["partition", "--pair", "1/2,1/2", "--n", "1..2", "--s", "2"]);
        assert_eq!(code, 0);
        let mut rows = csv::Reader::from_reader(out.as_bytes());
        let rows: Vec<PartitionRow> = rows.deserialize().map(Result::unwrap).collect();
        assert_eq!(rows.len(), 2);
        assert!(rows[1].pole);
        assert!(rows[1].pole_word.as_deref().unwrap().split(';').any(|w| w == "10"));
        let (code, _, _) = call(&["partition", "--pair", "1/2,1/2", "--n", "2", "--s", "2"]);
        assert_eq!(code, 4);
    }

    #[test]
    fn partition_ceiling() {
        let (code, _, err) = call(&["partition", "--pair", "3/4,1/2", "--n", "40"]);
        assert_eq!(code, 5);
        assert!(err.contains("--force"));
        let (code, _, _) = call(&["partition", "--pair", "3/4,1/2", "--n", "40", "--force"]);
        assert_eq!(code, 5);
        let (code, _, _) = call(&["partition", "--pair", "3/4,1/2", "--n", "3", "--n-ceiling", "99"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn partition_json_round_trip() {
        let (code, out, _) = call(&["partition", "--pair", "cubic-fixed-point", "--n", "1..6", "--s", "3", "--k", "2", "--format", "json", "--precision", "128"]);
        assert_eq!(code, 0);
        round_trips::<PartitionRecord>(&out);
        let (_, exact, _) = call(&["partition", "--pair", "3/5,1/4", "--n", "3", "--exact", "--format", "json"]);
        round_trips::<PartitionRecord>(&exact);
        let r: PartitionRecord = serde_json::from_str(&exact).unwrap();
        assert_eq!(r.rows[0].precision_bits, "exact");
    }

    #[test]
    fn construct_output() {
        let (code, out, _) = call(&["construct", "--digits", "0,0,0", "--format", "json"]);
        assert_eq!(code, 0);
        let r: ConstructRecord = serde_json::from_str(&out).unwrap();
        assert_eq!(r.vertices.len(), 3);
        round_trips::<ConstructRecord>(&out);
        let (code, csv, _) = call(&["construct", "--digits", "1,2", "--format", "csv"]);
        assert_eq!(code, 0);
        assert!(csv.starts_with("kind,u,v\n"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn theorem1_output() {
        let (code, out, _) = call(&["theorem1", "--k", "1", "--f", "linear", "--s", "1", "--levels", "2"]);
        assert_eq!(code, 0);
        let r: Theorem1Record = serde_json::from_str(&out).unwrap();
        assert!(r.verdict);
        assert_eq!(r.levels.len(), 2);
        round_trips::<Theorem1Record>(&out);
    }

    #[test]
    fn diophantine_output() {
        let (code, _, err) = call(&["diophantine", "--pair", "1/2,1/3", "--b-max", "5"]);
        assert_eq!(code, 1);
        let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(v["error"], "exact_zero");
        assert_eq!(v["witness"], json!([-1, 2, 0]));
        let (code, out, _) = call(&["diophantine", "--pair", "cubic-fixed-point", "--b-max", "6"]);
        assert_eq!(code, 0);
        round_trips::<DiophantineRecord>(&out);
    }

    #[test]
    fn theorem2_output() {
        let (code, out, err) = call(&["theorem2", "--n", "3..6", "--b-max", "6", "--precision", "128"]);
        assert_eq!(code, 0, "{err}");
        let r: Theorem2Record = serde_json::from_str(&out).unwrap();
        assert_eq!(r.regime, "theorem");
        round_trips::<Theorem2Record>(&out);
        let (_, out, _) = call(&["theorem2", "--n", "3..4", "--s", "2", "--b-max", "3", "--precision", "128"]);
        let r: Theorem2Record = serde_json::from_str(&out).unwrap();
        assert_eq!(r.regime, "exploratory");
    }

    #[test]
    fn verify_runs() {
        let (code, out, _) = call(&["verify", "--seed", "42", "--cases", "8"]);
        assert_eq!(code, 0);
        assert!(out.ends_with("all invariants passed\n"));
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&["partition", "--pair", "1/2"]).0, 2);
        assert_eq!(call(&["nonsense"]).0, 2);
        assert_eq!(call(&["tri-seq", "--pair", "3/4,1/2", "--precision", "32"]).0, 2);
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn n_ranges() {
        assert_eq!(parse_n_range("1..3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_n_range("1..=3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_n_range("4").unwrap(), vec![4]);
        assert_eq!(parse_n_range("2,5").unwrap(), vec![2, 5]);
        assert!(parse_n_range("3..1").is_err());
        assert!(parse_n_range("0").is_err());
    }
}
