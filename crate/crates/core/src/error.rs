use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("lead coordinate is zero")]
    ZeroLeadCoordinate,

    #[error("triangle sequence terminated after {step} digits")]
    Terminated { step: usize },

    #[error("pair lies outside the triangle 1 >= alpha >= beta >= 0")]
    OutOfDomain,

    #[error("precision exhausted after {certified} certified digits")]
    PrecisionExhausted {
        certified: usize,
        /// The certified prefix, as decimal strings.
        digits: Vec<String>,
    },

    #[error("x coordinate at level {level} is zero")]
    ZeroX { level: isize },

    #[error("pole: denominator vanishes for word {} (N = {n})", words.join(", "))]
    Pole {
        n: usize,
        /// Offending words in enumeration order, possibly truncated.
        words: Vec<String>,
    },

    #[error("exact zero: {p} + {q}*alpha + {r}*beta = 0")]
    ExactZero { p: i64, q: i64, r: i64 },

    #[error("next digit needs about {needed_bits} bits, over the budget of {budget_bits}; {achieved} digits generated")]
    DepthOverflow {
        achieved: usize,
        needed_bits: String,
        budget_bits: u64,
    },

    #[error("degenerate triangle: {0}")]
    DegenerateTriangle(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
