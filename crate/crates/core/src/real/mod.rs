//! Certified real arithmetic: dyadic numbers, outward-rounded intervals, and
//! the `Scalar` type that is exact for rational inputs and an enclosure otherwise.

mod dyadic;
mod interval;
mod scalar;

pub use dyadic::{Dyadic, Rounding};
pub use interval::Interval;
pub use scalar::{parse_rational, rational_string, Exponent, Scalar};
