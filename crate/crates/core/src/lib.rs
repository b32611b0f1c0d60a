//! Triangle-map continued fractions for pairs `(α, β)` in the triangle
//! `1 >= α >= β > 0`, with the partition sums built from them.
//!
//! The guide under `book/` walks through the concepts. Modules:
//!
//! - [`linalg`]: words in the two generators, integer vectors and matrices.
//! - [`trimap`]: the triangle map and triangle sequences.
//! - [`convergents`]: convergent vectors, errors, cross products, nested triangles.
//! - [`construct`]: pairs with prescribed digits and fast-growing digit sequences.
//! - [`partition`]: the partition sum `Z_N` and free-energy traces.
//! - [`classify`]: Diophantine fits and the divergence/convergence experiments.
//! - [`real`]: exact rationals and certified interval arithmetic.
//! - [`cli`]: the `tricf` command line; [`verify`]: its seeded invariant suite.

pub mod classify;
pub mod cli;
pub mod construct;
pub mod convergents;
pub mod error;
pub mod linalg;
pub mod partition;
pub mod real;
pub mod trimap;
pub mod verify;

pub use error::{Error, Result};
pub use real::{Exponent, Interval, Scalar};
pub use trimap::{triangle_sequence, DigitSequence, PairRepr};
