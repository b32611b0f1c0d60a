//! Each chapter of the guide is attached to an empty module so that
//! `cargo test --doc` runs its code blocks against the current library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/triangle-map.md")]
pub mod triangle_map {}
#[doc = include_str!("../../../book/src/convergents.md")]
pub mod convergents {}
#[doc = include_str!("../../../book/src/partition.md")]
pub mod partition {}
#[doc = include_str!("../../../book/src/classify.md")]
pub mod classify {}
#[doc = include_str!("../../../book/src/arithmetic.md")]
pub mod arithmetic {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
