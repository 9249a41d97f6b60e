#![no_std]
// Index loops read best in the small fixed-size kernels; `!(x <= tol)` is
// kept on purpose so NaN fails the check.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod bell;
pub mod error;
pub mod explore;
pub mod geometry;
pub mod numerics;
pub mod rng;
pub mod states;
pub mod tradeoff;

pub use error::{Error, Result};
