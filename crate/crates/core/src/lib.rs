//! Global-local mixing for skew products `F(x, r) = (σx, r + f(x))` over
//! one-sided subshifts of finite type with real fibers.

// `!(x < y)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod correlate;
pub mod error;
pub mod gibbs;
pub mod numerics;
pub mod observables;
pub mod skewprod;
pub mod symbolic;
pub mod systems;
pub mod twisted;

pub use error::{Error, Result};
