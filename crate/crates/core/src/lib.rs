//! Truncated Fock-space numerics for the Nelson model at fixed total
//! momentum: mode grids, occupation bases, fiber Hamiltonians, and
//! positivity checks on their semigroups.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod basis;
pub mod cli;
pub mod cone;
pub mod error;
pub mod grid;
pub mod ladder;
pub mod nelson;
pub mod operator;
pub mod quadrature;
pub mod split;

pub use error::{Error, Result};
