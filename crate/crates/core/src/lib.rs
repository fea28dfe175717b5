// Negated comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod operator;
pub mod paths;
pub mod quad;
pub mod schedule;
pub mod engine;
pub mod filter;
pub mod fit;
pub mod format;
pub mod mmio;

pub use error::{Result, ZenoError};
