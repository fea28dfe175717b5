// Negated comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod manifest;
pub mod output;
pub mod plot;
pub mod problem;
pub mod run;
pub mod sweep;
pub mod verify;
pub mod window;
