// negated comparisons are deliberate: they reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod exact;
pub mod fem;
pub mod geometry;
pub mod linalg;
pub mod quadrature;
pub mod rational;
pub mod stepper;

pub use error::{Error, Result};
