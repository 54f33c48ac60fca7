// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// tensor code reads best with explicit indices
#![allow(clippy::needless_range_loop)]

//! Numerical laboratory for non-linear vacuum electrodynamics coupled to
//! relativistic fluids.

pub mod cli;
pub mod error;
pub mod exact;
pub mod fluid;
pub mod forms;
pub mod nled;
pub mod solver;

pub use error::{NledError, Result};
