//! Numerical laboratory for the TASEP transition between the Airy₂ and
//! Airy₁ processes: kernels, Fredholm determinants, simulation and scaling.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fredholm;
pub mod kernels;
pub mod par;
pub mod scaling;
pub mod sim;
pub mod special;
pub mod stats;
pub mod validation;

pub use error::{Error, Result};
pub use par::Execution;
