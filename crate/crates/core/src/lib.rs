//! Numerical lab for weighted composition operators `W_{h,φ} f = h·(f∘φ)` on
//! the Hardy space `H²` and the weighted Bergman spaces `A²_α` of the disc.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod functions;
pub mod operators;
pub mod criteria;
pub mod quadrature;
pub mod series;
pub mod spaces;

pub use error::{Error, Result};
pub use series::C64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
