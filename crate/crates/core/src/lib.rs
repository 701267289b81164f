#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod fields;
pub mod fluxes;
pub mod forms;
pub mod mesh;
pub mod operators;
pub mod quadrature;
pub mod timestepping;
#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use mesh::Mesh;
