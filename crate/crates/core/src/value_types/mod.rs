//! Value type lattice and checker.

mod check;
mod lattice;

pub use check::*;
pub use lattice::*;
