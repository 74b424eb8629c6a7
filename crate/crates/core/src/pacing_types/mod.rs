//! Pacing types: when each declaration of a stream is evaluated.

mod infer;
mod lattice;

pub use infer::*;
pub use lattice::*;
