//! Specification source text to surface syntax and back.

pub mod lexer;
mod parse;
mod print;
pub mod surface;

pub use parse::{parse, parse_expr};
pub use print::{print_expr, print_spec, print_type, quote};
