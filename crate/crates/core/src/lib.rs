pub mod activation;
pub mod ast;
pub mod bench_gen;
pub mod diagnostic;
pub mod evaluator;
pub mod pacing_types;
pub mod parser;
pub mod pipeline;
pub mod semantic_types;
pub mod time;
pub mod trace_io;
pub mod value_types;
pub mod wellformedness;
