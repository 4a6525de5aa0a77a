//! Data dependence analysis for a small imperative language.
//!
//! The pipeline: parse source into a [`Program`](ast::Program), classify each
//! instruction's variable accesses, expand loops into per-iteration instances,
//! build the dependence graph, and read flow/anti/output/input dependences and
//! loop parallelizability off the graph. Graph-driven transforms (dead-code
//! elimination, constant propagation, induction-variable detection) and a
//! brute-force oracle for validating the analyzer sit on top.

pub mod analyzer;
pub mod ast;
pub mod cli;
pub mod classifier;
pub mod expand;
pub mod frontend;
pub mod generator;
pub mod graph;
pub mod interp;
pub mod oracle;
pub mod pretty;
pub mod transforms;
