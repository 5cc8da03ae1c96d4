//! Compiling coroutining control out of pure logic programs.
//!
//! The pipeline: parse a program ([`parser`]), analyse it under an
//! instantiation-based selection policy ([`policy`], [`analysis`]) into a
//! finite state graph, then produce a left-to-right program either by
//! classic resultant synthesis ([`synth`]) or by offline partial deduction
//! ([`pd`]) of a table-driven meta-interpreter ([`metaint`]), and check
//! that both agree ([`compare`]).

pub mod abs;
pub mod analysis;
pub mod builtins;
pub mod compare;
pub mod engine;
pub mod error;
pub mod metaint;
pub mod multi;
pub mod parser;
pub mod pd;
pub mod pipeline;
pub mod policy;
pub mod synth;
pub mod term;

pub use error::{Error, Result};
