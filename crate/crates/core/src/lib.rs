//! A machine-model workbench around the MRAM: a random-access machine
//! with unbounded cells and unit-cost multiplication.
//!
//! The pieces, bottom up:
//!
//! - [`word`]: unbounded non-negative integers and the bit-pattern
//!   builders (replicate, block masks, digit masks).
//! - [`isa`] / [`vm`] / [`asm`]: the instruction set with literal, direct
//!   and indirect operands, a fuel-metered interpreter that accounts every
//!   run under both the unit and the logarithmic cost model, and the
//!   textual `.masm` format.
//! - [`ndtm`]: bounded single-tape nondeterministic Turing machines, their
//!   configuration/index codec, and a brute-force acceptance oracle.
//! - [`confset`]: the reachable configuration set as one giant word,
//!   advanced wholesale by precomputed mask-and-shift rules.
//! - [`transpile`]: compiles (machine, bounds) into an MRAM program that
//!   runs the same set iteration on the vm, in polynomially many unit-cost
//!   instructions even though the set itself is exponentially wide.
//! - [`problems`]: DIMACS CNF satisfiability decided end to end through
//!   the pipeline, and counting sort in linear unit cost via
//!   direct addressing.
//! - [`bench`]: scaling runs, growth classification, CSV/JSON reports.

pub mod asm;
pub mod bench;
pub mod confset;
pub mod isa;
pub mod ndtm;
pub mod problems;
pub mod transpile;
pub mod vm;
pub mod word;

pub use word::Word;
