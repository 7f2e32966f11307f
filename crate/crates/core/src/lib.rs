//! Synthesis of Mealy machines from LTL or universal co-Büchi specifications
//! and example traces.
//!
//! The pipeline: an LTL formula ([`logic`]) is translated into a universal
//! co-Büchi automaton ([`automata`]); bounding the number of visits to its
//! counted states yields a safety game over counting functions
//! ([`counting`], [`games`]). User examples are folded into a prefix-tree
//! machine and generalized by realizability-preserving state merging, then
//! completed into a full Mealy machine ([`machines`], [`realize`], [`synth`]).

pub mod automata;
pub mod cli;
pub mod counting;
pub mod games;
pub mod logic;
pub mod machines;
pub mod realize;
pub mod synth;
