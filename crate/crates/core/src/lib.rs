//! A logical framework whose proofs, formulas and rule applications live in a
//! labeled property graph.
//!
//! Layers, bottom up: [`graphstore`] (embedded property graph with pattern
//! matching and undo), [`formula`] (S-expression formulas interned as graph
//! vertices), [`refspec`] (relative formula references), [`proofgraph`]
//! (proof states), [`engine`] (rule application), [`tactics`] (backtracking
//! search) and [`systems`] (built-in deductive systems).

pub mod engine;
pub mod formula;
pub mod graphstore;
pub mod proofgraph;
pub mod refspec;
pub mod syntax;
pub mod systems;
pub mod tactics;
