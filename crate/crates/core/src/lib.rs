//! Deterministic linear-sized spectral sparsification.
//!
//! For a connected weighted graph `G` on `n` vertices and any `d > 1`,
//! [`sparsify_graph`] returns a reweighted subgraph `H` with at most
//! `⌈d(n−1)⌉` edges such that
//!
//! ```text
//! xᵀL_G x ≤ xᵀL_H x ≤ κ · xᵀL_G x   for all x,   κ ≤ (d+1+2√d)/(d+1−2√d).
//! ```
//!
//! The work happens in [`select`], a barrier-potential greedy loop over an
//! isotropic vector family; [`sparsify`] reduces a graph to such a family and
//! [`verify`] measures the result independently.

// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod exec;
pub mod graph;
pub mod matrix;
pub mod select;
pub mod sparsify;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
pub use graph::{parse_graph, WeightedGraph};
pub use matrix::{eigh, SymmetricMatrix};
pub use select::{sparsify_vectors, BarrierParams, Preset, SelectionOptions, VectorFamily};
pub use sparsify::{edge_vectors, sparsify_graph, sparsify_per_component, SparsifierResult};
pub use verify::{approximation_ratio, degree_lower_bound, effective_resistance, mixing_check};
