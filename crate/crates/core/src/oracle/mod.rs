//! Independent checks for the exact machinery: each oracle recomputes a
//! quantity by a different route.

mod brute;
mod chain;
mod paths;
mod sim;

pub use brute::{brute_force_truncated_interior, interior_cells, BruteForceResult, DEFAULT_BUDGET};
pub use chain::{absorbing_chain_solve, ChainSolution};
pub use paths::{enumerate_paths_profile, MAX_ENUMERATION_DEPTH};
pub use sim::{simulate, SimConfig, SimOutcome};
