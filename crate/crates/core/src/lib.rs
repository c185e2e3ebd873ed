pub mod classify;
pub mod cli;
pub mod freeness;
mod json;
pub mod lattice;
pub mod polytope;
pub mod weights;
