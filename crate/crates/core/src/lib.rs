//! Evolutionary multi-party multi-objective optimization.

pub mod harness;
pub mod instances;
pub mod oracles;
pub mod pareto;
pub mod pseudoboolean;
pub mod shortestpath;
