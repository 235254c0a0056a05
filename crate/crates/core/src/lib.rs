//! Constraint-class-aware derivative-free optimization.

pub mod blackbox;
pub mod cli;
pub mod evaluator;
pub mod problem;
pub mod sim;
pub mod solver;
pub mod taxonomy;
