//! A constraint tableau prover and countermodel finder for Gödel modal
//! logic with involutive negation.

pub mod cli;
pub mod constraints;
pub mod formula;
pub mod fuzz;
pub mod models;
pub mod oracle;
pub mod rational;
pub mod sampling;
pub mod solver;
pub mod tableau;
