//! Solver, certifier and simulator for repeated-until-collision (RUC) matrix games.
//!
//! Two players repeatedly pick actions from `0..n`; the max player scores `A[i, j]`,
//! the min player pays `B[i, j]`, and the game stops once the actions collide (`i == j`).
//! Stationary equilibria come from Perron vectors of the payoff matrices.

pub mod analytics;
pub mod error;
pub mod handcricket;
pub mod instances;
pub mod linalg;
pub mod par;
pub mod report;
pub mod simulator;
pub mod solver;

pub use error::{Error, Result};
