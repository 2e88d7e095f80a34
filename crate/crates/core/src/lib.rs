//! Discounted-time machine games.
//!
//! Strategies are step-metered programs; a player's payoff is scaled by
//! `(1 - rate)^t` where `t` is its own computation time. The crate provides
//! the metered VM, payoff estimation, the concrete Factoring and Largest
//! Integer constructions, a bimatrix equilibrium solver and tools for
//! checking equilibrium notions along sweeps of vanishing discount rates.

pub mod discount;
pub mod error;
pub mod experiment;
pub mod factoring;
pub mod limit;
pub mod game;
pub mod numeric;
pub mod numtheory;
pub mod par;
pub mod solver;
pub mod strategy;
pub mod vm;

pub use error::{Error, Result};
