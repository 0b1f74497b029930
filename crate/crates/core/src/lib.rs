//! Constrained Bayesian optimization with a tiered acquisition ensemble.
//!
//! The outer loop ([`engine`]) fits one Gaussian process per output ([`gp`]),
//! scores candidates with a two-tier vector of acquisition functions
//! ([`acquisition`]), ranks them with a lexicographic pair of Pareto ranks
//! ([`dominance`]) and evolves the candidate set with a particle swarm
//! ([`inner_opt`]). [`bench`] holds the analytic test problems and the
//! brute-force oracles used to check all of the above.

pub mod acquisition;
pub mod bench;
pub mod dominance;
pub mod engine;
pub mod error;
pub mod gp;
pub mod inner_opt;
pub mod problem;

pub use error::{Error, Result};
