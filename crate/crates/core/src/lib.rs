//! Exact model checking of probabilistic alternating-time temporal logic
//! (PATL) over stochastic concurrent game structures with imperfect
//! information, for coalitions playing uniform memoryless deterministic
//! strategies.

pub mod checker;
pub mod election;
pub mod error;
pub mod logic;
pub mod mdp;
pub mod model;
pub mod oracle;
pub mod rational;
pub mod strategy;

pub use error::ModelError;
pub use model::Cgs;
pub use rational::Rational;
