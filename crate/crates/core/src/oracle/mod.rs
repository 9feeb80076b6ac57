//! Reference machinery kept separate from the checker: induced Markov
//! chains, exhaustive strategy and policy enumeration, a classical
//! qualitative evaluator, Monte Carlo sampling and random instances.
//!
//! The brute-force adversary ranges over memoryless deterministic policies,
//! which is the same MDP fact the checker relies on. Agreement between the
//! two shows the implementations match, not that the reduction is sound.

mod atl;
mod brute;
mod chain;
mod monte_carlo;
mod profile;
pub mod random;

use thiserror::Error;

use crate::logic::FragmentError;

pub use atl::atl_ir_check;
pub use brute::{brute_force_check, DEFAULT_LIMIT};
pub use chain::{
    chain_next_probability, chain_regions, chain_until_probability, induced_chain, ChainRegions, MarkovChain, Profile,
};
pub use monte_carlo::{monte_carlo_estimate, sample_chain, wilson_interval, PathGoal, SampleEstimate, SampleOptions};
pub use profile::{parse_profile, profile_from_raw, RawChoice, RawProfile};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Fragment(#[from] FragmentError),
    #[error("unknown name `{0}` in formula")]
    Binding(String),
    #[error("brute force needs {combinations} strategy/policy combinations, above the limit of {limit}")]
    TooLarge { combinations: String, limit: u64 },
    #[error("profile is not memoryless: {0}")]
    NotMemoryless(String),
    #[error("invalid profile: {0}")]
    Profile(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}
