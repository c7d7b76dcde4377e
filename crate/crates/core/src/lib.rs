//! Minimum Empirical Divergence (MED) bandit toolkit.
//!
//! * [`dmin`]: the KL-divergence dual solver behind the MED index.
//! * [`policy`]: ideal and cached MED, plus UCB1 / UCB-tuned / UCB2 baselines.
//! * [`sim`]: replicated episodes, regret and the asymptotic bound curve.
//! * [`config`] and [`experiment`]: the configuration-driven runner used by the
//!   `med` binary.

pub mod config;
pub mod dist;
pub mod dmin;
pub mod error;
pub mod experiment;
pub mod policy;
pub mod presets;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
