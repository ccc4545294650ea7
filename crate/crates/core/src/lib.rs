//! Mean-field team games: two large cooperative teams playing a zero-sum
//! game, approximated through their mean-fields.

pub mod distribution;
pub mod error;
pub mod fixtures;
pub mod meanfield;
pub mod model;
pub mod par;
pub mod policy;
pub mod simulator;
pub mod solver;
pub mod verify;

pub use distribution::{counts_to_distribution, empirical_distribution, state_counts, tv_distance, Distribution};
pub use error::{Error, Result};
pub use model::{GameModel, Kernel, LipschitzBundle, RewardFn, Sizes, Team};
pub use par::Execution;
pub use policy::{AgentPolicy, LocalPolicy, PurePolicy, TeamStrategy};
