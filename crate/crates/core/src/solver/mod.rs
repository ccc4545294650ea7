//! Coordinator game values by backward induction over simplex grids.

mod grid;
mod lipschitz;
mod rmq;
mod strategy;
mod value;

pub use grid::{grid_point_count, Lookup, SimplexGrid, MAX_GRID_POINTS};
pub use lipschitz::lipschitz_value_constant;
pub use strategy::{
    best_response_policy, greedy_policy, rollout_coordinator, rollout_grid, security_strategies, CoordinationStrategy, Rollout,
};
pub use value::{solve, solve_lower, solve_upper, SolveOptions, ValueGrid, ValueKind, GENERAL_MAX_BINS, GENERAL_MAX_STATES};
