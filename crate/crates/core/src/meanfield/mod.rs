//! Deterministic mean-field dynamics and one-step reachability.

pub mod lp;
mod matrix;
mod pure;
mod reach;

pub use matrix::{build_blue_matrix, build_matrix, build_red_matrix, mf_step, mf_step_blue, mf_step_red, TransitionMatrix};
pub use pure::{enumerate_pure_policies, enumerate_pure_policies_capped, pure_policy_count, DEFAULT_PURE_POLICY_CAP};
pub use reach::{
    extract_nearest_policy, extract_policy, hausdorff_distance, hull_membership, is_exactly_reachable, reachable_set,
    reachable_set_blue, reachable_set_red, Feasibility, FeasibilityResult, ReachableSet, EXTRACTION_TOL,
};
pub(crate) use reach::{first_coordinate_interval, hull_membership_of};
