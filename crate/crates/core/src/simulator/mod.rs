//! Finite-population simulation, mean-field gap measurements and exact
//! count-based oracles.

mod episode;
mod oracle;
mod rng;
mod sweep;

pub use episode::{
    approx_local_policy, estimate_value, iid_ed_gap, induced_identical_strategy, map_episodes, measure_mf_gap, round_counts, simulate_episode, EpisodeLog,
    EpisodeStep, Estimate, InitialStates, MfGap,
};
pub use oracle::{
    composition_count, compositions, exact_blue_optimum_example2, exact_red_best_response, exact_team_optimum, identical_count_transition, solve_counts,
    BluePlay, CountDistribution, CountPlan, CountPlanFn, CountSolution, JointCountState, OracleOptions,
};
pub use rng::AgentStreams;
pub use sweep::{smallest_population, suboptimality_sweep, SweepConfig, SweepCoordinator, SweepRow};
