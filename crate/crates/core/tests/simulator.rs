use std::sync::Arc;

use mftg_core::fixtures::{example2, example2_escape_probability, example2_target_policy, two_node};
use mftg_core::simulator::{
    estimate_value, induced_identical_strategy, map_episodes, simulate_episode, EpisodeLog, Estimate, InitialStates,
};
use mftg_core::solver::CoordinationStrategy;
use mftg_core::{Distribution, Execution, LocalPolicy, PurePolicy, Team, TeamStrategy};

fn pure(assign: Vec<usize>) -> TeamStrategy {
    TeamStrategy::constant(PurePolicy::new(assign, 2).unwrap().to_local(2))
}

#[test]
fn two_node_next_ed_distribution() {
    let f = two_node(0.5, 1).unwrap();
    let init = InitialStates::new(vec![0, 0], vec![0, 1]);
    let n = 100_000;
    let first = map_episodes(&f.model, &pure(vec![1, 1]), &pure(vec![0, 0]), &init, n, 42, Execution::Parallel, |log| {
        log.steps[1].mu[1]
    })
    .unwrap();
    let p = 0.625;
    for (share, expected) in [(0.0, (1.0 - p) * (1.0 - p)), (0.5, 2.0 * p * (1.0 - p)), (1.0, p * p)] {
        let freq = first.iter().filter(|&&m| m == share).count() as f64 / n as f64;
        let sigma = (expected * (1.0 - expected) / n as f64).sqrt();
        assert!((freq - expected).abs() <= 3.0 * sigma, "share {share}: {freq} vs {expected}");
    }
    assert!(((1.0f64 - p).powi(2) - 0.14).abs() < 0.005);
    assert!((2.0 * p * (1.0 - p) - 0.47).abs() < 0.005);
    assert!((p * p - 0.39).abs() < 0.005);
}

#[test]
fn two_node_value_matches_exact_arithmetic() {
    let f = two_node(0.5, 1).unwrap();
    let init = InitialStates::new(vec![0, 0], vec![0, 1]);
    let est = estimate_value(&f.model, &pure(vec![1, 1]), &pure(vec![0, 0]), &init, 100_000, 3, Execution::Parallel).unwrap();
    assert!((est.mean - 0.625).abs() <= 3.0 * est.stderr, "{est:?}");
}

#[test]
fn example2_red_transition_probability() {
    let f = example2().unwrap();
    let blue = TeamStrategy::identical(|_t: usize, s: usize, mu: &Distribution, _nu: &Distribution| Ok(example2_target_policy(mu)?.row(s).clone()));
    let red = pure(vec![1, 1]);
    let init = InitialStates::new(vec![0, 0, 0], vec![0, 0, 0, 1, 1]);
    let escapes = map_episodes(&f.model, &blue, &red, &init, 200_000, 11, Execution::Parallel, |log| {
        example2_escape_probability(log.steps[1].mu.as_slice())
    })
    .unwrap();
    let est = Estimate::from_samples(&escapes).unwrap();
    assert!((est.mean - 0.518).abs() <= 0.002, "{est:?}");
}

#[test]
fn induced_strategy_queries_coordinator() {
    let f = example2().unwrap();
    let coord = Arc::new(CoordinationStrategy::from_fn(&f.model, Team::Blue, |_t, mu: &Distribution, _nu: &Distribution| example2_target_policy(mu)));
    let s = induced_identical_strategy(coord);
    assert!(s.is_identical());
    let mu = Distribution::dirac(2, 0);
    let d = s.agent(0).action_distribution(0, 0, &mu, &Distribution::uniform(2)).unwrap();
    assert!((d[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    assert!((d[1] - (1.0 - std::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-12);

    let constant = Arc::new(CoordinationStrategy::constant(&f.model, Team::Blue, LocalPolicy::uniform(2, 2)));
    let s = induced_identical_strategy(constant);
    for mu in [Distribution::dirac(2, 1), Distribution::uniform(2)] {
        assert_eq!(s.agent(3).action_distribution(1, 1, &mu, &mu).unwrap().as_slice(), &[0.5, 0.5]);
    }
}

#[test]
fn deterministic_trajectories_ignore_the_seed() {
    let f = mftg_core::fixtures::info_counterexample().unwrap();
    let init = InitialStates::new(vec![0, 0, 1], vec![0]);
    let blue = TeamStrategy::constant(PurePolicy::new(vec![1, 0], 2).unwrap().to_local(2));
    let red = TeamStrategy::constant(LocalPolicy::uniform(1, 1));
    let a = simulate_episode(&f.model, &blue, &red, &init, 1, 0).unwrap();
    let b = simulate_episode(&f.model, &blue, &red, &init, 999, 5).unwrap();
    assert_eq!(a.steps, b.steps);
}

#[test]
fn episode_logs_round_trip_as_json_lines() {
    let f = two_node(0.5, 2).unwrap();
    let init = InitialStates::new(vec![0, 1], vec![1, 1, 0]);
    let logs = map_episodes(&f.model, &pure(vec![1, 0]), &pure(vec![1, 1]), &init, 5, 8, Execution::Sequential, |l| l).unwrap();
    let text: String = logs.iter().map(|l| serde_json::to_string(l).unwrap() + "\n").collect();
    let back: Vec<EpisodeLog> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(back, logs);
}
