//! Finite-population episodes and Monte Carlo estimates.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::rng::AgentStreams;
use crate::distribution::{counts_to_distribution, state_counts, tv, Distribution};
use crate::error::{Error, Result};
use crate::meanfield::mf_step;
use crate::model::{GameModel, Team};
use crate::par::{map_range, Execution};
use crate::policy::{AgentPolicy, LocalPolicy, TeamStrategy};
use crate::solver::CoordinationStrategy;

/// Labelled initial states of both teams; team sizes are their lengths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialStates {
    pub blue: Vec<usize>,
    pub red: Vec<usize>,
}

impl InitialStates {
    pub fn new(blue: Vec<usize>, red: Vec<usize>) -> Self {
        InitialStates { blue, red }
    }

    /// Agents laid out state by state according to `counts`.
    pub fn from_counts(blue: &[u32], red: &[u32]) -> Self {
        let expand = |c: &[u32]| c.iter().enumerate().flat_map(|(s, &k)| std::iter::repeat_n(s, k as usize)).collect();
        InitialStates {
            blue: expand(blue),
            red: expand(red),
        }
    }

    /// Agents placed so that their ED is as close as possible to `dist`.
    pub fn from_distribution(mu: &Distribution, n1: usize, nu: &Distribution, n2: usize) -> Self {
        Self::from_counts(&round_counts(mu, n1), &round_counts(nu, n2))
    }

    fn check(&self, model: &GameModel) -> Result<()> {
        let s = model.sizes();
        if self.blue.is_empty() || self.red.is_empty() {
            return Err(Error::invalid("both teams need at least one agent"));
        }
        if self.blue.iter().any(|&x| x >= s.blue_states) || self.red.iter().any(|&y| y >= s.red_states) {
            return Err(Error::invalid("initial state out of range"));
        }
        Ok(())
    }
}

/// Largest-remainder rounding of `n * dist` to integer counts.
pub fn round_counts(dist: &Distribution, n: usize) -> Vec<u32> {
    let scaled: Vec<f64> = dist.as_slice().iter().map(|p| p * n as f64).collect();
    let mut counts: Vec<u32> = scaled.iter().map(|x| x.floor() as u32).collect();
    let mut rest = n as i64 - counts.iter().map(|&c| c as i64).sum::<i64>();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (scaled[a] - scaled[a].floor(), scaled[b] - scaled[b].floor());
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if rest <= 0 {
            break;
        }
        counts[i] += 1;
        rest -= 1;
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeStep {
    pub t: usize,
    pub blue_states: Vec<usize>,
    pub red_states: Vec<usize>,
    pub mu: Distribution,
    pub nu: Distribution,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub seed: u64,
    pub episode: u64,
    pub blue_strategy: String,
    pub red_strategy: String,
    pub steps: Vec<EpisodeStep>,
    pub total: f64,
}

fn checked_action_dist(policy: &dyn AgentPolicy, team: Team, num_actions: usize, t: usize, s: usize, mu: &Distribution, nu: &Distribution) -> Result<Distribution> {
    let d = policy.action_distribution(t, s, mu, nu)?;
    if d.len() != num_actions {
        return Err(Error::model(format!(
            "{team} policy returned {} action probabilities, model has {num_actions} actions",
            d.len()
        )));
    }
    Ok(d)
}

/// Samples next states of one team given the current EDs.
#[allow(clippy::too_many_arguments)]
fn step_team(
    model: &GameModel,
    team: Team,
    strategy: &TeamStrategy,
    t: usize,
    states: &[usize],
    offset: usize,
    mu: &Distribution,
    nu: &Distribution,
    streams: &mut AgentStreams,
) -> Result<Vec<usize>> {
    let ns = model.num_states(team);
    let na = model.num_actions(team);
    let mut row = vec![0.0; ns];
    let mut next = Vec::with_capacity(states.len());
    for (i, &s) in states.iter().enumerate() {
        let (ua, us) = streams.uniforms(t, offset + i);
        let dist = checked_action_dist(strategy.agent(i), team, na, t, s, mu, nu)?;
        let a = dist.sample_with(ua);
        model.kernel_row(team, t, s, a, mu.as_slice(), nu.as_slice(), &mut row);
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-6 || row.iter().any(|p| *p < -1e-9) {
            return Err(Error::model(format!("{team} kernel row at t={t}, state={s}, action={a} is not stochastic: {row:?}")));
        }
        next.push(sample_row(&row, us));
    }
    Ok(next)
}

fn sample_row(row: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left a sliver of mass; take the last state with positive weight
    row.iter().rposition(|&p| p > 0.0).unwrap_or(row.len() - 1)
}

fn eds(model: &GameModel, blue: &[usize], red: &[usize]) -> Result<(Distribution, Distribution)> {
    let s = model.sizes();
    Ok((
        counts_to_distribution(&state_counts(blue, s.blue_states)?)?,
        counts_to_distribution(&state_counts(red, s.red_states)?)?,
    ))
}

/// One finite-population episode. Randomness for agent `k` (Blue agents
/// first, then Red) at time `t` of episode `episode` comes from its own
/// counter-based slot.
pub fn simulate_episode(
    model: &GameModel,
    blue: &TeamStrategy,
    red: &TeamStrategy,
    init: &InitialStates,
    seed: u64,
    episode: u64,
) -> Result<EpisodeLog> {
    init.check(model)?;
    blue.covers(init.blue.len())?;
    red.covers(init.red.len())?;
    let n1 = init.blue.len();
    let mut streams = AgentStreams::new(seed, episode, n1 + init.red.len());
    let mut xs = init.blue.clone();
    let mut ys = init.red.clone();
    let mut steps = Vec::with_capacity(model.horizon() + 1);
    for t in 0..=model.horizon() {
        let (mu, nu) = eds(model, &xs, &ys)?;
        let reward = model.reward_value(t, mu.as_slice(), nu.as_slice());
        let (nx, ny) = if t < model.horizon() {
            (
                step_team(model, Team::Blue, blue, t, &xs, 0, &mu, &nu, &mut streams)?,
                step_team(model, Team::Red, red, t, &ys, n1, &mu, &nu, &mut streams)?,
            )
        } else {
            (Vec::new(), Vec::new())
        };
        steps.push(EpisodeStep {
            t,
            blue_states: std::mem::replace(&mut xs, nx),
            red_states: std::mem::replace(&mut ys, ny),
            mu,
            nu,
            reward,
        });
    }
    let total = steps.iter().map(|s| s.reward).sum();
    Ok(EpisodeLog {
        seed,
        episode,
        blue_strategy: blue.label(),
        red_strategy: red.label(),
        steps,
        total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::invalid("estimate needs at least one sample"));
        }
        let n = xs.len() as f64;
        let x0 = xs[0];
        let shift = xs.iter().map(|x| x - x0).sum::<f64>() / n;
        let mean = x0 + shift;
        let stderr = if xs.len() > 1 {
            let var = xs.iter().map(|x| (x - x0 - shift).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Ok(Estimate {
            mean,
            stderr,
            samples: xs.len(),
        })
    }
}

/// Runs `episodes` episodes, indexed `0..episodes`, and maps each log
/// through `f`; output is in episode order in both execution modes.
#[allow(clippy::too_many_arguments)]
pub fn map_episodes<T: Send>(
    model: &GameModel,
    blue: &TeamStrategy,
    red: &TeamStrategy,
    init: &InitialStates,
    episodes: usize,
    seed: u64,
    exec: Execution,
    f: impl Fn(EpisodeLog) -> T + Send + Sync,
) -> Result<Vec<T>> {
    map_range(exec, episodes, |e| simulate_episode(model, blue, red, init, seed, e as u64).map(&f))
        .into_iter()
        .collect()
}

/// Mean and standard error of the episode total reward.
#[allow(clippy::too_many_arguments)]
pub fn estimate_value(
    model: &GameModel,
    blue: &TeamStrategy,
    red: &TeamStrategy,
    init: &InitialStates,
    episodes: usize,
    seed: u64,
    exec: Execution,
) -> Result<Estimate> {
    if episodes == 0 {
        return Err(Error::invalid("episodes must be at least 1"));
    }
    let totals = map_episodes(model, blue, red, init, episodes, seed, exec, |log| log.total)?;
    Estimate::from_samples(&totals)
}

struct Induced(Arc<CoordinationStrategy>);

impl AgentPolicy for Induced {
    fn action_distribution(&self, t: usize, state: usize, mu: &Distribution, nu: &Distribution) -> Result<Distribution> {
        Ok(self.0.policy(t, mu, nu)?.row(state).clone())
    }

    fn label(&self) -> String {
        format!("coordinator:{}", self.0.team())
    }
}

/// Identical team strategy where every agent applies the coordinator's
/// local policy at the observed EDs.
pub fn induced_identical_strategy(coord: Arc<CoordinationStrategy>) -> TeamStrategy {
    TeamStrategy::Identical(Arc::new(Induced(coord)))
}

/// Average action distribution per state over the agents occupying it;
/// uniform at empty states.
pub fn approx_local_policy(
    strategy: &TeamStrategy,
    t: usize,
    states: &[usize],
    num_states: usize,
    num_actions: usize,
    mu: &Distribution,
    nu: &Distribution,
) -> Result<LocalPolicy> {
    strategy.covers(states.len())?;
    let mut sums = vec![vec![0.0; num_actions]; num_states];
    let mut counts = vec![0usize; num_states];
    for (i, &s) in states.iter().enumerate() {
        if s >= num_states {
            return Err(Error::invalid(format!("state {s} out of range")));
        }
        let d = strategy.agent(i).action_distribution(t, s, mu, nu)?;
        if d.len() != num_actions {
            return Err(Error::invalid("policy action count mismatch"));
        }
        for (acc, p) in sums[s].iter_mut().zip(d.as_slice()) {
            *acc += p;
        }
        counts[s] += 1;
    }
    let rows = sums
        .into_iter()
        .zip(counts)
        .map(|(row, c)| {
            if c == 0 {
                vec![1.0 / num_actions as f64; num_actions]
            } else {
                row.into_iter().map(|v| v / c as f64).collect()
            }
        })
        .collect();
    LocalPolicy::from_rows(rows)
}

/// Mean total-variation gap between sampled next EDs and the one-step
/// mean-field prediction from the current EDs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MfGap {
    pub blue: Estimate,
    pub red: Estimate,
}

/// Samples one transition at time `t` from `init` and compares each team's
/// next ED with the mean-field step under the averaged local policy.
#[allow(clippy::too_many_arguments)]
pub fn measure_mf_gap(
    model: &GameModel,
    blue: &TeamStrategy,
    red: &TeamStrategy,
    init: &InitialStates,
    t: usize,
    episodes: usize,
    seed: u64,
    exec: Execution,
) -> Result<MfGap> {
    init.check(model)?;
    if t >= model.horizon() {
        return Err(Error::invalid(format!("t={t} must be below horizon {}", model.horizon())));
    }
    if episodes == 0 {
        return Err(Error::invalid("episodes must be at least 1"));
    }
    let s = model.sizes();
    let (mu, nu) = eds(model, &init.blue, &init.red)?;
    let pi = approx_local_policy(blue, t, &init.blue, s.blue_states, s.blue_actions, &mu, &nu)?;
    let sigma = approx_local_policy(red, t, &init.red, s.red_states, s.red_actions, &mu, &nu)?;
    let mu_next = mf_step(model, Team::Blue, t, &mu, &nu, &pi)?;
    let nu_next = mf_step(model, Team::Red, t, &mu, &nu, &sigma)?;
    let n1 = init.blue.len();
    let gaps = map_range(exec, episodes, |e| -> Result<(f64, f64)> {
        let mut streams = AgentStreams::new(seed, e as u64, n1 + init.red.len());
        let xs = step_team(model, Team::Blue, blue, t, &init.blue, 0, &mu, &nu, &mut streams)?;
        let ys = step_team(model, Team::Red, red, t, &init.red, n1, &mu, &nu, &mut streams)?;
        let (m, n) = eds(model, &xs, &ys)?;
        Ok((tv(m.as_slice(), mu_next.as_slice()), tv(n.as_slice(), nu_next.as_slice())))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let (b, r): (Vec<f64>, Vec<f64>) = gaps.into_iter().unzip();
    Ok(MfGap {
        blue: Estimate::from_samples(&b)?,
        red: Estimate::from_samples(&r)?,
    })
}

/// Mean total-variation distance between the ED of `n` iid draws from `p`
/// and `p` itself.
pub fn iid_ed_gap(p: &Distribution, n: usize, samples: usize, seed: u64, exec: Execution) -> Result<Estimate> {
    if n == 0 || samples == 0 {
        return Err(Error::invalid("need at least one draw and one sample"));
    }
    let d = map_range(exec, samples, |e| -> Result<f64> {
        let mut streams = AgentStreams::new(seed, e as u64, n);
        let draws: Vec<usize> = (0..n).map(|i| p.sample_with(streams.uniforms(0, i).0)).collect();
        let ed = counts_to_distribution(&state_counts(&draws, p.len())?)?;
        Ok(tv(ed.as_slice(), p.as_slice()))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Estimate::from_samples(&d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{info_counterexample, info_counterexample_policies, two_node};
    use crate::policy::{ConstantPolicy, PurePolicy};

    fn move_all(model: &GameModel) -> TeamStrategy {
        let n = model.sizes().blue_states;
        TeamStrategy::constant(PurePolicy::new(vec![1; n], 2).unwrap().to_local(2))
    }

    fn stay_all(n: usize, na: usize) -> TeamStrategy {
        TeamStrategy::constant(PurePolicy::new(vec![0; n], na).unwrap().to_local(na))
    }

    #[test]
    fn logs_are_consistent_and_reproducible() {
        let f = two_node(0.5, 3).unwrap();
        let init = InitialStates::new(vec![0, 0, 1], vec![0, 1]);
        let blue = move_all(&f.model);
        let red = stay_all(2, 2);
        let a = simulate_episode(&f.model, &blue, &red, &init, 11, 4).unwrap();
        let b = simulate_episode(&f.model, &blue, &red, &init, 11, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.steps.len(), 4);
        for s in &a.steps {
            let (m, n) = eds(&f.model, &s.blue_states, &s.red_states).unwrap();
            assert_eq!(m, s.mu);
            assert_eq!(n, s.nu);
            assert_eq!(s.reward, s.mu[1]);
        }
        assert!((a.total - a.steps.iter().map(|s| s.reward).sum::<f64>()).abs() == 0.0);
    }

    #[test]
    fn deterministic_game_has_zero_stderr() {
        let f = info_counterexample().unwrap();
        let init = InitialStates::new(vec![0, 1, 1], vec![0]);
        let e = estimate_value(&f.model, &stay_all(2, 2), &stay_all(1, 1), &init, 50, 3, Execution::Parallel).unwrap();
        assert_eq!(e.stderr, 0.0);
        assert!((e.mean - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn parallel_and_sequential_estimates_match() {
        let f = two_node(0.5, 2).unwrap();
        let init = InitialStates::new(vec![0, 0], vec![0, 1]);
        let blue = move_all(&f.model);
        let red = TeamStrategy::constant(LocalPolicy::uniform(2, 2));
        let a = estimate_value(&f.model, &blue, &red, &init, 500, 8, Execution::Parallel).unwrap();
        let b = estimate_value(&f.model, &blue, &red, &init, 500, 8, Execution::Sequential).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn counterexample_values_depend_on_labels() {
        let f = info_counterexample().unwrap();
        let [p0, p1] = info_counterexample_policies();
        let strategy = TeamStrategy::per_agent(vec![Arc::new(ConstantPolicy(p0)), Arc::new(ConstantPolicy(p1))]);
        let red = stay_all(1, 1);
        let a = simulate_episode(&f.model, &strategy, &red, &InitialStates::new(vec![0, 1], vec![0]), 0, 0).unwrap();
        let b = simulate_episode(&f.model, &strategy, &red, &InitialStates::new(vec![1, 0], vec![0]), 0, 0).unwrap();
        assert_eq!(a.steps[0].mu, b.steps[0].mu);
        assert_eq!(a.total, 0.0);
        assert_eq!(b.total, 0.5);
    }

    #[test]
    fn approx_policy_averages_agents() {
        let pure = |a: usize| -> Arc<dyn AgentPolicy> { Arc::new(ConstantPolicy(PurePolicy::new(vec![a, a], 2).unwrap().to_local(2))) };
        let s = TeamStrategy::per_agent(vec![pure(0), pure(1)]);
        let mu = Distribution::dirac(2, 0);
        let pi = approx_local_policy(&s, 0, &[0, 0], 2, 2, &mu, &mu).unwrap();
        assert_eq!(pi.row(0).as_slice(), &[0.5, 0.5]);
        assert_eq!(pi.row(1).as_slice(), &[0.5, 0.5]);
        let id = TeamStrategy::constant(LocalPolicy::from_rows(vec![vec![0.2, 0.8], vec![1.0, 0.0]]).unwrap());
        let pi = approx_local_policy(&id, 0, &[0, 0, 0], 2, 2, &mu, &mu).unwrap();
        assert!((pi.prob(0, 1) - 0.8).abs() < 1e-15);
        assert_eq!(pi.row(1).as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn deterministic_transition_has_zero_gap() {
        let f = info_counterexample().unwrap();
        let init = InitialStates::new(vec![0, 0, 1, 1, 1], vec![0]);
        let g = measure_mf_gap(&f.model, &move_all(&f.model), &stay_all(1, 1), &init, 0, 20, 1, Execution::Parallel).unwrap();
        assert_eq!(g.blue.mean, 0.0);
        assert_eq!(g.red.mean, 0.0);
    }

    #[test]
    fn rounding_counts() {
        assert_eq!(round_counts(&Distribution::new(vec![0.6, 0.4]).unwrap(), 5), vec![3, 2]);
        assert_eq!(round_counts(&Distribution::uniform(3), 4), vec![2, 1, 1]);
        let init = InitialStates::from_counts(&[2, 1], &[0, 3]);
        assert_eq!(init.blue, vec![0, 0, 1]);
        assert_eq!(init.red, vec![1, 1, 1]);
    }

    #[test]
    fn sample_row_handles_rounding() {
        assert_eq!(sample_row(&[0.5, 0.5 - 1e-17], 0.999_999_999_999_999_9), 1);
        assert_eq!(sample_row(&[1.0, 0.0], 0.3), 0);
    }
}
