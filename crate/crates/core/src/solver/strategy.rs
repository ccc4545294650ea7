//! Coordination strategies derived from solved value grids, and
//! deterministic rollouts of the coordinator game.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use super::value::{candidates, ValueGrid, ValueKind};
use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::meanfield::{extract_nearest_policy, extract_policy, mf_step};
use crate::model::{GameModel, Team};
use crate::policy::LocalPolicy;

type PolicyFn = dyn Fn(usize, &Distribution, &Distribution) -> Result<LocalPolicy> + Send + Sync;

enum Source {
    /// Follow the recorded successors of a solved grid.
    Grid(Arc<ValueGrid>),
    /// Best-respond on a solved grid to the opponent's announced move.
    BestResponse {
        grid: Arc<ValueGrid>,
        opponent: Arc<CoordinationStrategy>,
    },
    Custom(Box<PolicyFn>),
}

type CacheKey = (usize, Vec<u64>, Vec<u64>);

/// A team coordinator: maps `(t, mu, nu)` to a local policy.
pub struct CoordinationStrategy {
    team: Team,
    model: GameModel,
    source: Source,
    cache: Mutex<HashMap<CacheKey, LocalPolicy>>,
}

impl fmt::Debug for CoordinationStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.source {
            Source::Grid(g) => format!("grid({})", g.kind()),
            Source::BestResponse { .. } => "best-response".to_string(),
            Source::Custom(_) => "custom".to_string(),
        };
        write!(f, "CoordinationStrategy({}, {kind})", self.team)
    }
}

fn bits(d: &Distribution) -> Vec<u64> {
    d.as_slice().iter().map(|x| x.to_bits()).collect()
}

impl CoordinationStrategy {
    fn with_source(model: &GameModel, team: Team, source: Source) -> Self {
        CoordinationStrategy {
            team,
            model: model.clone(),
            source,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn from_grid(model: &GameModel, grid: Arc<ValueGrid>, team: Team) -> Self {
        Self::with_source(model, team, Source::Grid(grid))
    }

    /// At every step, plays the best successor on `grid` against the move
    /// `opponent` makes from the current mean-fields.
    pub fn best_response(model: &GameModel, grid: Arc<ValueGrid>, team: Team, opponent: Arc<CoordinationStrategy>) -> Self {
        Self::with_source(model, team, Source::BestResponse { grid, opponent })
    }

    pub fn from_fn(
        model: &GameModel,
        team: Team,
        f: impl Fn(usize, &Distribution, &Distribution) -> Result<LocalPolicy> + Send + Sync + 'static,
    ) -> Self {
        Self::with_source(model, team, Source::Custom(Box::new(f)))
    }

    /// The same local policy at every step.
    pub fn constant(model: &GameModel, team: Team, policy: LocalPolicy) -> Self {
        Self::from_fn(model, team, move |_, _, _| Ok(policy.clone()))
    }

    pub fn team(&self) -> Team {
        self.team
    }

    pub fn model(&self) -> &GameModel {
        &self.model
    }

    /// Local policy prescribed at `(t, mu, nu)`.
    pub fn policy(&self, t: usize, mu: &Distribution, nu: &Distribution) -> Result<LocalPolicy> {
        if let Source::Custom(f) = &self.source {
            return f(t, mu, nu);
        }
        let key = (t, bits(mu), bits(nu));
        if let Some(p) = self.cache.lock().unwrap().get(&key) {
            return Ok(p.clone());
        }
        let policy = match &self.source {
            Source::Grid(grid) => greedy_policy(grid, &self.model, self.team, t, mu, nu)?.0,
            Source::BestResponse { grid, opponent } => {
                let theirs = opponent.policy(t, mu, nu)?;
                let their_next = mf_step(&self.model, opponent.team, t, mu, nu, &theirs)?;
                best_response_policy(grid, &self.model, self.team, t, mu, nu, &their_next)?.0
            }
            Source::Custom(_) => unreachable!(),
        };
        self.cache.lock().unwrap().insert(key, policy.clone());
        Ok(policy)
    }
}

fn extract_or_nearest(
    model: &GameModel,
    team: Team,
    t: usize,
    mu: &Distribution,
    nu: &Distribution,
    target: &Distribution,
) -> Result<(LocalPolicy, Distribution)> {
    match extract_policy(model, t, mu, nu, target, team) {
        Ok(p) => Ok((p, target.clone())),
        Err(Error::Reachability { residual }) => {
            let (p, reached, gap) = extract_nearest_policy(model, t, mu, nu, target, team)?;
            log::warn!(
                "{team} successor {:?} at t={t} is outside the reachable set (residual {residual:.2e}); \
                 using nearest reachable point at distance {gap:.2e}",
                target.as_slice()
            );
            Ok((p, reached))
        }
        Err(e) => Err(e),
    }
}

/// Local policy steering `team` from `(mu, nu)` to the successor recorded
/// on the grid at the snapped point, and the successor mean-field actually
/// reached (the recorded one unless it had to be projected onto the
/// reachable set).
pub fn greedy_policy(
    grid: &ValueGrid,
    model: &GameModel,
    team: Team,
    t: usize,
    mu: &Distribution,
    nu: &Distribution,
) -> Result<(LocalPolicy, Distribution)> {
    let (blue_next, red_next) = grid.successor(t, mu, nu)?;
    let target = match team {
        Team::Blue => blue_next,
        Team::Red => red_next,
    };
    extract_or_nearest(model, team, t, mu, nu, &target)
}

/// Best own successor on the grid against a known opponent move.
pub fn best_response_policy(
    grid: &ValueGrid,
    model: &GameModel,
    team: Team,
    t: usize,
    mu: &Distribution,
    nu: &Distribution,
    opponent_next: &Distribution,
) -> Result<(LocalPolicy, Distribution)> {
    if t >= grid.horizon() {
        return Err(Error::invalid(format!("no move at t={t} with horizon {}", grid.horizon())));
    }
    let own_grid = grid.grid(team);
    let cands = candidates(model, own_grid, team, t, mu.as_slice(), nu.as_slice(), grid.membership_tol())?.ok_or_else(|| {
        Error::DegenerateGrid {
            t,
            message: format!("no {team} grid point within the reachable set"),
        }
    })?;
    let opp_index = grid.grid(team.opponent()).nearest_index(opponent_next.as_slice())?;
    let mut best: Option<(f64, usize)> = None;
    for c in cands.iter() {
        let v = match team {
            Team::Blue => grid.value_at_index(t + 1, c, opp_index),
            Team::Red => grid.value_at_index(t + 1, opp_index, c),
        };
        let better = match best {
            None => true,
            Some((b, _)) => match team {
                Team::Blue => v > b,
                Team::Red => v < b,
            },
        };
        if better {
            best = Some((v, c));
        }
    }
    let (_, idx) = best.expect("non-empty candidates");
    extract_or_nearest(model, team, t, mu, nu, &own_grid.point(idx))
}

/// Deterministic trajectory of the coordinator game.
#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub mu: Vec<Distribution>,
    pub nu: Vec<Distribution>,
    pub rewards: Vec<f64>,
    pub total: f64,
}

pub fn rollout_coordinator(
    model: &GameModel,
    blue: &CoordinationStrategy,
    red: &CoordinationStrategy,
    mu0: &Distribution,
    nu0: &Distribution,
) -> Result<Rollout> {
    if blue.team() != Team::Blue || red.team() != Team::Red {
        return Err(Error::invalid("rollout needs a Blue and a Red coordinator"));
    }
    let horizon = model.horizon();
    let mut mu = vec![mu0.clone()];
    let mut nu = vec![nu0.clone()];
    let mut rewards = Vec::with_capacity(horizon + 1);
    for t in 0..horizon {
        let (m, n) = (&mu[t], &nu[t]);
        rewards.push(model.eval_reward(t, m, n)?);
        let pi = blue.policy(t, m, n)?;
        let sigma = red.policy(t, m, n)?;
        let m2 = mf_step(model, Team::Blue, t, m, n, &pi)?;
        let n2 = mf_step(model, Team::Red, t, m, n, &sigma)?;
        mu.push(m2);
        nu.push(n2);
    }
    rewards.push(model.eval_reward(horizon, &mu[horizon], &nu[horizon])?);
    let total = rewards.iter().sum();
    Ok(Rollout { mu, nu, rewards, total })
}

/// Rollout where both teams follow the recorded successors of one grid.
pub fn rollout_grid(model: &GameModel, grid: Arc<ValueGrid>, mu0: &Distribution, nu0: &Distribution) -> Result<Rollout> {
    let blue = CoordinationStrategy::from_grid(model, grid.clone(), Team::Blue);
    let red = CoordinationStrategy::from_grid(model, grid, Team::Red);
    rollout_coordinator(model, &blue, &red, mu0, nu0)
}

/// Security strategies: Blue from the lower grid, Red from the upper grid.
pub fn security_strategies(
    model: &GameModel,
    lower: Arc<ValueGrid>,
    upper: Arc<ValueGrid>,
) -> Result<(CoordinationStrategy, CoordinationStrategy)> {
    if lower.kind() != ValueKind::Lower || upper.kind() != ValueKind::Upper {
        return Err(Error::invalid("security strategies need a lower and an upper grid"));
    }
    Ok((
        CoordinationStrategy::from_grid(model, lower, Team::Blue),
        CoordinationStrategy::from_grid(model, upper, Team::Red),
    ))
}
