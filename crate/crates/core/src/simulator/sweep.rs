//! Exploitability of coordinator-induced strategies across population sizes.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::episode::{estimate_value, induced_identical_strategy, round_counts, InitialStates};
use super::oracle::{exact_blue_optimum_example2, exact_red_best_response, exact_team_optimum, BluePlay, CountPlan, JointCountState, OracleOptions};
use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::fixtures::{example2_target_policy, Fixture};
use crate::model::Team;
use crate::policy::{AgentPolicy, TeamStrategy};
use crate::solver::CoordinationStrategy;

/// Blue coordinator whose induced identical strategy is evaluated.
#[derive(Clone)]
pub enum SweepCoordinator {
    /// Closed-form target-hitting policy of `example2`.
    Analytic,
    /// Any coordination strategy, typically read from a solved grid.
    Strategy(Arc<CoordinationStrategy>),
}

#[derive(Clone)]
pub struct SweepConfig {
    pub n_list: Vec<usize>,
    pub nu0: Distribution,
    /// Red team size; the smallest size matching `nu0` when `None`.
    pub n2: Option<usize>,
    /// Monte Carlo episodes per row; 0 evaluates exactly.
    pub episodes: usize,
    pub seed: u64,
    pub coordinator: SweepCoordinator,
    pub oracle: OracleOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n1: usize,
    pub n2: usize,
    pub gap: f64,
    pub stderr: f64,
    pub exact_opt: f64,
    pub coord_value: f64,
}

/// Smallest team size `N` for which `N * dist` is integral.
pub fn smallest_population(dist: &Distribution, max_n: usize) -> Result<usize> {
    (1..=max_n)
        .find(|&n| dist.as_slice().iter().all(|p| ((p * n as f64) - (p * n as f64).round()).abs() < 1e-9))
        .ok_or_else(|| Error::invalid(format!("no team size up to {max_n} represents {:?} exactly", dist.as_slice())))
}

/// Red agent policy playing a count plan of the oracle: an agent at `y`
/// takes action `a` with probability `plan[y][a] / count(y)`.
struct PlanPolicy {
    plans: Arc<BTreeMap<(usize, JointCountState), CountPlan>>,
    n1: usize,
    n2: usize,
}

impl AgentPolicy for PlanPolicy {
    fn action_distribution(&self, t: usize, state: usize, mu: &Distribution, nu: &Distribution) -> Result<Distribution> {
        let key = (t, JointCountState {
            blue_counts: round_counts(mu, self.n1),
            red_counts: round_counts(nu, self.n2),
        });
        let plan = self
            .plans
            .get(&key)
            .ok_or_else(|| Error::model(format!("no Red plan for counts {:?} at t={t}", key.1)))?;
        let row = &plan[state];
        let total: u32 = row.iter().sum();
        if total == 0 {
            return Err(Error::model(format!("Red plan has no agents at state {state}")));
        }
        Distribution::new(row.iter().map(|&k| k as f64 / total as f64).collect())
    }

    fn label(&self) -> String {
        "oracle-plan".into()
    }
}

fn blue_strategy(fixture: &Fixture, coordinator: &SweepCoordinator) -> Result<TeamStrategy> {
    match coordinator {
        SweepCoordinator::Analytic => {
            if fixture.name != "example2" {
                return Err(Error::invalid("the analytic coordinator exists only for example2"));
            }
            Ok(TeamStrategy::identical(|_t: usize, s: usize, mu: &Distribution, _nu: &Distribution| {
                Ok(example2_target_policy(mu)?.row(s).clone())
            }))
        }
        SweepCoordinator::Strategy(c) => {
            if c.team() != Team::Blue {
                return Err(Error::invalid("sweep coordinator must be a Blue strategy"));
            }
            Ok(induced_identical_strategy(c.clone()))
        }
    }
}

/// Gap between the exact finite-population optimum and the value of the
/// coordinator-induced identical Blue strategy against Red's best count
/// plan, for each Blue team size.
pub fn suboptimality_sweep(fixture: &Fixture, cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let model = &fixture.model;
    let n2 = match cfg.n2 {
        Some(n) if n > 0 => n,
        Some(_) => return Err(Error::invalid("n2 must be positive")),
        None => smallest_population(&cfg.nu0, 10_000)?,
    };
    let blue = blue_strategy(fixture, &cfg.coordinator)?;
    let mut rows = Vec::with_capacity(cfg.n_list.len());
    for &n1 in &cfg.n_list {
        if n1 == 0 {
            return Err(Error::invalid("team sizes must be positive"));
        }
        let init = JointCountState::new(round_counts(&fixture.mu0, n1), round_counts(&cfg.nu0, n2))?;
        let exact_opt = if fixture.name == "example2" {
            exact_blue_optimum_example2(n1, &cfg.nu0)?
        } else {
            exact_team_optimum(model, &init, &cfg.oracle)?.value
        };
        let br = exact_red_best_response(model, &BluePlay::Identical(blue.clone()), &init, &cfg.oracle)?;
        let (coord_value, stderr) = if cfg.episodes == 0 {
            (br.value, 0.0)
        } else {
            let red = TeamStrategy::identical(PlanPolicy {
                plans: Arc::new(br.red_plan),
                n1,
                n2,
            });
            let states = InitialStates::from_counts(&init.blue_counts, &init.red_counts);
            let est = estimate_value(model, &blue, &red, &states, cfg.episodes, cfg.seed ^ n1 as u64, cfg.oracle.execution)?;
            (est.mean, est.stderr)
        };
        log::info!("sweep n1={n1} n2={n2}: optimum {exact_opt:.6}, coordinator {coord_value:.6}");
        rows.push(SweepRow {
            n1,
            n2,
            gap: exact_opt - coord_value,
            stderr,
            exact_opt,
            coord_value,
        });
    }
    Ok(rows)
}
