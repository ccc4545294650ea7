use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::model::{GameModel, Team};
use crate::policy::LocalPolicy;

/// Row-stochastic transition matrix of a typical agent under a local policy.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    entries: Vec<f64>,
    pub team: Team,
    pub t: usize,
    pub mu: Distribution,
    pub nu: Distribution,
    pub policy: LocalPolicy,
}

impl TransitionMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.entries[p * self.n + q]
    }

    pub fn row(&self, p: usize) -> &[f64] {
        &self.entries[p * self.n..(p + 1) * self.n]
    }

    /// Row vector times matrix.
    pub fn apply(&self, dist: &Distribution) -> Result<Distribution> {
        if dist.len() != self.n {
            return Err(Error::invalid("distribution and matrix dimensions differ"));
        }
        let mut out = vec![0.0; self.n];
        for p in 0..self.n {
            let w = dist[p];
            if w != 0.0 {
                for (o, e) in out.iter_mut().zip(self.row(p)) {
                    *o += w * e;
                }
            }
        }
        Distribution::from_drifted(out)
    }
}

fn check_inputs(model: &GameModel, team: Team, t: usize, mu: &Distribution, nu: &Distribution, policy: &LocalPolicy) -> Result<()> {
    if t >= model.horizon() {
        return Err(Error::invalid(format!("t={t} must be below horizon {}", model.horizon())));
    }
    let s = model.sizes();
    if mu.len() != s.blue_states || nu.len() != s.red_states {
        return Err(Error::invalid("mean-field dimensions do not match the model"));
    }
    if policy.num_states() != model.num_states(team) || policy.num_actions() != model.num_actions(team) {
        return Err(Error::invalid(format!(
            "{team} policy shape {}x{} does not match model {}x{}",
            policy.num_states(),
            policy.num_actions(),
            model.num_states(team),
            model.num_actions(team)
        )));
    }
    Ok(())
}

/// `entries[p][q] = sum_a kernel(q | p, a, mu, nu) * policy(a | p)`.
pub fn build_matrix(
    model: &GameModel,
    team: Team,
    t: usize,
    mu: &Distribution,
    nu: &Distribution,
    policy: &LocalPolicy,
) -> Result<TransitionMatrix> {
    check_inputs(model, team, t, mu, nu, policy)?;
    let n = model.num_states(team);
    let mut entries = vec![0.0; n * n];
    let mut row = vec![0.0; n];
    for p in 0..n {
        for a in 0..model.num_actions(team) {
            let w = policy.prob(p, a);
            if w == 0.0 {
                continue;
            }
            model.kernel_row(team, t, p, a, mu.as_slice(), nu.as_slice(), &mut row);
            for (e, r) in entries[p * n..(p + 1) * n].iter_mut().zip(&row) {
                *e += w * r;
            }
        }
        let sum: f64 = entries[p * n..(p + 1) * n].iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::model(format!("{team} transition matrix row {p} sums to {sum}")));
        }
    }
    Ok(TransitionMatrix {
        n,
        entries,
        team,
        t,
        mu: mu.clone(),
        nu: nu.clone(),
        policy: policy.clone(),
    })
}

pub fn build_blue_matrix(model: &GameModel, t: usize, mu: &Distribution, nu: &Distribution, pi: &LocalPolicy) -> Result<TransitionMatrix> {
    build_matrix(model, Team::Blue, t, mu, nu, pi)
}

pub fn build_red_matrix(model: &GameModel, t: usize, mu: &Distribution, nu: &Distribution, sigma: &LocalPolicy) -> Result<TransitionMatrix> {
    build_matrix(model, Team::Red, t, mu, nu, sigma)
}

/// One deterministic mean-field step of `team` under a local policy.
pub fn mf_step(
    model: &GameModel,
    team: Team,
    t: usize,
    mu: &Distribution,
    nu: &Distribution,
    policy: &LocalPolicy,
) -> Result<Distribution> {
    let own = match team {
        Team::Blue => mu,
        Team::Red => nu,
    };
    build_matrix(model, team, t, mu, nu, policy)?.apply(own)
}

pub fn mf_step_blue(model: &GameModel, t: usize, mu: &Distribution, nu: &Distribution, pi: &LocalPolicy) -> Result<Distribution> {
    mf_step(model, Team::Blue, t, mu, nu, pi)
}

pub fn mf_step_red(model: &GameModel, t: usize, mu: &Distribution, nu: &Distribution, sigma: &LocalPolicy) -> Result<Distribution> {
    mf_step(model, Team::Red, t, mu, nu, sigma)
}
