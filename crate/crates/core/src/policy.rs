use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::distribution::Distribution;
use crate::error::{Error, Result};

/// Per-state action distributions, open-loop in the mean-fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalPolicy {
    rows: Vec<Distribution>,
}

impl LocalPolicy {
    pub fn new(rows: Vec<Distribution>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::invalid("local policy needs at least one state"));
        };
        let n = first.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("local policy rows have different action counts"));
        }
        Ok(LocalPolicy { rows })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows.into_iter().map(Distribution::new).collect::<Result<_>>()?)
    }

    pub fn uniform(num_states: usize, num_actions: usize) -> Self {
        LocalPolicy {
            rows: vec![Distribution::uniform(num_actions); num_states],
        }
    }

    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    pub fn num_actions(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, state: usize) -> &Distribution {
        &self.rows[state]
    }

    pub fn rows(&self) -> &[Distribution] {
        &self.rows
    }

    pub fn prob(&self, state: usize, action: usize) -> f64 {
        self.rows[state][action]
    }

    /// Convex combination of policies with the given weights.
    pub fn mixture(policies: &[LocalPolicy], weights: &[f64]) -> Result<LocalPolicy> {
        if policies.is_empty() || policies.len() != weights.len() {
            return Err(Error::invalid("mixture needs one weight per policy"));
        }
        let (ns, na) = (policies[0].num_states(), policies[0].num_actions());
        let mut rows = vec![vec![0.0; na]; ns];
        for (p, &w) in policies.iter().zip(weights) {
            if p.num_states() != ns || p.num_actions() != na {
                return Err(Error::invalid("mixture of policies with different shapes"));
            }
            for (s, row) in rows.iter_mut().enumerate() {
                for (a, v) in row.iter_mut().enumerate() {
                    *v += w * p.prob(s, a);
                }
            }
        }
        LocalPolicy::from_rows(rows)
    }
}

/// Deterministic state-to-action assignment.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PurePolicy {
    assignment: Vec<usize>,
}

impl PurePolicy {
    pub fn new(assignment: Vec<usize>, num_actions: usize) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::invalid("pure policy must cover at least one state"));
        }
        if let Some(a) = assignment.iter().find(|&&a| a >= num_actions) {
            return Err(Error::invalid(format!("action {a} out of range for {num_actions} actions")));
        }
        Ok(PurePolicy { assignment })
    }

    pub fn action(&self, state: usize) -> usize {
        self.assignment[state]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn to_local(&self, num_actions: usize) -> LocalPolicy {
        LocalPolicy {
            rows: self
                .assignment
                .iter()
                .map(|&a| Distribution::dirac(num_actions, a))
                .collect(),
        }
    }
}

/// Feedback policy of a single agent: `(t, own state, mu, nu) -> action distribution`.
pub trait AgentPolicy: Send + Sync {
    fn action_distribution(&self, t: usize, state: usize, mu: &Distribution, nu: &Distribution) -> Result<Distribution>;

    /// Short label used in logs.
    fn label(&self) -> String {
        "custom".to_string()
    }
}

impl<F> AgentPolicy for F
where
    F: Fn(usize, usize, &Distribution, &Distribution) -> Result<Distribution> + Send + Sync,
{
    fn action_distribution(&self, t: usize, state: usize, mu: &Distribution, nu: &Distribution) -> Result<Distribution> {
        self(t, state, mu, nu)
    }
}

/// The same local policy at every time and mean-field.
#[derive(Debug, Clone)]
pub struct ConstantPolicy(pub LocalPolicy);

impl AgentPolicy for ConstantPolicy {
    fn action_distribution(&self, _t: usize, state: usize, _mu: &Distribution, _nu: &Distribution) -> Result<Distribution> {
        Ok(self.0.row(state).clone())
    }

    fn label(&self) -> String {
        "constant".to_string()
    }
}

/// One local policy per timestep, ignoring the mean-fields.
#[derive(Debug, Clone)]
pub struct TimeVaryingPolicy(pub Vec<LocalPolicy>);

impl AgentPolicy for TimeVaryingPolicy {
    fn action_distribution(&self, t: usize, state: usize, _mu: &Distribution, _nu: &Distribution) -> Result<Distribution> {
        Ok(self.0[t.min(self.0.len() - 1)].row(state).clone())
    }

    fn label(&self) -> String {
        "time-varying".to_string()
    }
}

/// Strategies of every agent in a team.
#[derive(Clone)]
pub enum TeamStrategy {
    /// All agents share one evaluator.
    Identical(Arc<dyn AgentPolicy>),
    /// Agent `i` uses evaluator `i`.
    PerAgent(Vec<Arc<dyn AgentPolicy>>),
}

impl fmt::Debug for TeamStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TeamStrategy::Identical(_) => write!(f, "TeamStrategy::Identical"),
            TeamStrategy::PerAgent(v) => write!(f, "TeamStrategy::PerAgent({} agents)", v.len()),
        }
    }
}

impl TeamStrategy {
    pub fn identical(policy: impl AgentPolicy + 'static) -> Self {
        TeamStrategy::Identical(Arc::new(policy))
    }

    pub fn constant(policy: LocalPolicy) -> Self {
        Self::identical(ConstantPolicy(policy))
    }

    pub fn per_agent(policies: Vec<Arc<dyn AgentPolicy>>) -> Self {
        TeamStrategy::PerAgent(policies)
    }

    pub fn is_identical(&self) -> bool {
        matches!(self, TeamStrategy::Identical(_))
    }

    /// Evaluator used by agent `i`.
    pub fn agent(&self, i: usize) -> &dyn AgentPolicy {
        match self {
            TeamStrategy::Identical(p) => p.as_ref(),
            TeamStrategy::PerAgent(v) => v[i].as_ref(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            TeamStrategy::Identical(p) => format!("identical:{}", p.label()),
            TeamStrategy::PerAgent(v) => format!("per-agent:{}", v.len()),
        }
    }

    /// Checks that every agent of a team of size `n` has a policy.
    pub fn covers(&self, n: usize) -> Result<()> {
        match self {
            TeamStrategy::PerAgent(v) if v.len() != n => Err(Error::invalid(format!(
                "team strategy defines {} agents, team has {n}",
                v.len()
            ))),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixture_averages_rows() {
        let a = PurePolicy::new(vec![0, 1], 2).unwrap().to_local(2);
        let b = PurePolicy::new(vec![1, 1], 2).unwrap().to_local(2);
        let m = LocalPolicy::mixture(&[a, b], &[0.25, 0.75]).unwrap();
        assert_eq!(m.row(0).as_slice(), &[0.25, 0.75]);
        assert_eq!(m.row(1).as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn pure_policy_rejects_bad_action() {
        assert!(PurePolicy::new(vec![0, 2], 2).is_err());
    }

    #[test]
    fn identical_strategy_shares_evaluator() {
        let s = TeamStrategy::constant(LocalPolicy::uniform(2, 3));
        let mu = Distribution::uniform(2);
        let a = s.agent(0) as *const dyn AgentPolicy as *const u8;
        let b = s.agent(7) as *const dyn AgentPolicy as *const u8;
        assert_eq!(a, b);
        assert_eq!(s.agent(3).action_distribution(0, 1, &mu, &mu).unwrap().len(), 3);
        assert!(s.covers(100).is_ok());
        let p = TeamStrategy::per_agent(vec![Arc::new(ConstantPolicy(LocalPolicy::uniform(2, 2)))]);
        assert!(p.covers(2).is_err());
    }
}
