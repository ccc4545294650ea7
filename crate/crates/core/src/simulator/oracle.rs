//! Exact finite-population oracles on agent counts.
//!
//! Kernels and rewards see joint states only through EDs, so a team whose
//! agents act identically (or whose agents are assigned actions by count)
//! can be tracked by how many agents sit at each state.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::distribution::{counts_to_distribution, Distribution};
use crate::error::{Error, Result};
use crate::fixtures::EXAMPLE2_TARGET;
use crate::model::{GameModel, Team};
use crate::par::{map_range, Execution};
use crate::policy::TeamStrategy;

/// Agents per state of both teams.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct JointCountState {
    pub blue_counts: Vec<u32>,
    pub red_counts: Vec<u32>,
}

impl JointCountState {
    pub fn new(blue_counts: Vec<u32>, red_counts: Vec<u32>) -> Result<Self> {
        if blue_counts.iter().sum::<u32>() == 0 || red_counts.iter().sum::<u32>() == 0 {
            return Err(Error::invalid("both teams need at least one agent"));
        }
        Ok(JointCountState { blue_counts, red_counts })
    }

    pub fn n1(&self) -> u32 {
        self.blue_counts.iter().sum()
    }

    pub fn n2(&self) -> u32 {
        self.red_counts.iter().sum()
    }

    pub fn eds(&self) -> Result<(Distribution, Distribution)> {
        Ok((counts_to_distribution(&self.blue_counts)?, counts_to_distribution(&self.red_counts)?))
    }

    fn check(&self, model: &GameModel) -> Result<()> {
        let s = model.sizes();
        if self.blue_counts.len() != s.blue_states || self.red_counts.len() != s.red_states {
            return Err(Error::invalid("count vector lengths do not match the model"));
        }
        Ok(())
    }
}

/// Action counts per state: `plan[s][a]` agents at `s` take `a`.
pub type CountPlan = Vec<Vec<u32>>;

/// Deterministic count plan of a team as a function of time and joint counts.
pub type CountPlanFn = dyn Fn(usize, &JointCountState) -> Result<CountPlan> + Send + Sync;

/// How the Blue team plays in the count DP.
#[derive(Clone)]
pub enum BluePlay {
    /// Identical strategy; agents sample independently.
    Identical(TeamStrategy),
    /// Fixed count plan, e.g. a non-identical deterministic assignment.
    Plan(Arc<CountPlanFn>),
    /// Best count plan, chosen before Red's reply at each step.
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleOptions {
    /// Maximum number of joint count states per timestep.
    pub state_cap: u128,
    /// Maximum number of (Blue option, Red option) pairs at one state.
    pub plan_cap: u128,
    pub execution: Execution,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            state_cap: 1_000_000,
            plan_cap: 1_000_000,
            execution: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountSolution {
    pub value: f64,
    /// Red plan at every visited `(t, state)`, `t < T`.
    pub red_plan: BTreeMap<(usize, JointCountState), CountPlan>,
    /// Blue plan for [`BluePlay::Plan`] and [`BluePlay::Maximize`].
    pub blue_plan: BTreeMap<(usize, JointCountState), CountPlan>,
    /// Number of visited count states over all timesteps.
    pub states: usize,
}

/// Sparse distribution over count vectors, sorted by key.
pub type CountDistribution = Vec<(Vec<u32>, f64)>;

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// Number of ways to put `k` agents into `n` states.
pub fn composition_count(k: u32, n: usize) -> u128 {
    if n == 0 {
        return u128::from(k == 0);
    }
    binomial(k as u64 + n as u64 - 1, n as u64 - 1)
}

/// All ways to put `k` agents into `n` states, lexicographic with the
/// first state most significant, largest first.
pub fn compositions(k: u32, n: usize) -> Vec<Vec<u32>> {
    fn rec(k: u32, n: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if n == 1 {
            prefix.push(k);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for c in (0..=k).rev() {
            prefix.push(c);
            rec(k - c, n - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(k, n, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

struct LnFactorial(Vec<f64>);

impl LnFactorial {
    fn new(n: usize) -> Self {
        let mut v = vec![0.0; n + 1];
        for i in 1..=n {
            v[i] = v[i - 1] + (i as f64).ln();
        }
        LnFactorial(v)
    }
}

/// Multinomial law of `k` iid draws from `q` as counts.
fn multinomial(k: u32, q: &[f64], lnf: &LnFactorial) -> CountDistribution {
    let support: Vec<usize> = (0..q.len()).filter(|&i| q[i] > 0.0).collect();
    if support.len() == 1 {
        let mut c = vec![0; q.len()];
        c[support[0]] = k;
        return vec![(c, 1.0)];
    }
    let lnq: Vec<f64> = support.iter().map(|&i| q[i].ln()).collect();
    let mut out: Vec<(Vec<u32>, f64)> = compositions(k, support.len())
        .into_iter()
        .map(|sub| {
            let mut ln = lnf.0[k as usize];
            let mut c = vec![0; q.len()];
            for ((&i, &ci), lq) in support.iter().zip(&sub).zip(&lnq) {
                ln += ci as f64 * lq - lnf.0[ci as usize];
                c[i] = ci;
            }
            (c, ln.exp())
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn convolve(acc: &CountDistribution, part: &CountDistribution) -> CountDistribution {
    let mut map: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    for (a, pa) in acc {
        for (b, pb) in part {
            let key: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
            *map.entry(key).or_insert(0.0) += pa * pb;
        }
    }
    map.into_iter().collect()
}

/// Next-state law of one agent at `s` mixing actions by `weights`.
fn next_state_law(model: &GameModel, team: Team, t: usize, s: usize, weights: &[f64], mu: &[f64], nu: &[f64]) -> Result<Vec<f64>> {
    let ns = model.num_states(team);
    let mut row = vec![0.0; ns];
    let mut q = vec![0.0; ns];
    for (a, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        model.kernel_row(team, t, s, a, mu, nu, &mut row);
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-6 || row.iter().any(|p| *p < -1e-9) {
            return Err(Error::model(format!("{team} kernel row at t={t}, state={s}, action={a} is not stochastic")));
        }
        for (qi, ri) in q.iter_mut().zip(&row) {
            *qi += w * ri.max(0.0);
        }
    }
    Ok(q)
}

/// Law of a team's next counts when the agents at each state `s` are split
/// into groups `(action weights, size)`.
fn team_transition(
    model: &GameModel,
    team: Team,
    t: usize,
    groups: &[(usize, Vec<f64>, u32)],
    mu: &[f64],
    nu: &[f64],
    lnf: &LnFactorial,
) -> Result<CountDistribution> {
    let ns = model.num_states(team);
    let mut acc: CountDistribution = vec![(vec![0; ns], 1.0)];
    for (s, w, k) in groups {
        if *k == 0 {
            continue;
        }
        let q = next_state_law(model, team, t, *s, w, mu, nu)?;
        acc = convolve(&acc, &multinomial(*k, &q, lnf));
    }
    Ok(acc)
}

fn plan_groups(plan: &CountPlan) -> Vec<(usize, Vec<f64>, u32)> {
    let mut groups = Vec::new();
    for (s, row) in plan.iter().enumerate() {
        for (a, &k) in row.iter().enumerate() {
            if k > 0 {
                let mut w = vec![0.0; row.len()];
                w[a] = 1.0;
                groups.push((s, w, k));
            }
        }
    }
    groups
}

fn check_plan(plan: &CountPlan, counts: &[u32], na: usize) -> Result<()> {
    if plan.len() != counts.len() || plan.iter().zip(counts).any(|(row, &c)| row.len() != na || row.iter().sum::<u32>() != c) {
        return Err(Error::invalid(format!("count plan {plan:?} does not split counts {counts:?}")));
    }
    Ok(())
}

/// Every count plan for `counts` with `na` actions, in enumeration order.
fn all_plans(counts: &[u32], na: usize) -> Vec<CountPlan> {
    let mut plans: Vec<CountPlan> = vec![Vec::new()];
    for &c in counts {
        let rows = compositions(c, na);
        plans = plans
            .into_iter()
            .flat_map(|p| {
                rows.iter().map(move |r| {
                    let mut q = p.clone();
                    q.push(r.clone());
                    q
                })
            })
            .collect();
    }
    plans
}

fn plan_count(counts: &[u32], na: usize) -> u128 {
    counts.iter().fold(1u128, |acc, &c| acc.saturating_mul(composition_count(c, na)))
}

/// Law of the next Blue counts when every Blue agent follows the identical
/// strategy `blue` at the EDs of `state`.
pub fn identical_count_transition(model: &GameModel, team: Team, strategy: &TeamStrategy, t: usize, state: &JointCountState) -> Result<CountDistribution> {
    state.check(model)?;
    if !strategy.is_identical() {
        return Err(Error::invalid("count transitions need an identical team strategy"));
    }
    let (mu, nu) = state.eds()?;
    let counts = match team {
        Team::Blue => &state.blue_counts,
        Team::Red => &state.red_counts,
    };
    let lnf = LnFactorial::new(counts.iter().sum::<u32>() as usize);
    let groups = identical_groups(model, team, strategy, t, counts, &mu, &nu)?;
    team_transition(model, team, t, &groups, mu.as_slice(), nu.as_slice(), &lnf)
}

fn identical_groups(
    model: &GameModel,
    team: Team,
    strategy: &TeamStrategy,
    t: usize,
    counts: &[u32],
    mu: &Distribution,
    nu: &Distribution,
) -> Result<Vec<(usize, Vec<f64>, u32)>> {
    let na = model.num_actions(team);
    let mut groups = Vec::new();
    for (s, &k) in counts.iter().enumerate() {
        if k == 0 {
            continue;
        }
        let d = strategy.agent(0).action_distribution(t, s, mu, nu)?;
        if d.len() != na {
            return Err(Error::model(format!("{team} policy returned {} actions, model has {na}", d.len())));
        }
        groups.push((s, d.into_vec(), k));
    }
    Ok(groups)
}

/// One option of a team at a state: its plan (if deterministic) and the law
/// of its next counts.
struct Option_ {
    plan: Option<CountPlan>,
    law: CountDistribution,
}

struct Stage {
    blue: Vec<Option_>,
    red: Vec<Option_>,
}

fn build_stage(model: &GameModel, blue: &BluePlay, t: usize, state: &JointCountState, opts: &OracleOptions, lnf: &LnFactorial) -> Result<Stage> {
    let s = model.sizes();
    let (mu, nu) = state.eds()?;
    let (m, n) = (mu.as_slice(), nu.as_slice());
    let red_plans = plan_count(&state.red_counts, s.red_actions);
    let blue_plans = match blue {
        BluePlay::Maximize => plan_count(&state.blue_counts, s.blue_actions),
        _ => 1,
    };
    let pairs = red_plans.saturating_mul(blue_plans);
    if pairs > opts.plan_cap {
        return Err(Error::Capacity {
            what: format!("action plans at t={t}"),
            required: pairs,
            cap: opts.plan_cap,
        });
    }
    let blue_opts = match blue {
        BluePlay::Identical(strategy) => {
            let groups = identical_groups(model, Team::Blue, strategy, t, &state.blue_counts, &mu, &nu)?;
            vec![Option_ {
                plan: None,
                law: team_transition(model, Team::Blue, t, &groups, m, n, lnf)?,
            }]
        }
        BluePlay::Plan(f) => {
            let plan = f(t, state)?;
            check_plan(&plan, &state.blue_counts, s.blue_actions)?;
            vec![Option_ {
                law: team_transition(model, Team::Blue, t, &plan_groups(&plan), m, n, lnf)?,
                plan: Some(plan),
            }]
        }
        BluePlay::Maximize => all_plans(&state.blue_counts, s.blue_actions)
            .into_iter()
            .map(|plan| {
                Ok(Option_ {
                    law: team_transition(model, Team::Blue, t, &plan_groups(&plan), m, n, lnf)?,
                    plan: Some(plan),
                })
            })
            .collect::<Result<_>>()?,
    };
    let red_opts = all_plans(&state.red_counts, s.red_actions)
        .into_iter()
        .map(|plan| {
            Ok(Option_ {
                law: team_transition(model, Team::Red, t, &plan_groups(&plan), m, n, lnf)?,
                plan: Some(plan),
            })
        })
        .collect::<Result<_>>()?;
    Ok(Stage { blue: blue_opts, red: red_opts })
}

fn collect<T>(v: Vec<Result<T>>) -> Result<Vec<T>> {
    v.into_iter().collect()
}

/// Backward DP over count states reachable from `init`: Red picks the count
/// plan minimizing the expected total reward at every state, Blue plays as
/// described by `blue`. Ties go to the first plan in enumeration order.
pub fn solve_counts(model: &GameModel, blue: &BluePlay, init: &JointCountState, opts: &OracleOptions) -> Result<CountSolution> {
    init.check(model)?;
    if let BluePlay::Identical(s) = blue {
        if !s.is_identical() {
            return Err(Error::invalid("the count oracle needs an identical Blue strategy"));
        }
    }
    let s = model.sizes();
    let states = composition_count(init.n1(), s.blue_states).saturating_mul(composition_count(init.n2(), s.red_states));
    if states > opts.state_cap {
        return Err(Error::Capacity {
            what: "joint count states per timestep".into(),
            required: states,
            cap: opts.state_cap,
        });
    }
    let lnf = LnFactorial::new(init.n1().max(init.n2()) as usize);
    let horizon = model.horizon();

    let mut layers: Vec<Vec<JointCountState>> = vec![vec![init.clone()]];
    let mut stages: Vec<Vec<Stage>> = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let layer = &layers[t];
        let built = collect(map_range(opts.execution, layer.len(), |i| build_stage(model, blue, t, &layer[i], opts, &lnf)))?;
        let mut blue_next: BTreeSet<&Vec<u32>> = BTreeSet::new();
        let mut red_next: BTreeSet<&Vec<u32>> = BTreeSet::new();
        let mut next: BTreeSet<JointCountState> = BTreeSet::new();
        for stage in &built {
            blue_next.clear();
            red_next.clear();
            blue_next.extend(stage.blue.iter().flat_map(|o| o.law.iter().map(|(c, _)| c)));
            red_next.extend(stage.red.iter().flat_map(|o| o.law.iter().map(|(c, _)| c)));
            for b in &blue_next {
                for r in &red_next {
                    next.insert(JointCountState {
                        blue_counts: (*b).clone(),
                        red_counts: (*r).clone(),
                    });
                }
            }
        }
        stages.push(built);
        layers.push(next.into_iter().collect());
    }

    let reward = |t: usize, st: &JointCountState| -> Result<f64> {
        let (mu, nu) = st.eds()?;
        Ok(model.reward_value(t, mu.as_slice(), nu.as_slice()))
    };
    let terminal = &layers[horizon];
    let mut values: Vec<f64> = collect(map_range(opts.execution, terminal.len(), |i| reward(horizon, &terminal[i])))?;
    let mut red_plan = BTreeMap::new();
    let mut blue_plan = BTreeMap::new();
    for t in (0..horizon).rev() {
        let next: HashMap<&JointCountState, f64> = layers[t + 1].iter().zip(values.iter().copied()).collect();
        let layer = &layers[t];
        let stage = &stages[t];
        let solved = collect(map_range(opts.execution, layer.len(), |i| -> Result<(f64, Option<usize>, usize)> {
            let st = &stage[i];
            let mut best: Option<(f64, usize, usize)> = None;
            for (bi, b) in st.blue.iter().enumerate() {
                let mut reply: Option<(f64, usize)> = None;
                let mut w: HashMap<&Vec<u32>, f64> = HashMap::new();
                for (ri, r) in st.red.iter().enumerate() {
                    let mut v = 0.0;
                    for (cr, pr) in &r.law {
                        let wv = match w.get(cr) {
                            Some(x) => *x,
                            None => {
                                let mut acc = 0.0;
                                for (cb, pb) in &b.law {
                                    let key = JointCountState {
                                        blue_counts: cb.clone(),
                                        red_counts: cr.clone(),
                                    };
                                    acc += pb * next[&key];
                                }
                                w.insert(cr, acc);
                                acc
                            }
                        };
                        v += pr * wv;
                    }
                    if reply.is_none_or(|(x, _)| v < x) {
                        reply = Some((v, ri));
                    }
                }
                let (v, ri) = reply.expect("at least one red plan");
                if best.is_none_or(|(x, _, _)| v > x) {
                    best = Some((v, bi, ri));
                }
            }
            let (v, bi, ri) = best.expect("at least one blue option");
            Ok((reward(t, &layer[i])? + v, Some(bi), ri))
        }))?;
        values = Vec::with_capacity(layer.len());
        for ((st, stg), (v, bi, ri)) in layer.iter().zip(stage).zip(solved) {
            values.push(v);
            if let Some(p) = &stg.red[ri].plan {
                red_plan.insert((t, st.clone()), p.clone());
            }
            if let Some(p) = bi.and_then(|b| stg.blue[b].plan.clone()) {
                blue_plan.insert((t, st.clone()), p);
            }
        }
    }
    Ok(CountSolution {
        value: values[0],
        red_plan,
        blue_plan,
        states: layers.iter().map(Vec::len).sum(),
    })
}

/// Red's exact best response by count plans against Blue's play.
pub fn exact_red_best_response(model: &GameModel, blue: &BluePlay, init: &JointCountState, opts: &OracleOptions) -> Result<CountSolution> {
    if matches!(blue, BluePlay::Maximize) {
        return Err(Error::invalid("use exact_team_optimum for a maximizing Blue team"));
    }
    solve_counts(model, blue, init, opts)
}

/// Blue's best count plan against Red's best reply at every step.
pub fn exact_team_optimum(model: &GameModel, init: &JointCountState, opts: &OracleOptions) -> Result<CountSolution> {
    solve_counts(model, &BluePlay::Maximize, init, opts)
}

/// Closed-form finite-population optimum of the `example2` fixture: Blue
/// moves deterministically to the ED closest to the target and Red always
/// tries to escape.
pub fn exact_blue_optimum_example2(n1: usize, nu0: &Distribution) -> Result<f64> {
    if n1 == 0 || nu0.len() != 2 {
        return Err(Error::invalid("need n1 >= 1 and a two-state nu0"));
    }
    let n = n1 as f64;
    let best = (0..=n1)
        .min_by(|&a, &b| {
            let da = (a as f64 / n - EXAMPLE2_TARGET).powi(2);
            let db = (b as f64 / n - EXAMPLE2_TARGET).powi(2);
            da.partial_cmp(&db).unwrap()
        })
        .unwrap();
    let m = best as f64 / n;
    let p = crate::fixtures::example2_escape_probability(&[m, 1.0 - m]);
    Ok(-nu0[0] - p * nu0[1])
}
