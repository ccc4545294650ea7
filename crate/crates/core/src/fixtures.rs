//! Built-in games with known reference quantities.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::model::{build_pairwise_coupled_model, GameModel, LipschitzBundle, PairwiseTables, Sizes};
use crate::policy::LocalPolicy;

/// Where a reference number comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Reported in the literature for this game.
    Published,
    /// Obtained by direct calculation.
    Derived,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValue {
    pub value: f64,
    pub tolerance: f64,
    pub provenance: Provenance,
    pub note: String,
}

/// Named reference quantities of a fixture.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReferenceRecord {
    pub values: BTreeMap<String, ReferenceValue>,
}

impl ReferenceRecord {
    fn add(&mut self, key: &str, value: f64, tolerance: f64, provenance: Provenance, note: &str) {
        self.values.insert(
            key.to_string(),
            ReferenceValue {
                value,
                tolerance,
                provenance,
                note: note.to_string(),
            },
        );
    }

    pub fn get(&self, key: &str) -> Option<&ReferenceValue> {
        self.values.get(key)
    }

    pub fn value(&self, key: &str) -> Option<f64> {
        self.get(key).map(|r| r.value)
    }
}

#[derive(Clone)]
pub struct Fixture {
    pub name: String,
    pub model: GameModel,
    pub reference: ReferenceRecord,
    /// Default initial mean-fields.
    pub mu0: Distribution,
    pub nu0: Distribution,
    /// False for fixtures whose reward or kernels are deliberately discontinuous.
    pub lipschitz: bool,
}

/// Optional parameters accepted by [`load_fixture`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FixtureParams {
    pub rho: Option<f64>,
    pub horizon: Option<usize>,
    pub radius: Option<f64>,
    pub seed: Option<u64>,
}

pub const FIXTURE_NAMES: [&str; 6] = ["two_node", "example1", "example2", "pairwise", "discontinuous", "info_counterexample"];

pub fn load_fixture(name: &str, params: &FixtureParams) -> Result<Fixture> {
    match name {
        "two_node" => two_node(params.rho.unwrap_or(0.5), params.horizon.unwrap_or(1)),
        "example1" => example1(),
        "example2" => example2(),
        "pairwise" => random_pairwise(params.rho.unwrap_or(0.5), params.horizon.unwrap_or(2), params.seed.unwrap_or(0)),
        "discontinuous" => discontinuous(params.radius.unwrap_or(DEFAULT_INDICATOR_RADIUS)),
        "info_counterexample" => info_counterexample(),
        other => Err(Error::Catalog(other.to_string())),
    }
}

fn set_row(out: &mut [f64], first: f64) {
    out[0] = first;
    out[1] = 1.0 - first;
}

fn stay_or_move(state: usize, moves: bool, out: &mut [f64]) {
    let target = if moves { 1 - state } else { state };
    out.iter_mut().enumerate().for_each(|(i, o)| *o = if i == target { 1.0 } else { 0.0 });
}

/// Two nodes; action 0 stays, action 1 moves with a probability that grows
/// with the own team's local advantage.
pub fn two_node(rho: f64, horizon: usize) -> Result<Fixture> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::invalid(format!("rho={rho} must lie in (0, 1)")));
    }
    if horizon == 0 {
        return Err(Error::invalid("two_node needs at least one transition"));
    }
    let blue = move |_t: usize, s: usize, a: usize, mu: &[f64], nu: &[f64], out: &mut [f64]| {
        if a == 0 {
            return stay_or_move(s, false, out);
        }
        let adv = rho * mu[s] - (1.0 - rho) * nu[s];
        let p_move = 0.5 * (1.0 + adv);
        set_row(out, if s == 0 { 1.0 - p_move } else { p_move });
    };
    let red = move |_t: usize, s: usize, a: usize, mu: &[f64], nu: &[f64], out: &mut [f64]| {
        if a == 0 {
            return stay_or_move(s, false, out);
        }
        let adv = (1.0 - rho) * nu[s] - rho * mu[s];
        let p_move = 0.5 * (1.0 + adv);
        set_row(out, if s == 0 { 1.0 - p_move } else { p_move });
    };
    let l = rho.max(1.0 - rho);
    let model = GameModel::builder(Sizes::new(2, 2, 2, 2), horizon, rho)
        .name("two_node")
        .blue_kernel(blue)
        .red_kernel(red)
        .reward(|_t: usize, mu: &[f64], _nu: &[f64]| mu[1])
        .lipschitz(LipschitzBundle::constant(l, l, 1.0, horizon))
        .r_max(1.0)
        .build()?;
    let mut reference = ReferenceRecord::default();
    let p = 0.5 * (1.0 + rho - 0.5 * (1.0 - rho));
    if (rho - 0.5).abs() < 1e-15 {
        reference.add("move_probability", 0.625, 1e-12, Provenance::Published, "single agent at node 1 under the move action");
        reference.add(
            "value_one_step",
            0.625,
            1e-12,
            Provenance::Published,
            "printed as 0.63 at two digits; exact arithmetic gives 0.625",
        );
    } else {
        reference.add("move_probability", p, 1e-12, Provenance::Derived, "0.5 (1 + rho - (1 - rho) / 2)");
    }
    reference.add("ed_prob_stay_both", (1.0 - p) * (1.0 - p), 1e-12, Provenance::Derived, "binomial, two agents");
    reference.add("ed_prob_split", 2.0 * p * (1.0 - p), 1e-12, Provenance::Derived, "binomial, two agents");
    reference.add("ed_prob_move_both", p * p, 1e-12, Provenance::Derived, "binomial, two agents");
    Ok(Fixture {
        name: "two_node".into(),
        model,
        reference,
        mu0: Distribution::dirac(2, 0),
        nu0: Distribution::uniform(2),
        lipschitz: true,
    })
}

/// Two-stage game where both teams push each other around two states and
/// Blue is rewarded for its final mass at the second state.
pub fn example1() -> Result<Fixture> {
    let rho = 0.6;
    let horizon = 2;
    let blue = move |_t: usize, s: usize, a: usize, mu: &[f64], nu: &[f64], out: &mut [f64]| {
        let c = if a == 0 { 1.0 } else { -0.3 };
        let d = rho * mu[s] - (1.0 - rho) * nu[s];
        let p_stay = 0.5 * (1.0 + c * d);
        set_row(out, if s == 0 { p_stay } else { 1.0 - p_stay });
    };
    let red = move |_t: usize, s: usize, a: usize, mu: &[f64], nu: &[f64], out: &mut [f64]| {
        let c = if a == 0 { 1.0 } else { -0.3 };
        let d = (1.0 - rho) * nu[s] - rho * mu[s];
        let p_stay = 0.5 * (1.0 + c * d);
        set_row(out, if s == 0 { p_stay } else { 1.0 - p_stay });
    };
    let model = GameModel::builder(Sizes::new(2, 2, 2, 2), horizon, rho)
        .name("example1")
        .blue_kernel(blue)
        .red_kernel(red)
        .reward(move |t: usize, mu: &[f64], _nu: &[f64]| if t == horizon { mu[1] } else { 0.0 })
        .lipschitz(LipschitzBundle::constant(0.6, 0.6, 1.0, horizon))
        .r_max(1.0)
        .build()?;
    let mut reference = ReferenceRecord::default();
    reference.add("lower_value", 0.5298, 0.005, Provenance::Published, "500 bins, mu0=[0.96,0.04], nu0=[0.04,0.96]");
    reference.add("upper_value", 0.5384, 0.005, Provenance::Published, "500 bins, same initial point");
    reference.add("maxmin_successor_mu1", 0.4172, 0.01, Provenance::Published, "first Blue move of the max-min trajectory");
    reference.add("red_first_red_successor_nu1", 0.3160, 0.01, Provenance::Published, "Red's announced move");
    reference.add("red_first_blue_successor_mu1", 0.776, 0.01, Provenance::Published, "Blue's best response to Red's move");
    reference.add("red_first_value", 0.5442, 0.005, Provenance::Published, "Blue exploits Red's announced move");
    Ok(Fixture {
        name: "example1".into(),
        model,
        reference,
        mu0: Distribution::new(vec![0.96, 0.04])?,
        nu0: Distribution::new(vec![0.04, 0.96])?,
        lipschitz: true,
    })
}

/// Blue target share of the first state in [`example2`].
pub const EXAMPLE2_TARGET: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Probability that a Red agent at the second state reaches the first one
/// at `t = 1` when it tries, given Blue's mean-field.
pub fn example2_escape_probability(mu: &[f64]) -> f64 {
    let a = EXAMPLE2_TARGET;
    (5.0 * ((mu[0] - a).powi(2) + (mu[1] - (1.0 - a)).powi(2))).min(1.0)
}

/// Blue moves freely between two states and must hit an irrational target
/// distribution at `t = 1` to stop Red agents from escaping.
pub fn example2() -> Result<Fixture> {
    let rho = 0.375;
    let horizon = 2;
    let blue = |_t: usize, s: usize, a: usize, _mu: &[f64], _nu: &[f64], out: &mut [f64]| stay_or_move(s, a == 1, out);
    let red = |t: usize, s: usize, a: usize, mu: &[f64], _nu: &[f64], out: &mut [f64]| {
        if t == 1 && s == 1 && a == 1 {
            set_row(out, example2_escape_probability(mu));
        } else {
            stay_or_move(s, false, out);
        }
    };
    let l_escape = 40.0 / 10f64.sqrt();
    let model = GameModel::builder(Sizes::new(2, 2, 2, 2), horizon, rho)
        .name("example2")
        .blue_kernel(blue)
        .red_kernel(red)
        .reward(move |t: usize, _mu: &[f64], nu: &[f64]| if t == horizon { -nu[0] } else { 0.0 })
        .lipschitz(LipschitzBundle {
            l_f: vec![0.0, 0.0],
            l_g: vec![0.0, l_escape],
            l_r: 1.0,
        })
        .r_max(1.0)
        .build()?;
    let mut reference = ReferenceRecord::default();
    reference.add("n3_prob_1_0", 0.354, 1e-3, Provenance::Published, "three agents from [1,0] under the stay-w.p.-1/sqrt2 policy");
    reference.add("n3_prob_2_1", 0.439, 1e-3, Provenance::Published, "ED [2/3,1/3]");
    reference.add("n3_prob_1_2", 0.182, 1e-3, Provenance::Published, "ED [1/3,2/3]");
    reference.add("n3_prob_0_3", 0.025, 1e-3, Provenance::Published, "ED [0,1]");
    reference.add("n3_identical_escape", 0.518, 1e-3, Provenance::Published, "expected Red escape probability");
    reference.add("n3_optimal_escape", 0.016, 1e-3, Provenance::Published, "two agents stay, one moves");
    reference.add("infinite_value_coeff_nu1", -1.0, 0.0, Provenance::Published, "value equals -nu0(y1)");
    Ok(Fixture {
        name: "example2".into(),
        model,
        reference,
        mu0: Distribution::dirac(2, 0),
        nu0: Distribution::new(vec![0.6, 0.4])?,
        lipschitz: true,
    })
}

/// Local policy moving a two-state mean-field `mu` exactly to `[target, 1 - target]`
/// when staying and moving are `stay[s]`/`moves[s]` at state `s`.
pub fn steering_policy(mu: &Distribution, target: f64, num_actions: usize, stay: [usize; 2], moves: [usize; 2]) -> Result<LocalPolicy> {
    let mut rows = vec![vec![0.0; num_actions]; 2];
    if mu[0] < target {
        rows[0][stay[0]] = 1.0;
        rows[1][stay[1]] = (1.0 - target) / mu[1];
        rows[1][moves[1]] = (target - mu[0]) / mu[1];
    } else {
        rows[0][stay[0]] = target / mu[0];
        rows[0][moves[0]] = (1.0 - target - mu[1]) / mu[0];
        rows[1][stay[1]] = 1.0;
    }
    LocalPolicy::from_rows(rows)
}

/// Blue coordination policy of [`example2`] at `t = 0` reaching the target exactly.
pub fn example2_target_policy(mu: &Distribution) -> Result<LocalPolicy> {
    steering_policy(mu, EXAMPLE2_TARGET, 2, [0, 0], [1, 1])
}

/// Pairwise-coupled game with random tables drawn from `seed`.
pub fn random_pairwise(rho: f64, horizon: usize, seed: u64) -> Result<Fixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tables = random_pairwise_tables(&mut rng, 2, 2, 2, 2, horizon);
    pairwise(&tables, rho, horizon)
}

pub fn random_pairwise_tables<R: Rng + ?Sized>(rng: &mut R, nx: usize, ny: usize, nu: usize, nv: usize, horizon: usize) -> PairwiseTables {
    use crate::model::random_simplex;
    let table = |rng: &mut R, s: usize, a: usize, z: usize, n: usize| -> Vec<Vec<Vec<Vec<Vec<f64>>>>> {
        (0..horizon)
            .map(|_| (0..s).map(|_| (0..a).map(|_| (0..z).map(|_| random_simplex(rng, n)).collect()).collect()).collect())
            .collect()
    };
    let f1 = table(rng, nx, nu, nx, nx);
    let f2 = table(rng, nx, nu, ny, nx);
    let g1 = table(rng, ny, nv, nx, ny);
    let g2 = table(rng, ny, nv, ny, ny);
    let r1 = (0..=horizon).map(|_| (0..nx).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let r2 = (0..=horizon).map(|_| (0..ny).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    PairwiseTables { f1, f2, g1, g2, r1, r2 }
}

pub fn pairwise(tables: &PairwiseTables, rho: f64, horizon: usize) -> Result<Fixture> {
    let model = build_pairwise_coupled_model(tables, rho, horizon)?;
    let nx = model.sizes().blue_states;
    let ny = model.sizes().red_states;
    let mut reference = ReferenceRecord::default();
    reference.add("l_f", 2.0, 0.0, Provenance::Published, "kernel Lipschitz constant of pairwise coupling");
    reference.add("l_g", 2.0, 0.0, Provenance::Published, "kernel Lipschitz constant of pairwise coupling");
    Ok(Fixture {
        name: "pairwise".into(),
        model,
        reference,
        mu0: Distribution::uniform(nx),
        nu0: Distribution::uniform(ny),
        lipschitz: true,
    })
}

pub const DISCONTINUOUS_TARGET: f64 = 0.577_350_269_189_625_8;
pub const DEFAULT_INDICATOR_RADIUS: f64 = 1e-9;

/// One-step game whose only reward is an indicator of Blue hitting an
/// irrational distribution; Red has a single frozen state.
///
/// Blue actions 0 and 2 stay, 1 and 3 move, at either state. The indicator
/// fires when the first coordinate is within `radius` of the target.
pub fn discontinuous(radius: f64) -> Result<Fixture> {
    if radius.is_nan() || radius < 0.0 {
        return Err(Error::invalid("indicator radius must be non-negative"));
    }
    let blue = |_t: usize, s: usize, a: usize, _mu: &[f64], _nu: &[f64], out: &mut [f64]| stay_or_move(s, a % 2 == 1, out);
    let red = |_t: usize, _s: usize, _a: usize, _mu: &[f64], _nu: &[f64], out: &mut [f64]| out[0] = 1.0;
    let model = GameModel::builder(Sizes::new(2, 1, 4, 1), 1, 0.5)
        .name("discontinuous")
        .blue_kernel(blue)
        .red_kernel(red)
        .reward(move |t: usize, mu: &[f64], _nu: &[f64]| {
            if t == 1 && (mu[0] - DISCONTINUOUS_TARGET).abs() <= radius {
                1.0
            } else {
                0.0
            }
        })
        .r_max(1.0)
        .build()?;
    let mut reference = ReferenceRecord::default();
    reference.add("coordinator_value", 1.0, 0.0, Provenance::Published, "target reachable from every mean-field");
    reference.add("finite_value", 0.0, 0.0, Provenance::Published, "rational EDs never hit the target");
    Ok(Fixture {
        name: "discontinuous".into(),
        model,
        reference,
        mu0: Distribution::dirac(2, 0),
        nu0: Distribution::dirac(1, 0),
        lipschitz: false,
    })
}

/// Blue local policy of [`discontinuous`] reaching the target exactly.
pub fn discontinuous_target_policy(mu: &Distribution) -> Result<LocalPolicy> {
    steering_policy(mu, DISCONTINUOUS_TARGET, 4, [0, 2], [1, 3])
}

/// Decoupled two-state single-team game (Red is a single frozen state)
/// rewarding the final share of the first state.
pub fn info_counterexample() -> Result<Fixture> {
    let blue = |_t: usize, s: usize, a: usize, _mu: &[f64], _nu: &[f64], out: &mut [f64]| stay_or_move(s, a == 1, out);
    let red = |_t: usize, _s: usize, _a: usize, _mu: &[f64], _nu: &[f64], out: &mut [f64]| out[0] = 1.0;
    let model = GameModel::builder(Sizes::new(2, 1, 2, 1), 1, 0.5)
        .name("info_counterexample")
        .blue_kernel(blue)
        .red_kernel(red)
        .reward(|t: usize, mu: &[f64], _nu: &[f64]| if t == 1 { mu[0] } else { 0.0 })
        .lipschitz(LipschitzBundle::constant(0.0, 0.0, 1.0, 1))
        .r_max(1.0)
        .build()?;
    let mut reference = ReferenceRecord::default();
    reference.add("value_agent1_at_x1", 0.0, 0.0, Provenance::Published, "agent 1 at x1, agent 2 at x2");
    reference.add("value_agent1_at_x2", 0.5, 0.0, Provenance::Published, "agent 1 at x2, agent 2 at x1");
    Ok(Fixture {
        name: "info_counterexample".into(),
        model,
        reference,
        mu0: Distribution::uniform(2),
        nu0: Distribution::dirac(1, 0),
        lipschitz: true,
    })
}

/// Per-agent pure policies of [`info_counterexample`]: agent 0 moves from
/// the first state and stays at the second; agent 1 always stays.
pub fn info_counterexample_policies() -> [LocalPolicy; 2] {
    [
        LocalPolicy::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(),
        LocalPolicy::from_rows(vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanfield::{mf_step, reachable_set};
    use crate::model::Team;

    #[test]
    fn catalog_lookup() {
        for name in FIXTURE_NAMES {
            let f = load_fixture(name, &FixtureParams::default()).unwrap();
            assert_eq!(f.name, name);
        }
        assert!(matches!(load_fixture("nope", &FixtureParams::default()), Err(Error::Catalog(_))));
    }

    #[test]
    fn two_node_move_probability() {
        let f = two_node(0.5, 1).unwrap();
        let row = f.model.eval_blue_kernel_row(0, 0, 1, &f.mu0, &f.nu0).unwrap();
        assert!((row[1] - 0.625).abs() < 1e-15);
        assert_eq!(f.reference.value("value_one_step"), Some(0.625));
        assert!((f.reference.value("ed_prob_split").unwrap() - 0.46875).abs() < 1e-15);
    }

    #[test]
    fn declared_lipschitz_constants_hold() {
        for name in ["two_node", "example1", "example2", "pairwise", "info_counterexample"] {
            let f = load_fixture(name, &FixtureParams::default()).unwrap();
            assert!(f.lipschitz);
            f.model.check_lipschitz(300, 7).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(!discontinuous(0.01).unwrap().lipschitz);
    }

    #[test]
    fn example2_escape_values() {
        assert_eq!(example2_escape_probability(&[EXAMPLE2_TARGET, 1.0 - EXAMPLE2_TARGET]), 0.0);
        assert!((example2_escape_probability(&[2.0 / 3.0, 1.0 / 3.0]) - 0.016).abs() < 5e-4);
        assert!((example2_escape_probability(&[1.0, 0.0]) - 0.858).abs() < 1e-3);
        assert_eq!(example2_escape_probability(&[0.0, 1.0]), 1.0);
    }

    #[test]
    fn target_policies_reach_target() {
        let f = example2().unwrap();
        for m in [0.0, 0.3, EXAMPLE2_TARGET, 0.9, 1.0] {
            let mu = Distribution::binary(m).unwrap();
            let pi = example2_target_policy(&mu).unwrap();
            let next = mf_step(&f.model, Team::Blue, 0, &mu, &f.nu0, &pi).unwrap();
            assert!((next[0] - EXAMPLE2_TARGET).abs() < 1e-12, "{m}");
        }
        let d = discontinuous(1e-9).unwrap();
        for m in [0.0, 0.5, 0.8, 1.0] {
            let mu = Distribution::binary(m).unwrap();
            let pi = discontinuous_target_policy(&mu).unwrap();
            let next = mf_step(&d.model, Team::Blue, 0, &mu, &d.nu0, &pi).unwrap();
            assert!((next[0] - DISCONTINUOUS_TARGET).abs() < 1e-12);
            assert_eq!(d.model.eval_reward(1, &next, &d.nu0).unwrap(), 1.0);
        }
    }

    #[test]
    fn example2_blue_reaches_whole_simplex() {
        let f = example2().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let mu = Distribution::binary(rng.gen()).unwrap();
            let nu = Distribution::binary(rng.gen()).unwrap();
            let set = reachable_set(&f.model, Team::Blue, rng.gen_range(0..2), &mu, &nu).unwrap();
            let (lo, hi) = set.first_coordinate_range();
            assert!(lo.abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn target_constant_is_inverse_sqrt3() {
        assert!((DISCONTINUOUS_TARGET - 1.0 / 3f64.sqrt()).abs() < 1e-16);
    }
}
