//! Game models: state/action sizes, weakly-coupled transition kernels and
//! the team reward, plus the validation samplers that check them.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distribution::{tv, Distribution};
use crate::error::{Error, Result};

/// Transition kernel of one team, evaluated a full row at a time.
///
/// `row` writes the next-state probabilities for an agent at `state` taking
/// `action` at time `t` while the mean-fields are `mu` (Blue) and `nu` (Red).
/// Implementations must be pure functions of their arguments.
pub trait Kernel: Send + Sync {
    fn row(&self, t: usize, state: usize, action: usize, mu: &[f64], nu: &[f64], out: &mut [f64]);

    /// True when the kernel is affine in `(mu, nu)`, so that checks at the
    /// simplex vertices cover the whole domain.
    fn is_affine(&self) -> bool {
        false
    }
}

impl<F> Kernel for F
where
    F: Fn(usize, usize, usize, &[f64], &[f64], &mut [f64]) + Send + Sync,
{
    fn row(&self, t: usize, state: usize, action: usize, mu: &[f64], nu: &[f64], out: &mut [f64]) {
        self(t, state, action, mu, nu, out)
    }
}

/// Team reward `r_t(mu, nu)`; Blue maximises, Red minimises.
pub trait RewardFn: Send + Sync {
    fn value(&self, t: usize, mu: &[f64], nu: &[f64]) -> f64;
}

impl<F> RewardFn for F
where
    F: Fn(usize, &[f64], &[f64]) -> f64 + Send + Sync,
{
    fn value(&self, t: usize, mu: &[f64], nu: &[f64]) -> f64 {
        self(t, mu, nu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Team {
    Blue,
    Red,
}

impl Team {
    pub fn opponent(self) -> Team {
        match self {
            Team::Blue => Team::Red,
            Team::Red => Team::Blue,
        }
    }
}

impl fmt::Display for Team {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Team::Blue => write!(f, "blue"),
            Team::Red => write!(f, "red"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sizes {
    pub blue_states: usize,
    pub red_states: usize,
    pub blue_actions: usize,
    pub red_actions: usize,
}

impl Sizes {
    pub fn new(blue_states: usize, red_states: usize, blue_actions: usize, red_actions: usize) -> Self {
        Sizes {
            blue_states,
            red_states,
            blue_actions,
            red_actions,
        }
    }

    pub fn states(&self, team: Team) -> usize {
        match team {
            Team::Blue => self.blue_states,
            Team::Red => self.red_states,
        }
    }

    pub fn actions(&self, team: Team) -> usize {
        match team {
            Team::Blue => self.blue_actions,
            Team::Red => self.red_actions,
        }
    }
}

/// Declared Lipschitz constants of the kernels (per timestep) and reward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzBundle {
    pub l_f: Vec<f64>,
    pub l_g: Vec<f64>,
    pub l_r: f64,
}

impl LipschitzBundle {
    /// Same kernel constants at every one of the `horizon` transitions.
    pub fn constant(l_f: f64, l_g: f64, l_r: f64, horizon: usize) -> Self {
        LipschitzBundle {
            l_f: vec![l_f; horizon],
            l_g: vec![l_g; horizon],
            l_r,
        }
    }

    pub fn validate(&self, horizon: usize) -> Result<()> {
        if self.l_f.len() != horizon || self.l_g.len() != horizon {
            return Err(Error::invalid(format!(
                "lipschitz bundle needs {horizon} kernel constants per team"
            )));
        }
        let all = self.l_f.iter().chain(&self.l_g).chain(std::iter::once(&self.l_r));
        for &v in all {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(format!("invalid lipschitz constant {v}")));
            }
        }
        Ok(())
    }
}

/// A zero-sum mean-field team game.
///
/// Cheap to clone; kernels and reward are shared behind `Arc`s.
#[derive(Clone)]
pub struct GameModel {
    name: String,
    sizes: Sizes,
    horizon: usize,
    rho: f64,
    blue_kernel: Arc<dyn Kernel>,
    red_kernel: Arc<dyn Kernel>,
    reward: Arc<dyn RewardFn>,
    lipschitz: Option<LipschitzBundle>,
    r_max: f64,
}

impl fmt::Debug for GameModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GameModel")
            .field("name", &self.name)
            .field("sizes", &self.sizes)
            .field("horizon", &self.horizon)
            .field("rho", &self.rho)
            .field("lipschitz", &self.lipschitz)
            .field("r_max", &self.r_max)
            .finish()
    }
}

pub struct GameModelBuilder {
    name: String,
    sizes: Sizes,
    horizon: usize,
    rho: f64,
    blue_kernel: Option<Arc<dyn Kernel>>,
    red_kernel: Option<Arc<dyn Kernel>>,
    reward: Option<Arc<dyn RewardFn>>,
    lipschitz: Option<LipschitzBundle>,
    r_max: Option<f64>,
}

impl GameModelBuilder {
    pub fn name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn blue_kernel(mut self, k: impl Kernel + 'static) -> Self {
        self.blue_kernel = Some(Arc::new(k));
        self
    }

    pub fn red_kernel(mut self, k: impl Kernel + 'static) -> Self {
        self.red_kernel = Some(Arc::new(k));
        self
    }

    pub fn reward(mut self, r: impl RewardFn + 'static) -> Self {
        self.reward = Some(Arc::new(r));
        self
    }

    pub fn lipschitz(mut self, bundle: LipschitzBundle) -> Self {
        self.lipschitz = Some(bundle);
        self
    }

    pub fn r_max(mut self, r_max: f64) -> Self {
        self.r_max = Some(r_max);
        self
    }

    pub fn build(self) -> Result<GameModel> {
        let s = self.sizes;
        if s.blue_states == 0 || s.red_states == 0 || s.blue_actions == 0 || s.red_actions == 0 {
            return Err(Error::invalid("state and action spaces must be non-empty"));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::invalid(format!("rho must lie in (0, 1), got {}", self.rho)));
        }
        if let Some(b) = &self.lipschitz {
            b.validate(self.horizon)?;
        }
        let missing = |what: &str| Error::invalid(format!("model is missing its {what}"));
        let mut model = GameModel {
            name: self.name,
            sizes: s,
            horizon: self.horizon,
            rho: self.rho,
            blue_kernel: self.blue_kernel.ok_or_else(|| missing("blue kernel"))?,
            red_kernel: self.red_kernel.ok_or_else(|| missing("red kernel"))?,
            reward: self.reward.ok_or_else(|| missing("reward"))?,
            lipschitz: self.lipschitz,
            r_max: 0.0,
        };
        model.validate_kernels()?;
        model.r_max = model.validate_reward(self.r_max)?;
        Ok(model)
    }
}

impl GameModel {
    pub fn builder(sizes: Sizes, horizon: usize, rho: f64) -> GameModelBuilder {
        GameModelBuilder {
            name: "custom".into(),
            sizes,
            horizon,
            rho,
            blue_kernel: None,
            red_kernel: None,
            reward: None,
            lipschitz: None,
            r_max: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sizes(&self) -> Sizes {
        self.sizes
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn lipschitz(&self) -> Option<&LipschitzBundle> {
        self.lipschitz.as_ref()
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn num_states(&self, team: Team) -> usize {
        self.sizes.states(team)
    }

    pub fn num_actions(&self, team: Team) -> usize {
        self.sizes.actions(team)
    }

    pub fn kernel(&self, team: Team) -> &dyn Kernel {
        match team {
            Team::Blue => self.blue_kernel.as_ref(),
            Team::Red => self.red_kernel.as_ref(),
        }
    }

    /// Raw kernel row without validation; used on hot paths.
    #[inline]
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn kernel_row(
        &self,
        team: Team,
        t: usize,
        state: usize,
        action: usize,
        mu: &[f64],
        nu: &[f64],
        out: &mut [f64],
    ) {
        self.kernel(team).row(t, state, action, mu, nu, out)
    }

    /// Raw reward value; `t` is not range checked.
    #[inline]
    pub(crate) fn reward_value(&self, t: usize, mu: &[f64], nu: &[f64]) -> f64 {
        self.reward.value(t, mu, nu)
    }

    fn check_mf(&self, mu: &Distribution, nu: &Distribution) -> Result<()> {
        if mu.len() != self.sizes.blue_states || nu.len() != self.sizes.red_states {
            return Err(Error::invalid(format!(
                "mean-field dimensions ({}, {}) do not match model ({}, {})",
                mu.len(),
                nu.len(),
                self.sizes.blue_states,
                self.sizes.red_states
            )));
        }
        Ok(())
    }

    /// Next-state distribution for one agent of `team`.
    pub fn eval_kernel_row(
        &self,
        team: Team,
        t: usize,
        state: usize,
        action: usize,
        mu: &Distribution,
        nu: &Distribution,
    ) -> Result<Distribution> {
        if t >= self.horizon {
            return Err(Error::invalid(format!("t={t} must be below horizon {}", self.horizon)));
        }
        self.check_mf(mu, nu)?;
        let (ns, na) = (self.num_states(team), self.num_actions(team));
        if state >= ns || action >= na {
            return Err(Error::invalid(format!(
                "state {state} / action {action} out of range ({ns}, {na})"
            )));
        }
        let mut row = vec![0.0; ns];
        self.kernel_row(team, t, state, action, mu.as_slice(), nu.as_slice(), &mut row);
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-6 || row.iter().any(|p| *p < -1e-9 || !p.is_finite()) {
            return Err(Error::model(format!(
                "{team} kernel row (t={t}, state={state}, action={action}) is not stochastic: {row:?}"
            )));
        }
        Distribution::from_drifted(row)
    }

    pub fn eval_blue_kernel_row(
        &self,
        t: usize,
        x: usize,
        u: usize,
        mu: &Distribution,
        nu: &Distribution,
    ) -> Result<Distribution> {
        self.eval_kernel_row(Team::Blue, t, x, u, mu, nu)
    }

    pub fn eval_red_kernel_row(
        &self,
        t: usize,
        y: usize,
        v: usize,
        mu: &Distribution,
        nu: &Distribution,
    ) -> Result<Distribution> {
        self.eval_kernel_row(Team::Red, t, y, v, mu, nu)
    }

    pub fn eval_reward(&self, t: usize, mu: &Distribution, nu: &Distribution) -> Result<f64> {
        if t > self.horizon {
            return Err(Error::invalid(format!("t={t} exceeds horizon {}", self.horizon)));
        }
        self.check_mf(mu, nu)?;
        Ok(self.reward_value(t, mu.as_slice(), nu.as_slice()))
    }

    /// Joint mean-field pairs on which kernels and rewards are validated.
    pub fn validation_sample(&self, affine_only: bool) -> Vec<(Vec<f64>, Vec<f64>)> {
        let (nx, ny) = (self.sizes.blue_states, self.sizes.red_states);
        let anchors = |n: usize| {
            let mut pts: Vec<Vec<f64>> = (0..n)
                .map(|i| Distribution::dirac(n, i).into_vec())
                .collect();
            pts.push(vec![1.0 / n as f64; n]);
            pts
        };
        let (ax, ay) = (anchors(nx), anchors(ny));
        let mut sample = Vec::with_capacity(ax.len() * ay.len() + 64);
        for m in &ax {
            for n in &ay {
                sample.push((m.clone(), n.clone()));
            }
        }
        if !affine_only {
            for k in 1..=64 {
                let m = halton_simplex_point(k, nx, 0);
                let n = halton_simplex_point(k, ny, nx);
                sample.push((m, n));
            }
        }
        sample
    }

    fn validate_kernels(&self) -> Result<()> {
        for team in [Team::Blue, Team::Red] {
            let kernel = self.kernel(team);
            let sample = self.validation_sample(kernel.is_affine());
            let (ns, na) = (self.num_states(team), self.num_actions(team));
            let mut row = vec![0.0; ns];
            for t in 0..self.horizon {
                for (mu, nu) in &sample {
                    for s in 0..ns {
                        for a in 0..na {
                            row.iter_mut().for_each(|p| *p = 0.0);
                            kernel.row(t, s, a, mu, nu, &mut row);
                            let sum: f64 = row.iter().sum();
                            if (sum - 1.0).abs() > 1e-9
                                || row.iter().any(|p| *p < -1e-12 || !p.is_finite())
                            {
                                return Err(Error::model(format!(
                                    "{team} kernel row (t={t}, state={s}, action={a}) at mu={mu:?}, nu={nu:?} is not stochastic: {row:?}"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn validate_reward(&self, declared: Option<f64>) -> Result<f64> {
        let sample = self.validation_sample(false);
        let mut observed: f64 = 0.0;
        for t in 0..=self.horizon {
            for (mu, nu) in &sample {
                let r = self.reward_value(t, mu, nu);
                if !r.is_finite() {
                    return Err(Error::model(format!("reward at t={t} is not finite")));
                }
                observed = observed.max(r.abs());
            }
        }
        match declared {
            Some(r_max) if observed > r_max + 1e-12 => Err(Error::model(format!(
                "reward magnitude {observed} exceeds declared bound {r_max}"
            ))),
            Some(r_max) => Ok(r_max),
            None => Ok(observed),
        }
    }

    /// Samples random mean-field pairs and checks the declared Lipschitz
    /// inequalities for kernels and reward. Returns a description of the
    /// first violation; `Ok` when no bundle is declared.
    pub fn check_lipschitz(&self, pairs: usize, seed: u64) -> std::result::Result<(), String> {
        let Some(bundle) = &self.lipschitz else {
            return Ok(());
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (nx, ny) = (self.sizes.blue_states, self.sizes.red_states);
        let mut a = vec![0.0; nx.max(ny)];
        let mut b = vec![0.0; nx.max(ny)];
        for _ in 0..pairs {
            let mu = random_simplex(&mut rng, nx);
            let nu = random_simplex(&mut rng, ny);
            // half the pairs are local perturbations so small-scale slopes get probed
            let (mu2, nu2) = if rng.gen_bool(0.5) {
                (random_simplex(&mut rng, nx), random_simplex(&mut rng, ny))
            } else {
                let eps = 10f64.powf(rng.gen_range(-4.0..-1.0));
                (
                    perturb(&mut rng, &mu, eps),
                    perturb(&mut rng, &nu, eps),
                )
            };
            let dist = tv(&mu, &mu2) + tv(&nu, &nu2);
            for t in 0..self.horizon {
                for (team, l) in [(Team::Blue, bundle.l_f[t]), (Team::Red, bundle.l_g[t])] {
                    let ns = self.num_states(team);
                    for s in 0..ns {
                        for act in 0..self.num_actions(team) {
                            self.kernel_row(team, t, s, act, &mu, &nu, &mut a[..ns]);
                            self.kernel_row(team, t, s, act, &mu2, &nu2, &mut b[..ns]);
                            let diff: f64 = a[..ns].iter().zip(&b[..ns]).map(|(p, q)| (p - q).abs()).sum();
                            if diff > l * dist + 1e-10 {
                                return Err(format!(
                                    "{team} kernel at t={t}, state={s}, action={act}: change {diff:.6e} exceeds {l} x {dist:.6e}"
                                ));
                            }
                        }
                    }
                }
            }
            for t in 0..=self.horizon {
                let diff = (self.reward_value(t, &mu, &nu) - self.reward_value(t, &mu2, &nu2)).abs();
                if diff > bundle.l_r * dist + 1e-10 {
                    return Err(format!(
                        "reward at t={t}: change {diff:.6e} exceeds {} x {dist:.6e}",
                        bundle.l_r
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Uniformly distributed point on the simplex of dimension `n`.
pub fn random_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|w| *w /= s);
    v
}

fn perturb<R: Rng + ?Sized>(rng: &mut R, p: &[f64], eps: f64) -> Vec<f64> {
    let q = random_simplex(rng, p.len());
    p.iter().zip(&q).map(|(a, b)| (1.0 - eps) * a + eps * b).collect()
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while k > 0 {
        out += (k % base) as f64 * inv;
        k /= base;
        inv /= base as f64;
    }
    out
}

/// Deterministic low-discrepancy simplex point: Halton coordinates mapped
/// through the exponential spacing construction.
fn halton_simplex_point(k: u64, n: usize, offset: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|i| {
            let base = PRIMES[(offset + i) % PRIMES.len()];
            let u = radical_inverse(k, base).clamp(1e-12, 1.0 - 1e-12);
            -(u.ln())
        })
        .collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|w| *w /= s);
    v
}

/// Kernel affine in the mean-fields:
/// `P(s' | s, a) = base + sum_z mu(z) w_mu[z] + sum_y nu(y) w_nu[y]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineKernel {
    horizon: usize,
    states: usize,
    actions: usize,
    blue_dim: usize,
    red_dim: usize,
    // [t][s][a][s']
    base: Vec<f64>,
    // [t][s][a][s'][z]
    mu_weights: Vec<f64>,
    // [t][s][a][s'][y]
    nu_weights: Vec<f64>,
}

impl AffineKernel {
    /// `base[t][s][a][s']`, `mu_weights[t][s][a][s'][z]`, `nu_weights[t][s][a][s'][y]`.
    pub fn from_nested(
        base: &[Vec<Vec<Vec<f64>>>],
        mu_weights: &[Vec<Vec<Vec<Vec<f64>>>>],
        nu_weights: &[Vec<Vec<Vec<Vec<f64>>>>],
    ) -> Result<Self> {
        let horizon = base.len();
        let states = base.first().map_or(0, |b| b.len());
        let actions = base.first().and_then(|b| b.first()).map_or(0, |b| b.len());
        let blue_dim = first_leaf_len(mu_weights);
        let red_dim = first_leaf_len(nu_weights);
        if mu_weights.len() != horizon || nu_weights.len() != horizon {
            return Err(Error::invalid("affine kernel tables disagree on the horizon"));
        }
        let mut k = AffineKernel {
            horizon,
            states,
            actions,
            blue_dim,
            red_dim,
            base: Vec::new(),
            mu_weights: Vec::new(),
            nu_weights: Vec::new(),
        };
        for t in 0..horizon {
            check_len(base[t].len(), states, "base states")?;
            check_len(mu_weights[t].len(), states, "mu weight states")?;
            check_len(nu_weights[t].len(), states, "nu weight states")?;
            for s in 0..states {
                check_len(base[t][s].len(), actions, "base actions")?;
                check_len(mu_weights[t][s].len(), actions, "mu weight actions")?;
                check_len(nu_weights[t][s].len(), actions, "nu weight actions")?;
                for a in 0..actions {
                    check_len(base[t][s][a].len(), states, "base next states")?;
                    k.base.extend_from_slice(&base[t][s][a]);
                    check_len(mu_weights[t][s][a].len(), states, "mu weight next states")?;
                    check_len(nu_weights[t][s][a].len(), states, "nu weight next states")?;
                    for s2 in 0..states {
                        check_len(mu_weights[t][s][a][s2].len(), blue_dim, "mu weight width")?;
                        check_len(nu_weights[t][s][a][s2].len(), red_dim, "nu weight width")?;
                        k.mu_weights.extend_from_slice(&mu_weights[t][s][a][s2]);
                        k.nu_weights.extend_from_slice(&nu_weights[t][s][a][s2]);
                    }
                }
            }
        }
        Ok(k)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.blue_dim, self.red_dim)
    }

    fn base_index(&self, t: usize, s: usize, a: usize) -> usize {
        ((t * self.states + s) * self.actions + a) * self.states
    }

    pub fn base(&self, t: usize, s: usize, a: usize, s2: usize) -> f64 {
        self.base[self.base_index(t, s, a) + s2]
    }

    pub fn mu_weight(&self, t: usize, s: usize, a: usize, s2: usize, z: usize) -> f64 {
        self.mu_weights[(self.base_index(t, s, a) + s2) * self.blue_dim + z]
    }

    pub fn nu_weight(&self, t: usize, s: usize, a: usize, s2: usize, y: usize) -> f64 {
        self.nu_weights[(self.base_index(t, s, a) + s2) * self.red_dim + y]
    }

    /// Nested tables in the layout accepted by [`AffineKernel::from_nested`].
    #[allow(clippy::type_complexity)]
    pub fn to_nested(
        &self,
    ) -> (
        Vec<Vec<Vec<Vec<f64>>>>,
        Vec<Vec<Vec<Vec<Vec<f64>>>>>,
        Vec<Vec<Vec<Vec<Vec<f64>>>>>,
    ) {
        let (h, n, m) = (self.horizon, self.states, self.actions);
        let base = (0..h)
            .map(|t| {
                (0..n)
                    .map(|s| (0..m).map(|a| (0..n).map(|s2| self.base(t, s, a, s2)).collect()).collect())
                    .collect()
            })
            .collect();
        let weights = |dim: usize, get: &dyn Fn(usize, usize, usize, usize, usize) -> f64| {
            (0..h)
                .map(|t| {
                    (0..n)
                        .map(|s| {
                            (0..m)
                                .map(|a| {
                                    (0..n)
                                        .map(|s2| (0..dim).map(|z| get(t, s, a, s2, z)).collect())
                                        .collect()
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        };
        let mu = weights(self.blue_dim, &|t, s, a, s2, z| self.mu_weight(t, s, a, s2, z));
        let nu = weights(self.red_dim, &|t, s, a, s2, y| self.nu_weight(t, s, a, s2, y));
        (base, mu, nu)
    }
}

fn first_leaf_len(w: &[Vec<Vec<Vec<Vec<f64>>>>]) -> usize {
    w.first()
        .and_then(|x| x.first())
        .and_then(|x| x.first())
        .and_then(|x| x.first())
        .map_or(0, |x| x.len())
}

fn check_len(got: usize, want: usize, what: &str) -> Result<()> {
    if got != want {
        return Err(Error::invalid(format!("{what}: expected {want} entries, got {got}")));
    }
    Ok(())
}

impl Kernel for AffineKernel {
    fn row(&self, t: usize, state: usize, action: usize, mu: &[f64], nu: &[f64], out: &mut [f64]) {
        let b = self.base_index(t, state, action);
        for (s2, o) in out.iter_mut().enumerate().take(self.states) {
            let mw = &self.mu_weights[(b + s2) * self.blue_dim..(b + s2 + 1) * self.blue_dim];
            let nw = &self.nu_weights[(b + s2) * self.red_dim..(b + s2 + 1) * self.red_dim];
            let mut p = self.base[b + s2];
            p += mw.iter().zip(mu).map(|(w, m)| w * m).sum::<f64>();
            p += nw.iter().zip(nu).map(|(w, n)| w * n).sum::<f64>();
            *o = p;
        }
    }

    fn is_affine(&self) -> bool {
        true
    }
}

/// Reward affine in the mean-fields: `base[t] + mu_coeffs[t] . mu + nu_coeffs[t] . nu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineReward {
    pub base: Vec<f64>,
    pub mu_coeffs: Vec<Vec<f64>>,
    pub nu_coeffs: Vec<Vec<f64>>,
}

impl RewardFn for AffineReward {
    fn value(&self, t: usize, mu: &[f64], nu: &[f64]) -> f64 {
        let m: f64 = self.mu_coeffs[t].iter().zip(mu).map(|(c, p)| c * p).sum();
        let n: f64 = self.nu_coeffs[t].iter().zip(nu).map(|(c, p)| c * p).sum();
        self.base[t] + m + n
    }
}

/// Pairwise influence tables for [`build_pairwise_coupled_model`].
///
/// Index layouts: `f1[t][x][u][z][x']` is the pull a Blue agent at `z`
/// exerts on a Blue agent at `x` taking `u`; `f2[t][x][u][y][x']` the pull
/// of a Red agent at `y`. `g1[t][y][v][x][y']` and `g2[t][y][v][w][y']`
/// mirror these for Red. `r1[t][x]`, `r2[t][y]` are per-agent rewards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseTables {
    pub f1: Vec<Vec<Vec<Vec<Vec<f64>>>>>,
    pub f2: Vec<Vec<Vec<Vec<Vec<f64>>>>>,
    pub g1: Vec<Vec<Vec<Vec<Vec<f64>>>>>,
    pub g2: Vec<Vec<Vec<Vec<Vec<f64>>>>>,
    pub r1: Vec<Vec<f64>>,
    pub r2: Vec<Vec<f64>>,
}

fn check_stochastic_5(table: &[Vec<Vec<Vec<Vec<f64>>>>], name: &str) -> Result<()> {
    for (t, a) in table.iter().enumerate() {
        for (s, b) in a.iter().enumerate() {
            for (act, c) in b.iter().enumerate() {
                for (z, row) in c.iter().enumerate() {
                    let sum: f64 = row.iter().sum();
                    if (sum - 1.0).abs() > 1e-9 || row.iter().any(|p| *p < 0.0) {
                        return Err(Error::model(format!(
                            "{name}[{t}][{s}][{act}][{z}] is not a probability row: {row:?}"
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Reduces pairwise-coupled team dynamics to their weakly-coupled mean-field
/// form. The resulting kernels are affine in `(mu, nu)`; they are stored in
/// the canonical affine layout where base rows sum to one and every weight
/// slice sums to zero.
pub fn build_pairwise_coupled_model(tables: &PairwiseTables, rho: f64, horizon: usize) -> Result<GameModel> {
    let PairwiseTables { f1, f2, g1, g2, r1, r2 } = tables;
    for (tab, name) in [(f1, "f1"), (f2, "f2"), (g1, "g1"), (g2, "g2")] {
        if tab.len() != horizon {
            return Err(Error::invalid(format!("{name} must have {horizon} timesteps")));
        }
        check_stochastic_5(tab, name)?;
    }
    if r1.len() != horizon + 1 || r2.len() != horizon + 1 {
        return Err(Error::invalid(format!("rewards must have {} timesteps", horizon + 1)));
    }
    let dims = |tab: &Vec<Vec<Vec<Vec<Vec<f64>>>>>| -> Result<(usize, usize, usize)> {
        let s = tab.first().map(|a| a.len()).ok_or_else(|| Error::invalid("empty table"))?;
        let a = tab[0].first().map_or(0, |b| b.len());
        let z = tab[0].first().and_then(|b| b.first()).map_or(0, |c| c.len());
        Ok((s, a, z))
    };
    let (nx, nu_, nz) = if horizon > 0 { dims(f1)? } else { (r1[0].len(), 1, r1[0].len()) };
    let (ny, nv, nw) = if horizon > 0 { dims(g2)? } else { (r2[0].len(), 1, r2[0].len()) };
    if nz != nx || nw != ny {
        return Err(Error::invalid("pairwise tables have inconsistent state dimensions"));
    }
    let reduce = |own: &Vec<Vec<Vec<Vec<Vec<f64>>>>>,
                  other: &Vec<Vec<Vec<Vec<Vec<f64>>>>>,
                  own_weight: f64,
                  own_is_blue: bool|
     -> Result<AffineKernel> {
        let mut base = Vec::new();
        let mut mu_w = Vec::new();
        let mut nu_w = Vec::new();
        for t in 0..horizon {
            let (mut bt, mut mt, mut nt) = (Vec::new(), Vec::new(), Vec::new());
            for s in 0..own[t].len() {
                let (mut bs, mut ms, mut ns) = (Vec::new(), Vec::new(), Vec::new());
                for a in 0..own[t][s].len() {
                    // own-team influence indexed by own-team states, other by the other team
                    let own_rows = &own[t][s][a];
                    let other_rows = &other[t][s][a];
                    let n_next = own_rows[0].len();
                    let b: Vec<f64> = (0..n_next)
                        .map(|s2| own_weight * own_rows[0][s2] + (1.0 - own_weight) * other_rows[0][s2])
                        .collect();
                    let own_slices: Vec<Vec<f64>> = (0..n_next)
                        .map(|s2| {
                            (0..own_rows.len())
                                .map(|z| own_weight * (own_rows[z][s2] - own_rows[0][s2]))
                                .collect()
                        })
                        .collect();
                    let other_slices: Vec<Vec<f64>> = (0..n_next)
                        .map(|s2| {
                            (0..other_rows.len())
                                .map(|z| (1.0 - own_weight) * (other_rows[z][s2] - other_rows[0][s2]))
                                .collect()
                        })
                        .collect();
                    bs.push(b);
                    if own_is_blue {
                        ms.push(own_slices);
                        ns.push(other_slices);
                    } else {
                        ms.push(other_slices);
                        ns.push(own_slices);
                    }
                }
                bt.push(bs);
                mt.push(ms);
                nt.push(ns);
            }
            base.push(bt);
            mu_w.push(mt);
            nu_w.push(nt);
        }
        AffineKernel::from_nested(&base, &mu_w, &nu_w)
    };
    let (blue, red) = if horizon > 0 {
        (reduce(f1, f2, rho, true)?, reduce(g2, g1, 1.0 - rho, false)?)
    } else {
        (
            AffineKernel::from_nested(&[], &[], &[])?,
            AffineKernel::from_nested(&[], &[], &[])?,
        )
    };
    let reward = AffineReward {
        base: vec![0.0; horizon + 1],
        mu_coeffs: r1.iter().map(|r| r.iter().map(|v| rho * v).collect()).collect(),
        nu_coeffs: r2.iter().map(|r| r.iter().map(|v| -(1.0 - rho) * v).collect()).collect(),
    };
    let max_abs = |r: &Vec<Vec<f64>>| r.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let l_r = 2.0 * max_abs(r1).max(max_abs(r2));
    GameModel::builder(Sizes::new(nx, ny, nu_, nv), horizon, rho)
        .name("pairwise")
        .blue_kernel(blue)
        .red_kernel(red)
        .reward(reward)
        .lipschitz(LipschitzBundle::constant(2.0, 2.0, l_r, horizon))
        .build()
}
