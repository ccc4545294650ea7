//! Randomized verification suites with TAP-style reports.

use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distribution::{counts_to_distribution, empirical_distribution, tv, tv_distance, Distribution};
use crate::error::{Error, Result};
use crate::fixtures::{self, example1, example2, info_counterexample, info_counterexample_policies, pairwise, random_pairwise_tables, two_node, Fixture};
use crate::meanfield::{extract_policy, hausdorff_distance, hull_membership, mf_step, reachable_set};
use crate::model::{random_simplex, GameModel, Team};
use crate::par::{map_range, Execution};
use crate::policy::{AgentPolicy, ConstantPolicy, LocalPolicy, PurePolicy, TeamStrategy};
use crate::simulator::{estimate_value, iid_ed_gap, measure_mf_gap, simulate_episode, InitialStates};
use crate::solver::{lipschitz_value_constant, solve, SimplexGrid, SolveOptions, ValueKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Core,
    Meanfield,
    Solver,
    Simulator,
    All,
}

impl Suite {
    pub fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Core, Suite::Meanfield, Suite::Solver, Suite::Simulator],
            s => vec![s],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Core => "core",
            Suite::Meanfield => "meanfield",
            Suite::Solver => "solver",
            Suite::Simulator => "simulator",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "core" => Ok(Suite::Core),
            "meanfield" => Ok(Suite::Meanfield),
            "solver" => Ok(Suite::Solver),
            "simulator" => Ok(Suite::Simulator),
            "all" => Ok(Suite::All),
            _ => Err(Error::invalid(format!("unknown suite '{s}'"))),
        }
    }
}

/// Sample sizes of the randomized checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random mixed-policy images tested for hull membership.
    pub hull_images: usize,
    /// Random pairs for the Hausdorff and value continuity checks.
    pub pairs: usize,
    /// Random reachable targets for policy extraction.
    pub targets: usize,
    /// Randomized configurations per mean-field approximation check.
    pub configs: usize,
    /// Monte Carlo samples per configuration.
    pub samples: usize,
    /// Grid resolution used by the solver checks.
    pub bins: u32,
    pub execution: Execution,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            hull_images: 10_000,
            pairs: 1_000,
            targets: 1_000,
            configs: 20,
            samples: 10_000,
            bins: 60,
            execution: Execution::Parallel,
        }
    }
}

impl VerifyOptions {
    /// Small sample sizes for smoke runs.
    pub fn quick(seed: u64) -> Self {
        VerifyOptions {
            seed,
            hull_images: 500,
            pairs: 100,
            targets: 100,
            configs: 4,
            samples: 1_000,
            bins: 20,
            execution: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    fn from_result(name: &str, r: Result<String>) -> Self {
        match r {
            Ok(detail) => CheckResult::new(name, true, detail),
            Err(e) => CheckResult::new(name, false, e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// TAP version 13 rendering of several reports.
pub fn to_tap(reports: &[SuiteReport]) -> String {
    let total: usize = reports.iter().map(|r| r.checks.len()).sum();
    let mut out = format!("TAP version 13\n1..{total}\n");
    let mut i = 0;
    for r in reports {
        for c in &r.checks {
            i += 1;
            let status = if c.passed { "ok" } else { "not ok" };
            let _ = writeln!(out, "{status} {i} - {}/{} # {}", r.suite.name(), c.name, c.detail.replace('\n', " "));
        }
    }
    out
}

pub fn run_suites(suite: Suite, opts: &VerifyOptions) -> Vec<SuiteReport> {
    suite.expand().into_iter().map(|s| run_suite(s, opts)).collect()
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> SuiteReport {
    let checks = match suite {
        Suite::All => run_suites(Suite::All, opts).into_iter().flat_map(|r| r.checks).collect(),
        Suite::Core => vec![
            CheckResult::from_result("distribution_invariants", distribution_invariants(opts)),
            CheckResult::from_result("fixture_kernels", fixture_kernels()),
            CheckResult::from_result("fixture_lipschitz", fixture_lipschitz(opts)),
        ],
        Suite::Meanfield => vec![
            CheckResult::from_result("hull_property", hull_property(opts)),
            CheckResult::from_result("hausdorff_lipschitz", hausdorff_lipschitz(opts)),
            CheckResult::from_result("extraction_round_trip", extraction_round_trip(opts)),
        ],
        Suite::Solver => vec![
            CheckResult::from_result("value_lipschitz", value_lipschitz(opts)),
            CheckResult::from_result("upper_dominates_lower", upper_dominates_lower(opts)),
            CheckResult::from_result("execution_modes_agree", solver_modes_agree(opts)),
        ],
        Suite::Simulator => vec![
            CheckResult::from_result("identical_mf_gap", mf_gap_check(opts, false)),
            CheckResult::from_result("non_identical_mf_gap", mf_gap_check(opts, true)),
            CheckResult::from_result("iid_weak_law", weak_law(opts)),
            CheckResult::from_result("two_node_value", two_node_value(opts)),
            CheckResult::from_result("ed_not_information_state", info_state(opts)),
            CheckResult::from_result("reproducible_logs", reproducible(opts)),
        ],
    };
    SuiteReport { suite, checks }
}

fn fail(msg: String) -> Error {
    Error::invalid(msg)
}

fn rng(opts: &VerifyOptions, salt: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(opts.seed);
    r.set_stream(salt);
    r
}

fn random_dist<R: Rng>(rng: &mut R, n: usize) -> Distribution {
    Distribution::new(random_simplex(rng, n)).expect("random simplex point")
}

fn random_policy<R: Rng>(rng: &mut R, ns: usize, na: usize) -> LocalPolicy {
    LocalPolicy::from_rows((0..ns).map(|_| random_simplex(rng, na)).collect()).expect("random policy")
}

/// Fixtures with Lipschitz declarations used by the geometry checks.
pub fn geometry_fixtures(seed: u64) -> Result<Vec<Fixture>> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    Ok(vec![
        two_node(0.5, 2)?,
        two_node(0.7, 2)?,
        example1()?,
        example2()?,
        pairwise(&random_pairwise_tables(&mut r, 2, 2, 2, 2, 2), 0.5, 2)?,
        pairwise(&random_pairwise_tables(&mut r, 3, 2, 2, 2, 2), 0.4, 2)?,
        pairwise(&random_pairwise_tables(&mut r, 2, 3, 3, 2, 2), 0.6, 2)?,
    ])
}

fn distribution_invariants(opts: &VerifyOptions) -> Result<String> {
    let mut rng = rng(opts, 1);
    let n = opts.pairs.max(1);
    for _ in 0..n {
        let k = rng.gen_range(2..6);
        let (a, b, c) = (random_dist(&mut rng, k), random_dist(&mut rng, k), random_dist(&mut rng, k));
        let (ab, ba) = (tv_distance(&a, &b)?, tv_distance(&b, &a)?);
        if ab != ba || !(0.0..=1.0).contains(&ab) {
            return Err(fail(format!("tv not symmetric or out of range: {ab} {ba}")));
        }
        if tv_distance(&a, &c)? > ab + tv_distance(&b, &c)? + 1e-12 {
            return Err(fail("tv triangle inequality violated".into()));
        }
        let agents = rng.gen_range(1..40);
        let states: Vec<usize> = (0..agents).map(|_| rng.gen_range(0..k)).collect();
        let ed = empirical_distribution(&states, k)?;
        let sum: f64 = ed.as_slice().iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(fail(format!("empirical distribution sums to {sum}")));
        }
    }
    Ok(format!("{n} random triples and empirical distributions"))
}

fn fixture_kernels() -> Result<String> {
    let mut rows = 0;
    for name in fixtures::FIXTURE_NAMES {
        let f = fixtures::load_fixture(name, &Default::default())?;
        let m = &f.model;
        let s = m.sizes();
        for (mu, nu) in m.validation_sample(false) {
            let (mu, nu) = (Distribution::new(mu)?, Distribution::new(nu)?);
            for t in 0..m.horizon() {
                for team in [Team::Blue, Team::Red] {
                    for st in 0..s.states(team) {
                        for a in 0..s.actions(team) {
                            m.eval_kernel_row(team, t, st, a, &mu, &nu)?;
                            rows += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{rows} kernel rows validated"))
}

fn fixture_lipschitz(opts: &VerifyOptions) -> Result<String> {
    let mut checked = Vec::new();
    for f in geometry_fixtures(opts.seed)?.into_iter().chain([info_counterexample()?]) {
        if !f.lipschitz {
            continue;
        }
        f.model.check_lipschitz(opts.pairs, opts.seed).map_err(|e| fail(format!("{}: {e}", f.name)))?;
        checked.push(f.name);
    }
    Ok(format!("declared constants hold on {} pairs for {}", opts.pairs, checked.join(",")))
}

fn hull_property(opts: &VerifyOptions) -> Result<String> {
    let fx = geometry_fixtures(opts.seed)?;
    let worst = map_range(opts.execution, opts.hull_images, |i| -> Result<f64> {
        let mut rng = rng(opts, 1000 + i as u64);
        let f = &fx[i % fx.len()];
        let m = &f.model;
        let s = m.sizes();
        let t = rng.gen_range(0..m.horizon());
        let team = if rng.gen_bool(0.5) { Team::Blue } else { Team::Red };
        let (mu, nu) = (random_dist(&mut rng, s.blue_states), random_dist(&mut rng, s.red_states));
        let pi = random_policy(&mut rng, s.states(team), s.actions(team));
        let image = mf_step(m, team, t, &mu, &nu, &pi)?;
        let set = reachable_set(m, team, t, &mu, &nu)?;
        Ok(hull_membership(&set, &image, 1e-9)?.residual)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?
    .into_iter()
    .fold(0.0, f64::max);
    if worst > 1e-8 {
        return Err(fail(format!("max residual {worst:e} > 1e-8")));
    }
    Ok(format!("{} images, max residual {worst:.3e}", opts.hull_images))
}

fn hausdorff_lipschitz(opts: &VerifyOptions) -> Result<String> {
    let fx = geometry_fixtures(opts.seed)?;
    let ratios = map_range(opts.execution, opts.pairs, |i| -> Result<(f64, f64)> {
        let mut rng = rng(opts, 20_000 + i as u64);
        let f = &fx[i % fx.len()];
        let m = &f.model;
        let s = m.sizes();
        let t = rng.gen_range(0..m.horizon());
        let team = if i % 2 == 0 { Team::Blue } else { Team::Red };
        let bundle = m.lipschitz().ok_or_else(|| fail(format!("{} has no Lipschitz bundle", f.name)))?;
        let l = match team {
            Team::Blue => bundle.l_f[t],
            Team::Red => bundle.l_g[t],
        };
        let (mu, nu) = (random_dist(&mut rng, s.blue_states), random_dist(&mut rng, s.red_states));
        // half of the pairs are local perturbations
        let (mu2, nu2) = if rng.gen_bool(0.5) {
            let eps = rng.gen_range(1e-3..0.1);
            (
                mu.mix(&random_dist(&mut rng, s.blue_states), eps)?,
                nu.mix(&random_dist(&mut rng, s.red_states), eps)?,
            )
        } else {
            (random_dist(&mut rng, s.blue_states), random_dist(&mut rng, s.red_states))
        };
        let d = tv(mu.as_slice(), mu2.as_slice()) + tv(nu.as_slice(), nu2.as_slice());
        let h = hausdorff_distance(&reachable_set(m, team, t, &mu, &nu)?, &reachable_set(m, team, t, &mu2, &nu2)?)?;
        Ok((h, (1.0 + l / 2.0) * d))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for (h, bound) in &ratios {
        if *h > bound + 1e-9 {
            return Err(fail(format!("hausdorff {h} exceeds bound {bound}")));
        }
        if *bound > 0.0 {
            worst = worst.max(h / bound);
        }
    }
    Ok(format!("{} pairs, max ratio to bound {worst:.4}", opts.pairs))
}

fn extraction_round_trip(opts: &VerifyOptions) -> Result<String> {
    let fx = geometry_fixtures(opts.seed)?;
    let worst = map_range(opts.execution, opts.targets, |i| -> Result<f64> {
        let mut rng = rng(opts, 40_000 + i as u64);
        let f = &fx[i % fx.len()];
        let m = &f.model;
        let s = m.sizes();
        let t = rng.gen_range(0..m.horizon());
        let team = if rng.gen_bool(0.5) { Team::Blue } else { Team::Red };
        let (mu, nu) = (random_dist(&mut rng, s.blue_states), random_dist(&mut rng, s.red_states));
        let pi = random_policy(&mut rng, s.states(team), s.actions(team));
        let target = mf_step(m, team, t, &mu, &nu, &pi)?;
        let extracted = extract_policy(m, t, &mu, &nu, &target, team)?;
        let reached = mf_step(m, team, t, &mu, &nu, &extracted)?;
        Ok(tv(reached.as_slice(), target.as_slice()))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?
    .into_iter()
    .fold(0.0, f64::max);
    if worst > 1e-8 {
        return Err(fail(format!("max round-trip error {worst:e} > 1e-8")));
    }
    Ok(format!("{} targets, max TV error {worst:.3e}", opts.targets))
}

fn solver_fixtures(opts: &VerifyOptions) -> Result<Vec<Fixture>> {
    let mut r = ChaCha8Rng::seed_from_u64(opts.seed);
    Ok(vec![two_node(0.5, 2)?, example1()?, pairwise(&random_pairwise_tables(&mut r, 2, 2, 2, 2, 2), 0.5, 2)?])
}

/// Allowance for grid resolution in the value continuity check.
pub fn grid_slack(model: &GameModel, bins: u32, t: usize) -> Result<f64> {
    let bundle = model.lipschitz().ok_or_else(|| fail("model has no Lipschitz bundle".into()))?;
    Ok(2.0 * lipschitz_value_constant(bundle, t, model.horizon())? / bins as f64)
}

fn value_lipschitz(opts: &VerifyOptions) -> Result<String> {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (fi, f) in solver_fixtures(opts)?.iter().enumerate() {
        let m = &f.model;
        let s = m.sizes();
        let bg = SimplexGrid::new(s.blue_states, opts.bins)?;
        let rg = SimplexGrid::new(s.red_states, opts.bins)?;
        let so = SolveOptions {
            execution: opts.execution,
            ..SolveOptions::default()
        };
        let bundle = m.lipschitz().ok_or_else(|| fail(format!("{} has no Lipschitz bundle", f.name)))?;
        for kind in [ValueKind::Lower, ValueKind::Upper] {
            let grid = solve(m, &bg, &rg, &so, kind)?;
            let mut rng = rng(opts, 60_000 + fi as u64 * 2 + kind as u64);
            for _ in 0..opts.pairs {
                let t = rng.gen_range(0..=m.horizon());
                let (b1, b2) = (rng.gen_range(0..bg.len()), rng.gen_range(0..bg.len()));
                let (r1, r2) = (rng.gen_range(0..rg.len()), rng.gen_range(0..rg.len()));
                let d = tv(&bg.coords(b1), &bg.coords(b2)) + tv(&rg.coords(r1), &rg.coords(r2));
                let dv = (grid.value_at_index(t, b1, r1) - grid.value_at_index(t, b2, r2)).abs();
                let bound = lipschitz_value_constant(bundle, t, m.horizon())? * d + grid_slack(m, opts.bins, t)?;
                if dv > bound + 1e-9 {
                    return Err(fail(format!("{} {kind} t={t}: |dJ|={dv} > {bound}", f.name)));
                }
                if bound > 0.0 {
                    worst = worst.max(dv / bound);
                }
                count += 1;
            }
        }
    }
    Ok(format!("{count} pairs at G={}, max ratio to bound {worst:.4}", opts.bins))
}

fn upper_dominates_lower(opts: &VerifyOptions) -> Result<String> {
    let mut points = 0;
    for f in solver_fixtures(opts)? {
        let s = f.model.sizes();
        let bg = SimplexGrid::new(s.blue_states, opts.bins)?;
        let rg = SimplexGrid::new(s.red_states, opts.bins)?;
        let so = SolveOptions {
            execution: opts.execution,
            ..SolveOptions::default()
        };
        let lo = solve(&f.model, &bg, &rg, &so, ValueKind::Lower)?;
        let up = solve(&f.model, &bg, &rg, &so, ValueKind::Upper)?;
        for t in 0..=f.model.horizon() {
            for (a, b) in lo.values(t).iter().zip(up.values(t)) {
                if *a > b + 1e-12 {
                    return Err(fail(format!("{} t={t}: lower {a} > upper {b}", f.name)));
                }
                points += 1;
            }
        }
    }
    Ok(format!("{points} grid values"))
}

fn solver_modes_agree(opts: &VerifyOptions) -> Result<String> {
    let f = two_node(0.5, 2)?;
    let g = SimplexGrid::new(2, opts.bins)?;
    let a = solve(&f.model, &g, &g, &SolveOptions::default(), ValueKind::Lower)?;
    let b = solve(&f.model, &g, &g, &SolveOptions::sequential(), ValueKind::Lower)?;
    for t in 0..=f.model.horizon() {
        if a.values(t) != b.values(t) || (t < f.model.horizon() && a.successors(t) != b.successors(t)) {
            return Err(fail(format!("parallel and sequential grids differ at t={t}")));
        }
    }
    Ok("bit-identical values and successors".into())
}

fn mf_gap_check(opts: &VerifyOptions, non_identical: bool) -> Result<String> {
    let mut rng = rng(opts, if non_identical { 80_001 } else { 80_000 });
    let mut worst = f64::NEG_INFINITY;
    for c in 0..opts.configs {
        let (nx, ny) = (rng.gen_range(2..4), rng.gen_range(2..4));
        let tables = random_pairwise_tables(&mut rng, nx, ny, 2, 2, 1);
        let f = pairwise(&tables, rng.gen_range(0.2..0.8), 1)?;
        let (n1, n2) = (rng.gen_range(1..40usize), rng.gen_range(1..40usize));
        let init = InitialStates::new((0..n1).map(|_| rng.gen_range(0..nx)).collect(), (0..n2).map(|_| rng.gen_range(0..ny)).collect());
        let blue = if non_identical {
            TeamStrategy::per_agent(
                (0..n1)
                    .map(|_| Arc::new(ConstantPolicy(random_policy(&mut rng, nx, 2))) as Arc<dyn AgentPolicy>)
                    .collect(),
            )
        } else {
            TeamStrategy::constant(random_policy(&mut rng, nx, 2))
        };
        let red = TeamStrategy::constant(random_policy(&mut rng, ny, 2));
        let g = measure_mf_gap(&f.model, &blue, &red, &init, 0, opts.samples, opts.seed.wrapping_add(c as u64), opts.execution)?;
        let bounds = [nx as f64 / 2.0 * (1.0 / n1 as f64).sqrt(), ny as f64 / 2.0 * (1.0 / n2 as f64).sqrt()];
        for (est, bound, team) in [(g.blue, bounds[0], "blue"), (g.red, bounds[1], "red")] {
            if est.mean > bound + 3.0 * est.stderr {
                return Err(fail(format!(
                    "config {c} {team}: gap {:.5} ± {:.5} exceeds {bound:.5} (N1={n1}, N2={n2})",
                    est.mean, est.stderr
                )));
            }
            worst = worst.max(est.mean / bound);
        }
    }
    Ok(format!("{} configs x {} samples, max gap/bound {worst:.3}", opts.configs, opts.samples))
}

fn weak_law(opts: &VerifyOptions) -> Result<String> {
    let mut rng = rng(opts, 90_000);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for &k in &[2usize, 3, 5] {
        for &n in &[4usize, 16, 64, 256] {
            let p = random_dist(&mut rng, k);
            let est = iid_ed_gap(&p, n, opts.samples, opts.seed ^ (k * 1000 + n) as u64, opts.execution)?;
            let bound = 0.5 * (k as f64 / n as f64).sqrt();
            if est.mean > bound + 3.0 * est.stderr {
                return Err(fail(format!("|X|={k} N={n}: {:.5} > {bound:.5}", est.mean)));
            }
            worst = worst.max(est.mean / bound);
            cases += 1;
        }
    }
    Ok(format!("{cases} cases, max gap/bound {worst:.3}"))
}

fn two_node_value(opts: &VerifyOptions) -> Result<String> {
    let f = two_node(0.5, 1)?;
    let mv = TeamStrategy::constant(PurePolicy::new(vec![1, 1], 2)?.to_local(2));
    let stay = TeamStrategy::constant(PurePolicy::new(vec![0, 0], 2)?.to_local(2));
    let init = InitialStates::new(vec![0, 0], vec![0, 1]);
    let est = estimate_value(&f.model, &mv, &stay, &init, opts.samples, opts.seed, opts.execution)?;
    if (est.mean - 0.625).abs() > 3.0 * est.stderr {
        return Err(fail(format!("mean {:.4} ± {:.4} differs from 0.625", est.mean, est.stderr)));
    }
    Ok(format!("mean {:.4} ± {:.4}", est.mean, est.stderr))
}

fn info_state(opts: &VerifyOptions) -> Result<String> {
    let f = info_counterexample()?;
    let [p0, p1] = info_counterexample_policies();
    let blue = TeamStrategy::per_agent(vec![Arc::new(ConstantPolicy(p0)), Arc::new(ConstantPolicy(p1))]);
    let red = TeamStrategy::constant(LocalPolicy::uniform(1, 1));
    let a = simulate_episode(&f.model, &blue, &red, &InitialStates::new(vec![0, 1], vec![0]), opts.seed, 0)?;
    let b = simulate_episode(&f.model, &blue, &red, &InitialStates::new(vec![1, 0], vec![0]), opts.seed, 0)?;
    if a.steps[0].mu != b.steps[0].mu || a.total != 0.0 || b.total != 0.5 {
        return Err(fail(format!("values {} and {}", a.total, b.total)));
    }
    Ok("equal EDs, values 0 and 0.5".into())
}

fn reproducible(opts: &VerifyOptions) -> Result<String> {
    let f = two_node(0.5, 3)?;
    let mut rng = rng(opts, 95_000);
    let blue = TeamStrategy::constant(random_policy(&mut rng, 2, 2));
    let red = TeamStrategy::constant(random_policy(&mut rng, 2, 2));
    let init = InitialStates::new(vec![0, 0, 1, 1, 0], vec![1, 0, 1]);
    let n = opts.samples.min(2_000);
    let logs = |exec| crate::simulator::map_episodes(&f.model, &blue, &red, &init, n, opts.seed, exec, |l| l);
    let (a, b) = (logs(Execution::Parallel)?, logs(Execution::Sequential)?);
    if a != b {
        return Err(fail("parallel and sequential logs differ".into()));
    }
    for log in &a {
        for s in &log.steps {
            let mu = counts_to_distribution(&crate::distribution::state_counts(&s.blue_states, 2)?)?;
            if mu != s.mu {
                return Err(fail(format!("episode {} t={}: logged ED differs from agent states", log.episode, s.t)));
            }
        }
    }
    Ok(format!("{n} episodes bit-identical across execution modes"))
}
