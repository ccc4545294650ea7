//! Subcommand definitions and implementations.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mftg_core::fixtures::{
    discontinuous_target_policy, example2_target_policy, info_counterexample_policies, load_fixture, Fixture, FixtureParams, FIXTURE_NAMES,
};
use mftg_core::meanfield::extract_nearest_policy;
use mftg_core::policy::ConstantPolicy;
use mftg_core::simulator::{
    induced_identical_strategy, map_episodes, suboptimality_sweep, Estimate, InitialStates, OracleOptions, SweepConfig, SweepCoordinator, SweepRow,
};
use mftg_core::solver::{solve, CoordinationStrategy, SimplexGrid, SolveOptions, ValueKind};
use mftg_core::verify::{run_suites, to_tap, Suite, VerifyOptions};
use mftg_core::{AgentPolicy, Distribution, Execution, GameModel, LocalPolicy, PurePolicy, Team, TeamStrategy};

use crate::artifact::{model_sizes, write_json, write_text, write_value_grid, Provenance, SolveArtifact, SolveSummary, ValueAt, SUMMARY_FILE};
use crate::canonical::{canonical, canonical_line, format_float};
use crate::error::{io_err, CliError, CliResult};
use crate::spec::AffineModelSpec;

#[derive(Debug, Parser)]
#[command(name = "mftg", version, about = "Zero-sum mean-field team games: solve, simulate, sweep, verify")]
pub struct Cli {
    /// Worker threads for the data-parallel stages.
    #[arg(long, global = true, env = "MFTG_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the lower and/or upper coordinator game on a grid.
    Solve(SolveArgs),
    /// Run finite-population episodes and write JSON-lines logs.
    Simulate(SimulateArgs),
    /// Exploitability gap of the coordinator strategy across team sizes.
    Sweep(SweepArgs),
    /// Run the property suites and print a TAP report.
    Verify(VerifyArgs),
    /// Local policy steering a team to its recorded grid successor.
    Policy(PolicyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Fixture name or path to an affine JSON model.
    #[arg(long)]
    pub model: String,
    /// Fixture parameter rho.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Fixture parameter horizon.
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Indicator radius of the discontinuous fixture.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Seed of the random pairwise fixture.
    #[arg(long)]
    pub fixture_seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolveKind {
    Lower,
    Upper,
    Both,
}

impl SolveKind {
    fn kinds(self) -> Vec<ValueKind> {
        match self {
            SolveKind::Lower => vec![ValueKind::Lower],
            SolveKind::Upper => vec![ValueKind::Upper],
            SolveKind::Both => vec![ValueKind::Lower, ValueKind::Upper],
        }
    }

    fn name(self) -> &'static str {
        match self {
            SolveKind::Lower => "lower",
            SolveKind::Upper => "upper",
            SolveKind::Both => "both",
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Grid resolution G.
    #[arg(long)]
    pub bins: u32,
    #[arg(long, value_enum, default_value = "both")]
    pub kind: SolveKind,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Reachability tolerance (infinity norm); half a grid cell by default.
    #[arg(long)]
    pub membership_tol: Option<f64>,
    /// Blue mean-field at which to report values, e.g. 0.96,0.04.
    #[arg(long)]
    pub mu: Option<String>,
    /// Red mean-field at which to report values.
    #[arg(long)]
    pub nu: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub n1: usize,
    #[arg(long)]
    pub n2: usize,
    /// coordinator | uniform | pure:a,b,.. | mixed:p,q;r,s | example2-target | discontinuous-target | info-counterexample
    #[arg(long, default_value = "uniform")]
    pub blue: String,
    #[arg(long, default_value = "uniform")]
    pub red: String,
    #[arg(long, default_value_t = 1000)]
    pub episodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Directory written by `solve`; needed by the coordinator strategy.
    #[arg(long)]
    pub solve_artifact: Option<PathBuf>,
    /// Initial Blue mean-field (rounded to team counts); fixture default otherwise.
    #[arg(long)]
    pub mu0: Option<String>,
    #[arg(long)]
    pub nu0: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CoordinatorSource {
    Analytic,
    Grid,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Fixture name.
    #[arg(long, default_value = "example2")]
    pub model: String,
    /// Blue team sizes, e.g. 3,6,12.
    #[arg(long)]
    pub n_list: String,
    /// Initial Red mean-field; fixture default otherwise.
    #[arg(long)]
    pub nu0: Option<String>,
    /// Red team size; smallest size representing nu0 exactly by default.
    #[arg(long)]
    pub n2: Option<usize>,
    /// Monte Carlo episodes per row; 0 evaluates exactly.
    #[arg(long, default_value_t = 0)]
    pub episodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// analytic (example2 only) or grid (lower grid of --solve-artifact).
    #[arg(long, value_enum)]
    pub coordinator: Option<CoordinatorSource>,
    #[arg(long)]
    pub solve_artifact: Option<PathBuf>,
    /// Cap on joint count states per time step.
    #[arg(long)]
    pub state_cap: Option<u128>,
    /// Cap on Red count plans per state.
    #[arg(long)]
    pub plan_cap: Option<u128>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Smaller sample sizes.
    #[arg(long)]
    pub quick: bool,
    /// Also write the TAP report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TeamArg {
    Blue,
    Red,
}

impl From<TeamArg> for Team {
    fn from(t: TeamArg) -> Team {
        match t {
            TeamArg::Blue => Team::Blue,
            TeamArg::Red => Team::Red,
        }
    }
}

#[derive(Debug, Args)]
pub struct PolicyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub solve_artifact: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub t: usize,
    #[arg(long)]
    pub mu: String,
    #[arg(long)]
    pub nu: String,
    #[arg(long, value_enum, default_value = "blue")]
    pub kind: TeamArg,
    /// Grid to follow; lower for Blue and upper for Red by default.
    #[arg(long, value_enum)]
    pub grid: Option<GridArg>,
    /// Output file; standard output otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridArg {
    Lower,
    Upper,
}

/// A model together with the fixture it came from, if any.
pub struct LoadedModel {
    pub model: GameModel,
    pub fixture: Option<Fixture>,
}

pub fn load_model(args: &ModelArgs) -> CliResult<LoadedModel> {
    if FIXTURE_NAMES.contains(&args.model.as_str()) {
        let params = FixtureParams {
            rho: args.rho,
            horizon: args.horizon,
            radius: args.radius,
            seed: args.fixture_seed,
        };
        let f = load_fixture(&args.model, &params)?;
        return Ok(LoadedModel {
            model: f.model.clone(),
            fixture: Some(f),
        });
    }
    let path = Path::new(&args.model);
    if !path.is_file() {
        return Err(CliError::Usage(format!(
            "'{}' is neither a fixture ({}) nor a model file",
            args.model,
            FIXTURE_NAMES.join(", ")
        )));
    }
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let spec = AffineModelSpec::from_json(&text)?;
    Ok(LoadedModel {
        model: spec.build()?,
        fixture: None,
    })
}

pub fn parse_floats(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("'{x}' is not a number in '{s}'"))))
        .collect()
}

pub fn parse_distribution(s: &str, n: usize) -> CliResult<Distribution> {
    let v = parse_floats(s)?;
    if v.len() != n {
        return Err(CliError::Usage(format!("'{s}' has {} entries, expected {n}", v.len())));
    }
    Ok(Distribution::new(v)?)
}

fn parse_usizes(s: &str) -> CliResult<Vec<usize>> {
    s.split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|_| CliError::Usage(format!("'{x}' is not a non-negative integer in '{s}'"))))
        .collect()
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Initial mean-fields from flags, falling back to the fixture defaults.
fn initial_fields(loaded: &LoadedModel, mu: Option<&str>, nu: Option<&str>) -> CliResult<Option<(Distribution, Distribution)>> {
    let m = &loaded.model;
    let (nx, ny) = (m.num_states(Team::Blue), m.num_states(Team::Red));
    let mu = match (mu, &loaded.fixture) {
        (Some(s), _) => Some(parse_distribution(s, nx)?),
        (None, Some(f)) => Some(f.mu0.clone()),
        (None, None) => None,
    };
    let nu = match (nu, &loaded.fixture) {
        (Some(s), _) => Some(parse_distribution(s, ny)?),
        (None, Some(f)) => Some(f.nu0.clone()),
        (None, None) => None,
    };
    Ok(mu.zip(nu))
}

pub fn run(cli: Cli, argv: &[String]) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Solve(a) => cmd_solve(a, &Provenance::new(None, argv)),
        Command::Simulate(a) => cmd_simulate(a, &Provenance::new(Some(a.seed), argv)),
        Command::Sweep(a) => cmd_sweep(a, &Provenance::new(Some(a.seed), argv)),
        Command::Verify(a) => cmd_verify(a),
        Command::Policy(a) => cmd_policy(a, &Provenance::new(None, argv)),
    }
}

pub fn cmd_solve(a: &SolveArgs, prov: &Provenance) -> CliResult<()> {
    let loaded = load_model(&a.model)?;
    let m = &loaded.model;
    if a.bins < 2 {
        return Err(CliError::Usage("--bins must be at least 2".into()));
    }
    if let Some(tol) = a.membership_tol {
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(CliError::Usage("--membership-tol must be a non-negative number".into()));
        }
    }
    let query = initial_fields(&loaded, a.mu.as_deref(), a.nu.as_deref())?;
    let bg = SimplexGrid::new(m.num_states(Team::Blue), a.bins)?;
    let rg = SimplexGrid::new(m.num_states(Team::Red), a.bins)?;
    let opts = SolveOptions {
        membership_tol: a.membership_tol,
        ..SolveOptions::default()
    };
    create_dir(&a.out)?;

    let start = Instant::now();
    let mut grids = Vec::new();
    for kind in a.kind.kinds() {
        let grid = solve(m, &bg, &rg, &opts, kind)?;
        log::info!("solved {kind} grid of {} in {:.2}s", m.name(), start.elapsed().as_secs_f64());
        grids.push(grid);
    }
    let runtime_secs = start.elapsed().as_secs_f64();
    for g in &grids {
        write_value_grid(&a.out, g, prov)?;
    }

    let find = |k: ValueKind| grids.iter().find(|g| g.kind() == k);
    let value_at = match query {
        Some((mu, nu)) => Some(ValueAt {
            lower: find(ValueKind::Lower).map(|g| g.value(0, &mu, &nu)).transpose()?,
            upper: find(ValueKind::Upper).map(|g| g.value(0, &mu, &nu)).transpose()?,
            mu: mu.into_vec(),
            nu: nu.into_vec(),
        }),
        None => None,
    };
    let max_abs_gap = match (find(ValueKind::Lower), find(ValueKind::Upper)) {
        (Some(lo), Some(up)) => Some(
            (0..=m.horizon())
                .flat_map(|t| lo.values(t).iter().zip(up.values(t)).map(|(l, u)| (u - l).abs()).collect::<Vec<_>>())
                .fold(0.0, f64::max),
        ),
        _ => None,
    };
    let summary = SolveSummary {
        provenance: prov.clone(),
        model: a.model.model.clone(),
        model_name: m.name().to_string(),
        sizes: model_sizes(m),
        horizon: m.horizon(),
        bins: a.bins,
        kind: a.kind.name().into(),
        grids: a.kind.kinds(),
        membership_tol: opts.resolve_tol(&bg, &rg),
        runtime_secs,
        value_at,
        max_abs_gap,
    };
    write_json(&a.out.join(SUMMARY_FILE), &summary)?;
    print!("{}", canonical(&summary).expect("summary serializes"));
    Ok(())
}

fn per_agent(policies: Vec<LocalPolicy>, n: usize) -> TeamStrategy {
    TeamStrategy::per_agent((0..n).map(|i| Arc::new(ConstantPolicy(policies[i % policies.len()].clone())) as Arc<dyn AgentPolicy>).collect())
}

/// Resolves a strategy flag for `team`.
pub fn parse_strategy(spec: &str, team: Team, loaded: &LoadedModel, artifact: Option<&Path>, team_size: usize) -> CliResult<TeamStrategy> {
    let m = &loaded.model;
    let (ns, na) = (m.num_states(team), m.num_actions(team));
    let fixture = loaded.fixture.as_ref().map(|f| f.name.as_str());
    let needs = |name: &str, want: &str, t: Team| -> CliResult<()> {
        if fixture != Some(want) || team != t {
            return Err(CliError::Usage(format!("strategy '{name}' is a {t} strategy of the {want} fixture")));
        }
        Ok(())
    };
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    match kind {
        "coordinator" => {
            let dir = artifact.ok_or_else(|| CliError::MissingArtifact("the coordinator strategy needs --solve-artifact".into()))?;
            let art = SolveArtifact::open(dir)?;
            let grid = art.grid_for(team, m)?;
            Ok(induced_identical_strategy(Arc::new(CoordinationStrategy::from_grid(m, grid, team))))
        }
        "uniform" => Ok(TeamStrategy::constant(LocalPolicy::uniform(ns, na))),
        "pure" => {
            let assign = parse_usizes(arg)?;
            if assign.len() != ns {
                return Err(CliError::Usage(format!("pure strategy needs {ns} actions, got '{arg}'")));
            }
            Ok(TeamStrategy::constant(PurePolicy::new(assign, na)?.to_local(na)))
        }
        "mixed" => {
            let rows = arg.split(';').map(parse_floats).collect::<CliResult<Vec<_>>>()?;
            if rows.len() != ns || rows.iter().any(|r| r.len() != na) {
                return Err(CliError::Usage(format!("mixed strategy needs {ns} rows of {na} probabilities, got '{arg}'")));
            }
            Ok(TeamStrategy::constant(LocalPolicy::from_rows(rows)?))
        }
        "example2-target" => {
            needs(kind, "example2", Team::Blue)?;
            Ok(TeamStrategy::identical(|_t: usize, s: usize, mu: &Distribution, _nu: &Distribution| {
                Ok(example2_target_policy(mu)?.row(s).clone())
            }))
        }
        "discontinuous-target" => {
            needs(kind, "discontinuous", Team::Blue)?;
            Ok(TeamStrategy::identical(|_t: usize, s: usize, mu: &Distribution, _nu: &Distribution| {
                Ok(discontinuous_target_policy(mu)?.row(s).clone())
            }))
        }
        "info-counterexample" => {
            needs(kind, "info_counterexample", Team::Blue)?;
            Ok(per_agent(info_counterexample_policies().to_vec(), team_size))
        }
        other => Err(CliError::Usage(format!("unknown strategy '{other}'"))),
    }
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    provenance: &'a Provenance,
    model: &'a str,
    n1: usize,
    n2: usize,
    blue: &'a str,
    red: &'a str,
    episodes: usize,
    seed: u64,
    mean: f64,
    stderr: f64,
    mean_mu: Vec<Vec<f64>>,
    mean_nu: Vec<Vec<f64>>,
    mean_reward: Vec<f64>,
}

pub const EPISODES_FILE: &str = "episodes.jsonl";

fn column_means(rows: impl Iterator<Item = Vec<f64>>, count: usize) -> Vec<f64> {
    let mut acc: Vec<f64> = Vec::new();
    for r in rows {
        if acc.is_empty() {
            acc = vec![0.0; r.len()];
        }
        acc.iter_mut().zip(r).for_each(|(a, x)| *a += x);
    }
    acc.iter().map(|a| a / count as f64).collect()
}

pub fn cmd_simulate(a: &SimulateArgs, prov: &Provenance) -> CliResult<()> {
    let loaded = load_model(&a.model)?;
    let m = &loaded.model;
    if a.n1 == 0 || a.n2 == 0 || a.episodes == 0 {
        return Err(CliError::Usage("--n1, --n2 and --episodes must be positive".into()));
    }
    let (mu0, nu0) = initial_fields(&loaded, a.mu0.as_deref(), a.nu0.as_deref())?
        .ok_or_else(|| CliError::Usage("model files need explicit --mu0 and --nu0".into()))?;
    let blue = parse_strategy(&a.blue, Team::Blue, &loaded, a.solve_artifact.as_deref(), a.n1)?;
    let red = parse_strategy(&a.red, Team::Red, &loaded, a.solve_artifact.as_deref(), a.n2)?;
    let init = InitialStates::from_distribution(&mu0, a.n1, &nu0, a.n2);
    create_dir(&a.out)?;

    let logs = map_episodes(m, &blue, &red, &init, a.episodes, a.seed, Execution::Parallel, |l| l)?;
    let path = a.out.join(EPISODES_FILE);
    let file = fs::File::create(&path).map_err(io_err(&path))?;
    let mut w = BufWriter::new(file);
    let emit = |w: &mut BufWriter<fs::File>| -> std::io::Result<()> {
        writeln!(w, "{}", canonical_line(&serde_json::json!({ "provenance": prov })).expect("provenance serializes"))?;
        for log in &logs {
            writeln!(w, "{}", canonical_line(log).expect("episode log serializes"))?;
        }
        w.flush()
    };
    emit(&mut w).map_err(io_err(&path))?;

    let totals: Vec<f64> = logs.iter().map(|l| l.total).collect();
    let est = Estimate::from_samples(&totals)?;
    let steps = m.horizon() + 1;
    let n = logs.len();
    let summary = SimulateSummary {
        provenance: prov,
        model: &a.model.model,
        n1: a.n1,
        n2: a.n2,
        blue: &a.blue,
        red: &a.red,
        episodes: a.episodes,
        seed: a.seed,
        mean: est.mean,
        stderr: est.stderr,
        mean_mu: (0..steps).map(|t| column_means(logs.iter().map(|l| l.steps[t].mu.as_slice().to_vec()), n)).collect(),
        mean_nu: (0..steps).map(|t| column_means(logs.iter().map(|l| l.steps[t].nu.as_slice().to_vec()), n)).collect(),
        mean_reward: (0..steps).map(|t| logs.iter().map(|l| l.steps[t].reward).sum::<f64>() / n as f64).collect(),
    };
    write_json(&a.out.join(SUMMARY_FILE), &summary)?;
    println!("mean {} stderr {} over {} episodes", format_float(est.mean), format_float(est.stderr), a.episodes);
    Ok(())
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    provenance: &'a Provenance,
    model: &'a str,
    nu0: Vec<f64>,
    episodes: usize,
    seed: u64,
    #[serde(rename = "K")]
    k: f64,
    envelope_holds: bool,
    rows: &'a [SweepRow],
}

pub const SWEEP_FILE: &str = "sweep.csv";

pub fn cmd_sweep(a: &SweepArgs, prov: &Provenance) -> CliResult<()> {
    if !FIXTURE_NAMES.contains(&a.model.as_str()) {
        return Err(CliError::Usage(format!("sweep needs a named fixture, got '{}'", a.model)));
    }
    let fixture = load_fixture(&a.model, &FixtureParams::default())?;
    let n_list = parse_usizes(&a.n_list)?;
    if n_list.is_empty() {
        return Err(CliError::Usage("--n-list is empty".into()));
    }
    let nu0 = match &a.nu0 {
        Some(s) => parse_distribution(s, fixture.model.num_states(Team::Red))?,
        None => fixture.nu0.clone(),
    };
    let source = a.coordinator.unwrap_or(if fixture.name == "example2" { CoordinatorSource::Analytic } else { CoordinatorSource::Grid });
    let coordinator = match source {
        CoordinatorSource::Analytic => SweepCoordinator::Analytic,
        CoordinatorSource::Grid => {
            let dir = a.solve_artifact.as_deref().ok_or_else(|| CliError::MissingArtifact("the grid coordinator needs --solve-artifact".into()))?;
            let grid = SolveArtifact::open(dir)?.grid_for(Team::Blue, &fixture.model)?;
            SweepCoordinator::Strategy(Arc::new(CoordinationStrategy::from_grid(&fixture.model, grid, Team::Blue)))
        }
    };
    let mut oracle = OracleOptions::default();
    if let Some(c) = a.state_cap {
        oracle.state_cap = c;
    }
    if let Some(c) = a.plan_cap {
        oracle.plan_cap = c;
    }
    let cfg = SweepConfig {
        n_list,
        nu0: nu0.clone(),
        n2: a.n2,
        episodes: a.episodes,
        seed: a.seed,
        coordinator,
        oracle,
    };
    let rows = suboptimality_sweep(&fixture, &cfg)?;
    let k = rows[0].gap * (rows[0].n1 as f64).sqrt();
    let envelope_holds = rows.iter().all(|r| r.gap <= k / (r.n1 as f64).sqrt() + 3.0 * r.stderr + 1e-12);

    create_dir(&a.out)?;
    let mut csv = prov.csv_comment();
    csv.push_str("n1,n2,gap,stderr,exact_opt,coord_value\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n1,
            r.n2,
            format_float(r.gap),
            format_float(r.stderr),
            format_float(r.exact_opt),
            format_float(r.coord_value)
        ));
    }
    write_text(&a.out.join(SWEEP_FILE), &csv)?;
    let summary = SweepSummary {
        provenance: prov,
        model: &a.model,
        nu0: nu0.into_vec(),
        episodes: a.episodes,
        seed: a.seed,
        k,
        envelope_holds,
        rows: &rows,
    };
    write_json(&a.out.join(SUMMARY_FILE), &summary)?;
    for r in &rows {
        println!("n1 {:>5}  gap {:.6}  stderr {:.6}", r.n1, r.gap, r.stderr);
    }
    println!("K {k:.6}  envelope {}", if envelope_holds { "holds" } else { "violated" });
    Ok(())
}

pub fn cmd_verify(a: &VerifyArgs) -> CliResult<()> {
    let suite: Suite = a.suite.parse().map_err(|e: mftg_core::Error| CliError::Usage(e.to_string()))?;
    let opts = if a.quick { VerifyOptions::quick(a.seed) } else { VerifyOptions { seed: a.seed, ..VerifyOptions::default() } };
    let reports = run_suites(suite, &opts);
    let tap = to_tap(&reports);
    print!("{tap}");
    if let Some(path) = &a.out {
        write_text(path, &tap)?;
    }
    let failed: Vec<String> = reports
        .iter()
        .flat_map(|r| r.checks.iter().filter(|c| !c.passed).map(move |c| format!("{}/{}", r.suite.name(), c.name)))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification {
            failed: failed.len(),
            names: failed.join(", "),
        })
    }
}

#[derive(Serialize)]
struct PolicyOutput<'a> {
    provenance: &'a Provenance,
    t: usize,
    team: String,
    grid: ValueKind,
    mu: Vec<f64>,
    nu: Vec<f64>,
    successor: Vec<f64>,
    reached: Vec<f64>,
    policy: Vec<Vec<f64>>,
    residual: f64,
    membership_tol: f64,
}

pub fn cmd_policy(a: &PolicyArgs, prov: &Provenance) -> CliResult<()> {
    let loaded = load_model(&a.model)?;
    let m = &loaded.model;
    let team = Team::from(a.kind);
    if a.t >= m.horizon() {
        return Err(CliError::Usage(format!("--t must be below the horizon {}", m.horizon())));
    }
    let mu = parse_distribution(&a.mu, m.num_states(Team::Blue))?;
    let nu = parse_distribution(&a.nu, m.num_states(Team::Red))?;
    let art = SolveArtifact::open(&a.solve_artifact)?;
    let grid = match a.grid {
        Some(GridArg::Lower) => art.grid(ValueKind::Lower, m)?,
        Some(GridArg::Upper) => art.grid(ValueKind::Upper, m)?,
        None => art.grid_for(team, m)?,
    };
    let (blue_next, red_next) = grid.successor(a.t, &mu, &nu)?;
    let target = if team == Team::Blue { blue_next } else { red_next };
    let (policy, reached, residual) = extract_nearest_policy(m, a.t, &mu, &nu, &target, team)?;
    if residual > grid.membership_tol() + 1e-9 {
        return Err(CliError::Core(mftg_core::Error::Reachability { residual }));
    }
    let out = PolicyOutput {
        provenance: prov,
        t: a.t,
        team: team.to_string(),
        grid: grid.kind(),
        mu: mu.into_vec(),
        nu: nu.into_vec(),
        successor: target.into_vec(),
        reached: reached.into_vec(),
        policy: policy.rows().iter().map(|r| r.as_slice().to_vec()).collect(),
        residual,
        membership_tol: grid.membership_tol(),
    };
    let text = canonical(&out).expect("policy output serializes");
    match &a.out {
        Some(path) => write_text(path, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}
