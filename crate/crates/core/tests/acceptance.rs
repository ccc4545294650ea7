//! End-to-end acceptance criteria. Runs without the libtest harness so that
//! one PASS/FAIL line per criterion is always printed.

use std::sync::Arc;
use std::time::Instant;

use mftg_core::fixtures::{discontinuous, example1, example2, example2_escape_probability, info_counterexample, info_counterexample_policies};
use mftg_core::policy::ConstantPolicy;
use mftg_core::simulator::{
    exact_team_optimum, identical_count_transition, simulate_episode, suboptimality_sweep, InitialStates, JointCountState, OracleOptions, SweepConfig,
    SweepCoordinator,
};
use mftg_core::solver::{rollout_coordinator, solve, CoordinationStrategy, SimplexGrid, SolveOptions, ValueKind};
use mftg_core::verify::{run_suite, Suite, VerifyOptions};
use mftg_core::{counts_to_distribution, Distribution, LocalPolicy, Team, TeamStrategy};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn example1_golden() -> Outcome {
    let f = example1().map_err(e)?;
    let g = SimplexGrid::new(2, 500).map_err(e)?;
    let opts = SolveOptions::default();
    let lower = Arc::new(solve(&f.model, &g, &g, &opts, ValueKind::Lower).map_err(e)?);
    let upper = solve(&f.model, &g, &g, &opts, ValueKind::Upper).map_err(e)?;
    let lo = lower.value(0, &f.mu0, &f.nu0).map_err(e)?;
    let up = upper.value(0, &f.mu0, &f.nu0).map_err(e)?;
    let (succ, _) = lower.successor(0, &f.mu0, &f.nu0).map_err(e)?;

    let red = Arc::new(CoordinationStrategy::from_grid(&f.model, lower.clone(), Team::Red));
    let blue = CoordinationStrategy::best_response(&f.model, lower.clone(), Team::Blue, red.clone());
    let exploit = rollout_coordinator(&f.model, &blue, &red, &f.mu0, &f.nu0).map_err(e)?;

    let msg = format!(
        "lower {lo:.4} (0.5298), upper {up:.4} (0.5384), successor [{:.4}, {:.4}] ([0.4172, 0.5828]), red-first nu1 {:.4} mu1 {:.4}, exploit {:.4} (0.5442)",
        succ[0], succ[1], exploit.nu[1][0], exploit.mu[1][0], exploit.total
    );
    check(
        (lo - 0.5298).abs() <= 0.005 && (up - 0.5384).abs() <= 0.005 && (succ[0] - 0.4172).abs() <= 0.01 && (exploit.total - 0.5442).abs() <= 0.005,
        msg,
    )
}

fn example2_infinite() -> Outcome {
    let f = example2().map_err(e)?;
    let bins = 200;
    let g = SimplexGrid::new(2, bins).map_err(e)?;
    let opts = SolveOptions::default();
    let lower = solve(&f.model, &g, &g, &opts, ValueKind::Lower).map_err(e)?;
    let upper = solve(&f.model, &g, &g, &opts, ValueKind::Upper).map_err(e)?;
    let (mut worst_formula, mut worst_gap) = (0.0f64, 0.0f64);
    for b in 0..g.len() {
        for r in 0..g.len() {
            let nu_y1 = g.coords(r)[0];
            for grid in [&lower, &upper] {
                worst_formula = worst_formula.max((grid.value_at_index(0, b, r) + nu_y1).abs());
            }
            worst_gap = worst_gap.max((upper.value_at_index(0, b, r) - lower.value_at_index(0, b, r)).abs());
        }
    }
    let g_inv = 1.0 / bins as f64;
    check(
        worst_formula <= g_inv + 0.005 && worst_gap <= 2.0 * g_inv,
        format!("max |J0 + nu0(y1)| = {worst_formula:.2e} (<= {:.4}), max |upper - lower| = {worst_gap:.2e} (<= {:.4})", g_inv + 0.005, 2.0 * g_inv),
    )
}

fn example2_finite() -> Outcome {
    let f = example2().map_err(e)?;
    let init = JointCountState::new(vec![3, 0], vec![3, 2]).map_err(e)?;
    let nu0 = counts_to_distribution(&init.red_counts).map_err(e)?;
    let blue = TeamStrategy::identical(|_t: usize, s: usize, mu: &Distribution, _nu: &Distribution| {
        Ok(mftg_core::fixtures::example2_target_policy(mu)?.row(s).clone())
    });
    let law = identical_count_transition(&f.model, Team::Blue, &blue, 0, &init).map_err(e)?;
    let prob = |c: [u32; 2]| law.iter().find(|(k, _)| k[..] == c).map_or(0.0, |x| x.1);
    let probs = [prob([3, 0]), prob([2, 1]), prob([1, 2]), prob([0, 3])];
    let escape: f64 = law
        .iter()
        .map(|(c, p)| p * example2_escape_probability(counts_to_distribution(c).unwrap().as_slice()))
        .sum();
    let opt = exact_team_optimum(&f.model, &init, &OracleOptions::default()).map_err(e)?;
    let opt_escape = (-nu0[0] - opt.value) / nu0[1];
    let expected = -nu0[0] - 0.016 * nu0[1];
    let ok = probs.iter().zip([0.354, 0.439, 0.182, 0.025]).all(|(p, r)| (p - r).abs() <= 1e-3)
        && (escape - 0.518).abs() <= 1e-3
        && (opt_escape - 0.016).abs() <= 1e-3
        && (opt.value - expected).abs() <= 1e-3;
    check(
        ok,
        format!(
            "ED probs [{:.4}, {:.4}, {:.4}, {:.4}], identical escape {escape:.4}, optimal escape {opt_escape:.4}, J3* {:.5} ({expected:.5})",
            probs[0], probs[1], probs[2], probs[3], opt.value
        ),
    )
}

fn suboptimality_rate() -> Outcome {
    let f = example2().map_err(e)?;
    let cfg = SweepConfig {
        n_list: vec![3, 6, 12, 24, 48, 96, 192, 384],
        nu0: Distribution::new(vec![0.6, 0.4]).map_err(e)?,
        n2: None,
        episodes: 0,
        seed: 0,
        coordinator: SweepCoordinator::Analytic,
        oracle: OracleOptions::default(),
    };
    let rows = suboptimality_sweep(&f, &cfg).map_err(e)?;
    let k = rows[0].gap * (rows[0].n1 as f64).sqrt();
    let mut ok = true;
    for (i, r) in rows.iter().enumerate() {
        ok &= r.gap >= -3.0 * r.stderr - 1e-12;
        ok &= r.gap <= k / (r.n1 as f64).sqrt() + 1e-12;
        if i > 0 {
            ok &= r.gap <= rows[i - 1].gap + 3.0 * (r.stderr + rows[i - 1].stderr) + 1e-12;
        }
    }
    let table: Vec<String> = rows.iter().map(|r| format!("{}:{:.4}", r.n1, r.gap)).collect();
    check(ok, format!("K = {k:.4}, gaps {}", table.join(" ")))
}

fn suite_checks(suite: Suite, names: &[&str]) -> Outcome {
    let report = run_suite(suite, &VerifyOptions::default());
    let mut ok = true;
    let mut parts = Vec::new();
    for n in names {
        match report.check(n) {
            Some(c) => {
                ok &= c.passed;
                parts.push(format!("{n}: {}", c.detail));
            }
            None => {
                ok = false;
                parts.push(format!("{n}: missing"));
            }
        }
    }
    check(ok, parts.join("; "))
}

fn mf_bounds() -> Outcome {
    suite_checks(Suite::Simulator, &["identical_mf_gap", "non_identical_mf_gap", "iid_weak_law"])
}

fn geometry() -> Outcome {
    let a = suite_checks(Suite::Meanfield, &["hull_property", "hausdorff_lipschitz"]);
    let b = suite_checks(Suite::Solver, &["value_lipschitz"]);
    match (a, b) {
        (Ok(x), Ok(y)) => Ok(format!("{x}; {y}")),
        (x, y) => Err(format!("{}; {}", x.unwrap_or_else(|s| s), y.unwrap_or_else(|s| s))),
    }
}

fn extraction() -> Outcome {
    suite_checks(Suite::Meanfield, &["extraction_round_trip"])
}

fn counterexamples() -> Outcome {
    let f = info_counterexample().map_err(e)?;
    let [p0, p1] = info_counterexample_policies();
    let blue = TeamStrategy::per_agent(vec![Arc::new(ConstantPolicy(p0)), Arc::new(ConstantPolicy(p1))]);
    let red = TeamStrategy::constant(LocalPolicy::uniform(1, 1));
    let a = simulate_episode(&f.model, &blue, &red, &InitialStates::new(vec![0, 1], vec![0]), 7, 0).map_err(e)?;
    let b = simulate_episode(&f.model, &blue, &red, &InitialStates::new(vec![1, 0], vec![0]), 7, 0).map_err(e)?;
    let info_ok = a.steps[0].mu == b.steps[0].mu && a.total == 0.0 && b.total == 0.5;

    let bins = 100;
    let d = discontinuous(1.0 / (2.0 * bins as f64)).map_err(e)?;
    let g = SimplexGrid::new(2, bins).map_err(e)?;
    let one = SimplexGrid::new(1, bins).map_err(e)?;
    let lower = solve(&d.model, &g, &one, &SolveOptions::default(), ValueKind::Lower).map_err(e)?;
    let grid_value = lower.value(0, &d.mu0, &d.nu0).map_err(e)?;
    let mut finite = Vec::new();
    for n1 in 1..=16u32 {
        let init = JointCountState::new(vec![n1, 0], vec![1]).map_err(e)?;
        finite.push(exact_team_optimum(&d.model, &init, &OracleOptions::default()).map_err(e)?.value);
    }
    let finite_ok = finite.iter().all(|v| *v == 0.0);
    check(
        info_ok && grid_value == 1.0 && finite_ok,
        format!(
            "ED-equal starts give {} and {}; discontinuous game: grid value {grid_value} at G={bins}, finite values for N1=1..16 all zero: {finite_ok}",
            a.total, b.total
        ),
    )
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("1 example1 golden values", example1_golden),
        ("2 example2 infinite population", example2_infinite),
        ("3 example2 finite population", example2_finite),
        ("4 suboptimality rate", suboptimality_rate),
        ("5 mean-field approximation bounds", mf_bounds),
        ("6 geometry and continuity", geometry),
        ("7 policy extraction round trip", extraction),
        ("8 counter-examples", counterexamples),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.contains(o.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS criterion {name} [{secs:.1}s]: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name} [{secs:.1}s]: {msg}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
