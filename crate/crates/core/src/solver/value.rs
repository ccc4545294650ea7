//! Backward induction of the lower (max-min) and upper (min-max) values of
//! the coordinator game over a discretised pair of simplices.

use serde::{Deserialize, Serialize};

use super::grid::{Lookup, SimplexGrid};
use super::rmq::{Extreme, SparseTable};
use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::meanfield::{first_coordinate_interval, hull_membership_of, reachable_set};
use crate::model::{GameModel, Team};
use crate::par::{map_range, Execution};

/// Largest grid resolution accepted by the general-dimension path.
pub const GENERAL_MAX_BINS: u32 = 40;
/// Largest state count accepted by the general-dimension path.
pub const GENERAL_MAX_STATES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Lower,
    Upper,
}

impl std::fmt::Display for ValueKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ValueKind::Lower => "lower",
            ValueKind::Upper => "upper",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Infinity-norm tolerance for grid points to count as reachable;
    /// `None` means half a cell of the finer grid.
    pub membership_tol: Option<f64>,
    pub execution: Execution,
    pub lookup: Lookup,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            membership_tol: None,
            execution: Execution::Parallel,
            lookup: Lookup::Nearest,
        }
    }
}

impl SolveOptions {
    pub fn sequential() -> Self {
        SolveOptions {
            execution: Execution::Sequential,
            ..Self::default()
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.membership_tol = Some(tol);
        self
    }

    pub fn resolve_tol(&self, blue: &SimplexGrid, red: &SimplexGrid) -> f64 {
        self.membership_tol
            .unwrap_or_else(|| 0.5 / blue.bins().max(red.bins()) as f64)
    }
}

/// Solved value function of the coordinator game on a grid.
#[derive(Debug, Clone)]
pub struct ValueGrid {
    kind: ValueKind,
    blue_grid: SimplexGrid,
    red_grid: SimplexGrid,
    membership_tol: f64,
    lookup: Lookup,
    // values[t][i * red_len + j]
    values: Vec<Vec<f64>>,
    // successors[t][i * red_len + j] = (blue index, red index) at t + 1
    successors: Vec<Vec<(u32, u32)>>,
}

impl ValueGrid {
    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn blue_grid(&self) -> &SimplexGrid {
        &self.blue_grid
    }

    pub fn red_grid(&self) -> &SimplexGrid {
        &self.red_grid
    }

    pub fn grid(&self, team: Team) -> &SimplexGrid {
        match team {
            Team::Blue => &self.blue_grid,
            Team::Red => &self.red_grid,
        }
    }

    pub fn horizon(&self) -> usize {
        self.values.len() - 1
    }

    pub fn membership_tol(&self) -> f64 {
        self.membership_tol
    }

    pub fn lookup(&self) -> Lookup {
        self.lookup
    }

    pub fn set_lookup(&mut self, lookup: Lookup) {
        self.lookup = lookup;
    }

    /// Flat value array at `t`, indexed `blue * red_len + red`.
    pub fn values(&self, t: usize) -> &[f64] {
        &self.values[t]
    }

    pub fn value_at_index(&self, t: usize, blue: usize, red: usize) -> f64 {
        self.values[t][blue * self.red_grid.len() + red]
    }

    /// Recorded `(blue, red)` grid indices at `t + 1`.
    pub fn successor_at_index(&self, t: usize, blue: usize, red: usize) -> (usize, usize) {
        let (a, b) = self.successors[t][blue * self.red_grid.len() + red];
        (a as usize, b as usize)
    }

    pub fn snap(&self, mu: &Distribution, nu: &Distribution) -> Result<(usize, usize)> {
        Ok((self.blue_grid.nearest_index(mu.as_slice())?, self.red_grid.nearest_index(nu.as_slice())?))
    }

    /// Value at an arbitrary pair of mean-fields using the lookup rule.
    pub fn value(&self, t: usize, mu: &Distribution, nu: &Distribution) -> Result<f64> {
        if t > self.horizon() {
            return Err(Error::invalid(format!("t={t} beyond horizon {}", self.horizon())));
        }
        match self.lookup {
            Lookup::Nearest => {
                let (i, j) = self.snap(mu, nu)?;
                Ok(self.value_at_index(t, i, j))
            }
            Lookup::Bilinear => self.bilinear(t, mu.as_slice(), nu.as_slice()),
        }
    }

    fn bilinear(&self, t: usize, mu: &[f64], nu: &[f64]) -> Result<f64> {
        if self.blue_grid.dim() > 2 || self.red_grid.dim() > 2 {
            return Err(Error::invalid("bilinear lookup needs two-state grids"));
        }
        let axis = |grid: &SimplexGrid, p: &[f64]| -> (usize, usize, f64) {
            if grid.dim() == 1 {
                return (0, 0, 0.0);
            }
            let g = grid.bins() as f64;
            let x = (p[0] * g).clamp(0.0, g);
            let lo = (x.floor() as usize).min(grid.bins() as usize - 1);
            (lo, lo + 1, x - lo as f64)
        };
        let (i0, i1, a) = axis(&self.blue_grid, mu);
        let (j0, j1, b) = axis(&self.red_grid, nu);
        let v = |i, j| self.value_at_index(t, i, j);
        Ok((1.0 - a) * ((1.0 - b) * v(i0, j0) + b * v(i0, j1)) + a * ((1.0 - b) * v(i1, j0) + b * v(i1, j1)))
    }

    /// Recorded successor mean-fields after snapping `(mu, nu)`.
    pub fn successor(&self, t: usize, mu: &Distribution, nu: &Distribution) -> Result<(Distribution, Distribution)> {
        if t >= self.horizon() {
            return Err(Error::invalid(format!("no successor at t={t} with horizon {}", self.horizon())));
        }
        let (i, j) = self.snap(mu, nu)?;
        let (a, b) = self.successor_at_index(t, i, j);
        Ok((self.blue_grid.point(a), self.red_grid.point(b)))
    }

    /// Rebuilds a grid from exported parts; used when reloading artifacts.
    pub fn from_parts(
        kind: ValueKind,
        blue_grid: SimplexGrid,
        red_grid: SimplexGrid,
        membership_tol: f64,
        values: Vec<Vec<f64>>,
        successors: Vec<Vec<(u32, u32)>>,
    ) -> Result<Self> {
        let n = blue_grid.len() * red_grid.len();
        if values.is_empty() || values.iter().any(|v| v.len() != n) {
            return Err(Error::invalid("value arrays do not match the grids"));
        }
        if successors.len() + 1 != values.len() || successors.iter().any(|s| s.len() != n) {
            return Err(Error::invalid("successor arrays do not match the grids"));
        }
        Ok(ValueGrid {
            kind,
            blue_grid,
            red_grid,
            membership_tol,
            lookup: Lookup::Nearest,
            values,
            successors,
        })
    }

    pub fn successors(&self, t: usize) -> &[(u32, u32)] {
        &self.successors[t]
    }
}

fn team_coords(grid: &SimplexGrid) -> Vec<Vec<f64>> {
    (0..grid.len()).map(|i| grid.coords(i)).collect()
}

fn check_grids(model: &GameModel, blue: &SimplexGrid, red: &SimplexGrid) -> Result<()> {
    let s = model.sizes();
    if blue.dim() != s.blue_states || red.dim() != s.red_states {
        return Err(Error::invalid(format!(
            "grid dimensions ({}, {}) do not match model states ({}, {})",
            blue.dim(),
            red.dim(),
            s.blue_states,
            s.red_states
        )));
    }
    Ok(())
}

fn uses_interval_path(blue: &SimplexGrid, red: &SimplexGrid) -> bool {
    blue.dim() <= 2 && red.dim() <= 2
}

fn check_general_caps(blue: &SimplexGrid, red: &SimplexGrid) -> Result<()> {
    for g in [blue, red] {
        if g.dim() > GENERAL_MAX_STATES {
            return Err(Error::Capacity {
                what: format!("general-dimension solve over {} states", g.dim()),
                required: g.dim() as u128,
                cap: GENERAL_MAX_STATES as u128,
            });
        }
        if g.bins() > GENERAL_MAX_BINS {
            return Err(Error::Capacity {
                what: format!("general-dimension solve with {} bins", g.bins()),
                required: g.bins() as u128,
                cap: GENERAL_MAX_BINS as u128,
            });
        }
    }
    Ok(())
}

/// Candidate successors of `team`: grid points within `tol` of its reachable set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Candidates {
    Range(usize, usize),
    List(Vec<usize>),
}

impl Candidates {
    pub fn iter(&self) -> Box<dyn Iterator<Item = usize> + '_> {
        match self {
            Candidates::Range(a, b) => Box::new(*a..=*b),
            Candidates::List(v) => Box::new(v.iter().copied()),
        }
    }
}

pub(crate) fn candidates(
    model: &GameModel,
    grid: &SimplexGrid,
    team: Team,
    t: usize,
    mu: &[f64],
    nu: &[f64],
    tol: f64,
) -> Result<Option<Candidates>> {
    if grid.dim() <= 2 {
        if grid.dim() == 1 {
            return Ok(Some(Candidates::Range(0, 0)));
        }
        let (lo, hi) = first_coordinate_interval(model, team, t, mu, nu);
        return Ok(grid.interval_range(lo, hi, tol).map(|(a, b)| Candidates::Range(a, b)));
    }
    let mu_d = Distribution::from_drifted(mu.to_vec())?;
    let nu_d = Distribution::from_drifted(nu.to_vec())?;
    let set = reachable_set(model, team, t, &mu_d, &nu_d)?;
    let d = grid.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for v in &set.vertices {
        for e in 0..d {
            lo[e] = lo[e].min(v[e]);
            hi[e] = hi[e].max(v[e]);
        }
    }
    let mut out = Vec::new();
    for idx in 0..grid.len() {
        let p = grid.coords(idx);
        if (0..d).any(|e| p[e] < lo[e] - tol - 1e-12 || p[e] > hi[e] + tol + 1e-12) {
            continue;
        }
        if hull_membership_of(&set.vertices, &grid.point(idx), tol + 1e-12)?.is_feasible() {
            out.push(idx);
        }
    }
    Ok((!out.is_empty()).then_some(Candidates::List(out)))
}

fn degenerate(t: usize, team: Team, mu: &[f64], nu: &[f64], tol: f64) -> Error {
    Error::DegenerateGrid {
        t,
        message: format!("no {team} grid point within {tol:.3e} of the reachable set at mu={mu:?}, nu={nu:?}"),
    }
}

pub fn solve_lower(model: &GameModel, blue_grid: &SimplexGrid, red_grid: &SimplexGrid, options: &SolveOptions) -> Result<ValueGrid> {
    solve(model, blue_grid, red_grid, options, ValueKind::Lower)
}

pub fn solve_upper(model: &GameModel, blue_grid: &SimplexGrid, red_grid: &SimplexGrid, options: &SolveOptions) -> Result<ValueGrid> {
    solve(model, blue_grid, red_grid, options, ValueKind::Upper)
}

pub fn solve(
    model: &GameModel,
    blue_grid: &SimplexGrid,
    red_grid: &SimplexGrid,
    options: &SolveOptions,
    kind: ValueKind,
) -> Result<ValueGrid> {
    check_grids(model, blue_grid, red_grid)?;
    let fast = uses_interval_path(blue_grid, red_grid);
    if !fast {
        check_general_caps(blue_grid, red_grid)?;
    }
    if options.lookup == Lookup::Bilinear && !fast {
        return Err(Error::invalid("bilinear lookup needs two-state grids"));
    }
    let tol = options.resolve_tol(blue_grid, red_grid);
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::invalid(format!("membership tolerance {tol} must be finite and non-negative")));
    }
    let horizon = model.horizon();
    let (nb, nr) = (blue_grid.len(), red_grid.len());
    let bc = team_coords(blue_grid);
    let rc = team_coords(red_grid);
    let exec = options.execution;

    let terminal = map_range(exec, nb * nr, |k| model.reward_value(horizon, &bc[k / nr], &rc[k % nr]));
    let mut values = vec![Vec::new(); horizon + 1];
    let mut successors = vec![Vec::new(); horizon];
    values[horizon] = terminal;

    for t in (0..horizon).rev() {
        let next = &values[t + 1];
        let v = |i: usize, j: usize| next[i * nr + j];
        // lower: per-row minimum over red; upper: per-column maximum over blue
        let tables: Vec<SparseTable> = match kind {
            ValueKind::Lower => map_range(exec, nb, |i| SparseTable::build(nr, Extreme::Min, |j| v(i, j))),
            ValueKind::Upper => map_range(exec, nr, |j| SparseTable::build(nb, Extreme::Max, |i| v(i, j))),
        };
        let cells = map_range(exec, nb * nr, |k| -> Result<(f64, (u32, u32))> {
            let (mu, nu) = (&bc[k / nr], &rc[k % nr]);
            let cb = candidates(model, blue_grid, Team::Blue, t, mu, nu, tol)?
                .ok_or_else(|| degenerate(t, Team::Blue, mu, nu, tol))?;
            let cr = candidates(model, red_grid, Team::Red, t, mu, nu, tol)?
                .ok_or_else(|| degenerate(t, Team::Red, mu, nu, tol))?;
            let (best, (a, b)) = match (kind, fast, &cr, &cb) {
                (ValueKind::Lower, true, Candidates::Range(r0, r1), _) => outer(cb.iter(), true, |i| {
                    let j = tables[i].query(*r0, *r1, |j| v(i, j));
                    (v(i, j), j)
                }),
                (ValueKind::Upper, true, _, Candidates::Range(b0, b1)) => {
                    let (val, (j, i)) = outer(cr.iter(), false, |j| {
                        let i = tables[j].query(*b0, *b1, |i| v(i, j));
                        (v(i, j), i)
                    });
                    (val, (i, j))
                }
                (ValueKind::Lower, _, _, _) => outer(cb.iter(), true, |i| inner(cr.iter(), false, |j| v(i, j))),
                (ValueKind::Upper, _, _, _) => {
                    let (val, (j, i)) = outer(cr.iter(), false, |j| inner(cb.iter(), true, |i| v(i, j)));
                    (val, (i, j))
                }
            };
            Ok((model.reward_value(t, mu, nu) + best, (a as u32, b as u32)))
        });
        let mut vt = Vec::with_capacity(nb * nr);
        let mut st = Vec::with_capacity(nb * nr);
        for c in cells {
            let (val, succ) = c?;
            vt.push(val);
            st.push(succ);
        }
        values[t] = vt;
        successors[t] = st;
    }

    Ok(ValueGrid {
        kind,
        blue_grid: blue_grid.clone(),
        red_grid: red_grid.clone(),
        membership_tol: tol,
        lookup: options.lookup,
        values,
        successors,
    })
}

/// Extreme of `inner(x)` over `xs` in increasing index order; the first
/// extreme wins ties. Returns the value and `(x, inner argument)`.
fn outer(xs: impl Iterator<Item = usize>, maximise: bool, f: impl Fn(usize) -> (f64, usize)) -> (f64, (usize, usize)) {
    let mut best: Option<(f64, (usize, usize))> = None;
    for x in xs {
        let (val, y) = f(x);
        let better = match best {
            None => true,
            Some((b, _)) => {
                if maximise {
                    val > b
                } else {
                    val < b
                }
            }
        };
        if better {
            best = Some((val, (x, y)));
        }
    }
    best.expect("candidate sets are non-empty")
}

fn inner(ys: impl Iterator<Item = usize>, maximise: bool, f: impl Fn(usize) -> f64) -> (f64, usize) {
    let (val, (y, _)) = outer(ys, maximise, |y| (f(y), 0));
    (val, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AffineKernel, Sizes};

    fn frozen(ns: usize, nr: usize, t: usize, reward: impl Fn(usize, &[f64], &[f64]) -> f64 + Send + Sync + 'static) -> GameModel {
        let stay = |n: usize| move |_t: usize, s: usize, _a: usize, _m: &[f64], _n: &[f64], out: &mut [f64]| {
            out.iter_mut().enumerate().for_each(|(k, o)| *o = if k == s { 1.0 } else { 0.0 });
            let _ = n;
        };
        GameModel::builder(Sizes::new(ns, nr, 2, 2), t, 0.5)
            .blue_kernel(stay(ns))
            .red_kernel(stay(nr))
            .reward(reward)
            .build()
            .unwrap()
    }

    /// Blue chooses its next first coordinate freely, Red likewise.
    fn free_choice(reward: impl Fn(usize, &[f64], &[f64]) -> f64 + Send + Sync + 'static, horizon: usize) -> GameModel {
        let base: Vec<Vec<Vec<Vec<f64>>>> =
            vec![vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![1.0, 0.0], vec![0.0, 1.0]]]; horizon];
        let zeros = vec![vec![vec![vec![vec![0.0; 2]; 2]; 2]; 2]; horizon];
        let k = AffineKernel::from_nested(&base, &zeros, &zeros).unwrap();
        GameModel::builder(Sizes::new(2, 2, 2, 2), horizon, 0.5)
            .blue_kernel(k.clone())
            .red_kernel(k)
            .reward(reward)
            .build()
            .unwrap()
    }

    #[test]
    fn zero_reward_gives_zero_values() {
        let m = free_choice(|_, _, _| 0.0, 2);
        let g = SimplexGrid::new(2, 8).unwrap();
        for kind in [ValueKind::Lower, ValueKind::Upper] {
            let vg = solve(&m, &g, &g, &SolveOptions::default(), kind).unwrap();
            for t in 0..=2 {
                assert!(vg.values(t).iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn terminal_values_equal_reward() {
        let m = free_choice(|_, mu, nu| mu[0] * nu[1] - 0.3 * nu[0], 1);
        let g = SimplexGrid::new(2, 6).unwrap();
        let vg = solve_lower(&m, &g, &g, &SolveOptions::default()).unwrap();
        for i in 0..g.len() {
            for j in 0..g.len() {
                let r = m.reward_value(1, &g.coords(i), &g.coords(j));
                assert!((vg.value_at_index(1, i, j) - r).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn horizon_zero_is_reward() {
        let m = frozen(2, 2, 0, |_, mu, _| mu[0]);
        let g = SimplexGrid::new(2, 4).unwrap();
        let vg = solve_upper(&m, &g, &g, &SolveOptions::default()).unwrap();
        for i in 0..g.len() {
            assert_eq!(vg.value_at_index(0, i, 2), i as f64 / 4.0);
        }
    }

    #[test]
    fn matching_pennies_separates_lower_and_upper() {
        // Blue wants to match Red's choice of corner, Red wants to mismatch.
        let m = free_choice(|t, mu, nu| if t == 1 { mu[0] * nu[0] + mu[1] * nu[1] } else { 0.0 }, 1);
        let g = SimplexGrid::new(2, 4).unwrap();
        let lo = solve_lower(&m, &g, &g, &SolveOptions::default()).unwrap();
        let up = solve_upper(&m, &g, &g, &SolveOptions::default()).unwrap();
        // pure-mean-field max-min is 1/2 at the centre, min-max also 1/2
        assert!((lo.value_at_index(0, 2, 2) - 0.5).abs() < 1e-12);
        assert!((up.value_at_index(0, 2, 2) - 0.5).abs() < 1e-12);
        assert_eq!(lo.successor_at_index(0, 2, 2).0, 2);
        for k in 0..lo.values(0).len() {
            assert!(lo.values(0)[k] <= up.values(0)[k] + 1e-12);
        }
    }

    #[test]
    fn frozen_dynamics_keep_successor() {
        let m = frozen(2, 2, 2, |_, mu, nu| mu[0] - nu[0]);
        let g = SimplexGrid::new(2, 10).unwrap();
        let vg = solve_lower(&m, &g, &g, &SolveOptions::default()).unwrap();
        assert_eq!(vg.successor_at_index(0, 3, 7), (3, 7));
        assert!((vg.value_at_index(0, 3, 7) - 3.0 * (0.3 - 0.7)).abs() < 1e-12);
    }

    #[test]
    fn exact_tolerance_can_be_degenerate() {
        // kernel always lands at 1/3 for the first state, never on a lattice point of G=4
        let k = |_t: usize, _s: usize, _a: usize, _m: &[f64], _n: &[f64], out: &mut [f64]| {
            out[0] = 1.0 / 3.0;
            out[1] = 2.0 / 3.0;
        };
        let m = GameModel::builder(Sizes::new(2, 2, 1, 1), 1, 0.5)
            .blue_kernel(k)
            .red_kernel(k)
            .reward(|_: usize, _: &[f64], _: &[f64]| 0.0)
            .build()
            .unwrap();
        let g = SimplexGrid::new(2, 4).unwrap();
        let err = solve_lower(&m, &g, &g, &SolveOptions::default().with_tol(0.0)).unwrap_err();
        assert!(matches!(err, Error::DegenerateGrid { t: 0, .. }));
        assert!(solve_lower(&m, &g, &g, &SolveOptions::default()).is_ok());
    }

    #[test]
    fn general_path_agrees_with_interval_path() {
        // embed the free-choice game in three states where the last state is unused
        let k3 = |_t: usize, _s: usize, a: usize, _m: &[f64], _n: &[f64], out: &mut [f64]| {
            out.iter_mut().for_each(|o| *o = 0.0);
            out[a] = 1.0;
        };
        let r = |t: usize, mu: &[f64], nu: &[f64]| if t == 1 { mu[0] * nu[0] + mu[1] * nu[1] } else { 0.0 };
        let m3 = GameModel::builder(Sizes::new(3, 3, 2, 2), 1, 0.5)
            .blue_kernel(k3)
            .red_kernel(k3)
            .reward(r)
            .build()
            .unwrap();
        let g3 = SimplexGrid::new(3, 4).unwrap();
        let vg3 = solve_lower(&m3, &g3, &g3, &SolveOptions::default()).unwrap();
        let m2 = free_choice(r, 1);
        let g2 = SimplexGrid::new(2, 4).unwrap();
        let vg2 = solve_lower(&m2, &g2, &g2, &SolveOptions::default()).unwrap();
        for i in 0..g3.len() {
            for j in 0..g3.len() {
                assert!((vg3.value_at_index(0, i, j) - vg2.value_at_index(0, 2, 2)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let m = free_choice(|t, mu, nu| (t as f64 + 1.0) * (mu[0] - 0.3).powi(2) - nu[1] * mu[0], 3);
        let g = SimplexGrid::new(2, 12).unwrap();
        for kind in [ValueKind::Lower, ValueKind::Upper] {
            let a = solve(&m, &g, &g, &SolveOptions::default(), kind).unwrap();
            let b = solve(&m, &g, &g, &SolveOptions::sequential(), kind).unwrap();
            for t in 0..=3 {
                assert_eq!(a.values(t), b.values(t));
            }
            for t in 0..3 {
                assert_eq!(a.successors(t), b.successors(t));
            }
        }
    }

    #[test]
    fn general_caps() {
        let k = |_t: usize, s: usize, _a: usize, _m: &[f64], _n: &[f64], out: &mut [f64]| {
            out.iter_mut().enumerate().for_each(|(i, o)| *o = if i == s { 1.0 } else { 0.0 });
        };
        let m = GameModel::builder(Sizes::new(3, 3, 1, 1), 1, 0.5)
            .blue_kernel(k)
            .red_kernel(k)
            .reward(|_: usize, _: &[f64], _: &[f64]| 0.0)
            .build()
            .unwrap();
        let g = SimplexGrid::new(3, 41).unwrap();
        assert!(matches!(solve_lower(&m, &g, &g, &SolveOptions::default()), Err(Error::Capacity { .. })));
    }

    #[test]
    fn bilinear_lookup_interpolates() {
        let m = frozen(2, 2, 1, |_, mu, nu| mu[0] + 2.0 * nu[0]);
        let g = SimplexGrid::new(2, 4).unwrap();
        let mut vg = solve_lower(&m, &g, &g, &SolveOptions::default()).unwrap();
        vg.set_lookup(Lookup::Bilinear);
        let mu = Distribution::binary(0.3).unwrap();
        let nu = Distribution::binary(0.6).unwrap();
        assert!((vg.value(1, &mu, &nu).unwrap() - 1.5).abs() < 1e-12);
        vg.set_lookup(Lookup::Nearest);
        assert!((vg.value(1, &mu, &nu).unwrap() - (0.25 + 1.0)).abs() < 1e-12);
    }
}
