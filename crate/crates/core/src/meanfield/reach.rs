//! One-step reachable sets of the mean-field dynamics and the convex
//! geometry queries over them.
//!
//! A reachable set is stored as the images of all pure local policies;
//! since the mean-field step is linear in the policy, the set is the convex
//! hull of those images. Membership, distance and policy extraction are all
//! phrased as small linear programs over the convex weights.

use serde::{Deserialize, Serialize};

use super::lp::{solve_standard, LpOutcome, FEASIBILITY_TOL};
use super::pure::{enumerate_pure_policies, enumerate_pure_policies_capped};
use crate::distribution::{tv, Distribution};
use crate::error::{Error, Result};
use crate::model::{GameModel, Team};
use crate::policy::{LocalPolicy, PurePolicy};

/// Tolerance used when a target must be reproduced exactly.
pub const EXTRACTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ReachableSet {
    pub team: Team,
    pub t: usize,
    pub mu: Distribution,
    pub nu: Distribution,
    pub num_actions: usize,
    /// Image of the k-th pure policy, in enumeration order.
    pub vertices: Vec<Distribution>,
}

impl ReachableSet {
    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    /// Range of the first coordinate over the hull.
    pub fn first_coordinate_range(&self) -> (f64, f64) {
        self.vertices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v[0]), hi.max(v[0]))
        })
    }

    pub fn pure_policies(&self) -> Result<Vec<PurePolicy>> {
        enumerate_pure_policies_capped(self.dim(), self.num_actions, usize::MAX)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feasibility {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityResult {
    /// Convex weights over the set's vertices.
    pub weights: Vec<f64>,
    /// Infinity-norm distance between the weighted vertices and the target.
    pub residual: f64,
    pub status: Feasibility,
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        self.status == Feasibility::Feasible
    }
}

/// Next-state rows `[state][action][next]` at the given mean-fields.
pub(crate) fn action_rows(model: &GameModel, team: Team, t: usize, mu: &[f64], nu: &[f64]) -> Vec<Vec<Vec<f64>>> {
    let ns = model.num_states(team);
    (0..ns)
        .map(|s| {
            (0..model.num_actions(team))
                .map(|a| {
                    let mut row = vec![0.0; ns];
                    model.kernel_row(team, t, s, a, mu, nu, &mut row);
                    row
                })
                .collect()
        })
        .collect()
}

/// For two-state teams: the reachable interval of the first coordinate.
pub(crate) fn first_coordinate_interval(model: &GameModel, team: Team, t: usize, mu: &[f64], nu: &[f64]) -> (f64, f64) {
    let own = match team {
        Team::Blue => mu,
        Team::Red => nu,
    };
    debug_assert_eq!(own.len(), 2);
    let mut row = [0.0; 2];
    let (mut lo, mut hi) = (0.0, 0.0);
    for (s, &w) in own.iter().enumerate() {
        let (mut smin, mut smax) = (f64::INFINITY, f64::NEG_INFINITY);
        for a in 0..model.num_actions(team) {
            model.kernel_row(team, t, s, a, mu, nu, &mut row);
            smin = smin.min(row[0]);
            smax = smax.max(row[0]);
        }
        lo += w * smin;
        hi += w * smax;
    }
    (lo, hi)
}

pub fn reachable_set(model: &GameModel, team: Team, t: usize, mu: &Distribution, nu: &Distribution) -> Result<ReachableSet> {
    if t >= model.horizon() {
        return Err(Error::invalid(format!("t={t} must be below horizon {}", model.horizon())));
    }
    let sizes = model.sizes();
    if mu.len() != sizes.blue_states || nu.len() != sizes.red_states {
        return Err(Error::invalid("mean-field dimensions do not match the model"));
    }
    let (ns, na) = (model.num_states(team), model.num_actions(team));
    let policies = enumerate_pure_policies(ns, na)?;
    let rows = action_rows(model, team, t, mu.as_slice(), nu.as_slice());
    let own = match team {
        Team::Blue => mu,
        Team::Red => nu,
    };
    let vertices = policies
        .iter()
        .map(|p| {
            let mut v = vec![0.0; ns];
            for s in 0..ns {
                let w = own[s];
                for (o, r) in v.iter_mut().zip(&rows[s][p.action(s)]) {
                    *o += w * r;
                }
            }
            Distribution::from_drifted(v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReachableSet {
        team,
        t,
        mu: mu.clone(),
        nu: nu.clone(),
        num_actions: na,
        vertices,
    })
}

pub fn reachable_set_blue(model: &GameModel, t: usize, mu: &Distribution, nu: &Distribution) -> Result<ReachableSet> {
    reachable_set(model, Team::Blue, t, mu, nu)
}

pub fn reachable_set_red(model: &GameModel, t: usize, mu: &Distribution, nu: &Distribution) -> Result<ReachableSet> {
    reachable_set(model, Team::Red, t, mu, nu)
}

fn weighted_point(vertices: &[Distribution], weights: &[f64]) -> Vec<f64> {
    let mut p = vec![0.0; vertices[0].len()];
    for (v, &w) in vertices.iter().zip(weights) {
        for (o, x) in p.iter_mut().zip(v.as_slice()) {
            *o += w * x;
        }
    }
    p
}

fn inf_norm_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn normalise(mut w: Vec<f64>) -> Vec<f64> {
    w.iter_mut().for_each(|v| *v = v.max(0.0));
    let s: f64 = w.iter().sum();
    if s > 0.0 {
        w.iter_mut().for_each(|v| *v /= s);
    }
    w
}

/// Convex weights of the hull point closest to `target` in the infinity
/// norm, together with that distance.
fn nearest_inf_norm(vertices: &[Distribution], target: &[f64]) -> (Vec<f64>, f64) {
    // variables: lambda (k), z, s_plus (d), s_minus (d)
    //   (M lambda)_e - z + s_plus_e  = p_e
    //   (M lambda)_e + z - s_minus_e = p_e
    //   sum lambda = 1
    let k = vertices.len();
    let d = target.len();
    let n = k + 1 + 2 * d;
    let mut a = Vec::with_capacity(2 * d + 1);
    let mut b = Vec::with_capacity(2 * d + 1);
    for e in 0..d {
        for sign in [-1.0, 1.0] {
            let mut row = vec![0.0; n];
            for (j, v) in vertices.iter().enumerate() {
                row[j] = v[e];
            }
            row[k] = sign;
            if sign < 0.0 {
                row[k + 1 + e] = 1.0;
            } else {
                row[k + 1 + d + e] = -1.0;
            }
            a.push(row);
            b.push(target[e]);
        }
    }
    let mut row = vec![0.0; n];
    row[..k].iter_mut().for_each(|v| *v = 1.0);
    a.push(row);
    b.push(1.0);
    let mut c = vec![0.0; n];
    c[k] = 1.0;
    match solve_standard(&a, &b, &c) {
        LpOutcome::Optimal { x, .. } => {
            let w = normalise(x[..k].to_vec());
            let gap = inf_norm_gap(&weighted_point(vertices, &w), target);
            (w, gap)
        }
        // the program is always feasible and bounded below by zero
        other => unreachable!("nearest-point program returned {other:?}"),
    }
}

/// Decides whether `target` lies in the hull within `tol` (infinity norm).
///
/// The exact system `[M; 1] lambda = [target; 1]` is tried first with a
/// phase-one simplex; if it has no solution the residual reported is the
/// smallest achievable infinity-norm gap.
pub fn hull_membership(set: &ReachableSet, target: &Distribution, tol: f64) -> Result<FeasibilityResult> {
    hull_membership_of(&set.vertices, target, tol)
}

pub(crate) fn hull_membership_of(vertices: &[Distribution], target: &Distribution, tol: f64) -> Result<FeasibilityResult> {
    let Some(first) = vertices.first() else {
        return Err(Error::invalid("empty vertex set"));
    };
    let d = first.len();
    if target.len() != d {
        return Err(Error::invalid(format!("target dimension {} vs hull dimension {d}", target.len())));
    }
    let k = vertices.len();
    let mut a: Vec<Vec<f64>> = (0..d).map(|e| vertices.iter().map(|v| v[e]).collect()).collect();
    a.push(vec![1.0; k]);
    let mut b = target.as_slice().to_vec();
    b.push(1.0);
    let tol = tol.max(1e-12);
    let (weights, residual) = match solve_standard(&a, &b, &vec![0.0; k]) {
        LpOutcome::Optimal { x, .. } => {
            let w = normalise(x);
            let r = inf_norm_gap(&weighted_point(vertices, &w), target.as_slice());
            if r <= tol {
                (w, r)
            } else {
                nearest_inf_norm(vertices, target.as_slice())
            }
        }
        LpOutcome::Infeasible { .. } | LpOutcome::Unbounded => nearest_inf_norm(vertices, target.as_slice()),
    };
    let status = if residual <= tol {
        Feasibility::Feasible
    } else {
        Feasibility::Infeasible
    };
    Ok(FeasibilityResult {
        weights,
        residual,
        status,
    })
}

/// Mixture of pure policies with the given convex weights.
pub(crate) fn policy_from_weights(set: &ReachableSet, weights: &[f64]) -> Result<LocalPolicy> {
    let ns = set.dim();
    let na = set.num_actions;
    let mut rows = vec![vec![0.0; na]; ns];
    for (p, &w) in set.pure_policies()?.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        for (s, row) in rows.iter_mut().enumerate() {
            row[p.action(s)] += w;
        }
    }
    LocalPolicy::from_rows(rows.into_iter().map(normalise).collect())
}

/// Local policy whose mean-field step from `(mu, nu)` lands on `target`.
pub fn extract_policy(
    model: &GameModel,
    t: usize,
    mu: &Distribution,
    nu: &Distribution,
    target: &Distribution,
    team: Team,
) -> Result<LocalPolicy> {
    let set = reachable_set(model, team, t, mu, nu)?;
    let fr = hull_membership(&set, target, EXTRACTION_TOL)?;
    if !fr.is_feasible() {
        return Err(Error::Reachability { residual: fr.residual });
    }
    policy_from_weights(&set, &fr.weights)
}

/// Policy reaching the hull point nearest to `target`; returns the policy,
/// the point actually reached and the infinity-norm gap to `target`.
pub fn extract_nearest_policy(
    model: &GameModel,
    t: usize,
    mu: &Distribution,
    nu: &Distribution,
    target: &Distribution,
    team: Team,
) -> Result<(LocalPolicy, Distribution, f64)> {
    let set = reachable_set(model, team, t, mu, nu)?;
    let fr = hull_membership(&set, target, EXTRACTION_TOL)?;
    let policy = policy_from_weights(&set, &fr.weights)?;
    let reached = super::matrix::mf_step(model, team, t, mu, nu, &policy)?;
    Ok((policy, reached, fr.residual))
}

/// Total-variation distance from `point` to the hull of `vertices`.
pub(crate) fn tv_distance_to_hull(vertices: &[Distribution], point: &[f64]) -> f64 {
    // variables: lambda (k), e_plus (d), e_minus (d)
    //   M lambda + e_plus - e_minus = p, sum lambda = 1, min (1/2) sum(e)
    let k = vertices.len();
    let d = point.len();
    let n = k + 2 * d;
    let mut a = Vec::with_capacity(d + 1);
    for e in 0..d {
        let mut row = vec![0.0; n];
        for (j, v) in vertices.iter().enumerate() {
            row[j] = v[e];
        }
        row[k + e] = 1.0;
        row[k + d + e] = -1.0;
        a.push(row);
    }
    let mut row = vec![0.0; n];
    row[..k].iter_mut().for_each(|v| *v = 1.0);
    a.push(row);
    let mut b = point.to_vec();
    b.push(1.0);
    let mut c = vec![0.0; n];
    c[k..].iter_mut().for_each(|v| *v = 0.5);
    match solve_standard(&a, &b, &c) {
        LpOutcome::Optimal { x, .. } => {
            let w = normalise(x[..k].to_vec());
            tv(&weighted_point(vertices, &w), point)
        }
        other => unreachable!("distance program returned {other:?}"),
    }
}

/// Hausdorff distance between two hulls under the total-variation norm.
pub fn hausdorff_distance(a: &ReachableSet, b: &ReachableSet) -> Result<f64> {
    hausdorff_between(&a.vertices, &b.vertices)
}

pub(crate) fn hausdorff_between(a: &[Distribution], b: &[Distribution]) -> Result<f64> {
    if a.is_empty() || b.is_empty() || a[0].len() != b[0].len() {
        return Err(Error::invalid("hausdorff distance needs non-empty sets of equal dimension"));
    }
    if a[0].len() == 2 {
        // hulls are intervals of the first coordinate, where TV is |difference|
        let range = |s: &[Distribution]| {
            s.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v[0]), hi.max(v[0])))
        };
        let (alo, ahi) = range(a);
        let (blo, bhi) = range(b);
        return Ok((alo - blo).abs().max((ahi - bhi).abs()));
    }
    let one_sided = |from: &[Distribution], to: &[Distribution]| {
        from.iter()
            .map(|v| tv_distance_to_hull(to, v.as_slice()))
            .fold(0.0, f64::max)
    };
    Ok(one_sided(a, b).max(one_sided(b, a)))
}

/// Whether the hull check accepted within the phase-one tolerance.
pub fn is_exactly_reachable(fr: &FeasibilityResult) -> bool {
    fr.is_feasible() && fr.residual <= FEASIBILITY_TOL
}
