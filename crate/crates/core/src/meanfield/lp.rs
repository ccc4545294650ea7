//! Dense two-phase simplex method for the small standard-form programs
//! `min c.x  s.t.  A x = b, x >= 0` that arise in hull queries.
//!
//! Bland's rule is used for both entering and leaving variables, so the
//! method terminates on degenerate problems. Each call owns its tableau.

const PIVOT_EPS: f64 = 1e-12;
const MAX_PIVOTS: usize = 100_000;

/// Phase-one objectives at or below this are treated as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    /// No feasible point; `phase_one` is the minimal sum of artificial
    /// variables, `x` the phase-one point.
    Infeasible { phase_one: f64, x: Vec<f64> },
    Unbounded,
}

struct Tableau {
    rows: usize,
    cols: usize,
    // rows x (cols + 1), last column is the right-hand side
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let p = self.data[pr * w + pc];
        for c in 0..w {
            self.data[pr * w + c] /= p;
        }
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let f = self.data[r * w + pc];
            if f != 0.0 {
                for c in 0..w {
                    self.data[r * w + c] -= f * self.data[pr * w + c];
                }
            }
        }
        self.basis[pr] = pc;
    }

    /// Reduced costs for cost vector `cost` given the current basis.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for r in 0..self.rows {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for (c, dc) in d.iter_mut().enumerate() {
                    *dc -= cb * self.at(r, c);
                }
            }
        }
        d
    }

    fn objective(&self, cost: &[f64]) -> f64 {
        (0..self.rows).map(|r| cost[self.basis[r]] * self.rhs(r)).sum()
    }

    /// Runs simplex iterations minimising `cost`, allowing only columns
    /// below `enter_limit` to enter. Returns false when unbounded.
    fn optimise(&mut self, cost: &[f64], enter_limit: usize) -> bool {
        for _ in 0..MAX_PIVOTS {
            let d = self.reduced_costs(cost);
            let Some(pc) = (0..enter_limit).find(|&c| d[c] < -PIVOT_EPS) else {
                return true;
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > PIVOT_EPS {
                    let ratio = self.rhs(r) / a;
                    let better = match best {
                        None => true,
                        Some((br, _, bvar)) => {
                            ratio < br - PIVOT_EPS
                                || (ratio <= br + PIVOT_EPS && self.basis[r] < bvar)
                        }
                    };
                    if better {
                        best = Some((ratio, r, self.basis[r]));
                    }
                }
            }
            match best {
                Some((_, pr, _)) => self.pivot(pr, pc),
                None => return false,
            }
        }
        log::warn!("simplex pivot limit reached");
        true
    }

    fn solution(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for r in 0..self.rows {
            if self.basis[r] < n {
                x[self.basis[r]] = self.rhs(r).max(0.0);
            }
        }
        x
    }
}

/// Solves `min c.x  s.t.  A x = b, x >= 0` where `a` is given row-major.
pub fn solve_standard(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    debug_assert_eq!(b.len(), m);
    let cols = n + m;
    let mut data = vec![0.0; m * (cols + 1)];
    for r in 0..m {
        debug_assert_eq!(a[r].len(), n);
        let sign = if b[r] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            data[r * (cols + 1) + j] = sign * a[r][j];
        }
        data[r * (cols + 1) + n + r] = 1.0;
        data[r * (cols + 1) + cols] = sign * b[r];
    }
    let mut tab = Tableau {
        rows: m,
        cols,
        data,
        basis: (n..n + m).collect(),
    };

    let mut phase_one_cost = vec![0.0; cols];
    phase_one_cost[n..].iter_mut().for_each(|v| *v = 1.0);
    tab.optimise(&phase_one_cost, cols);
    let phase_one = tab.objective(&phase_one_cost);
    if phase_one > FEASIBILITY_TOL {
        return LpOutcome::Infeasible {
            phase_one,
            x: tab.solution(n),
        };
    }

    // drive zero-valued artificials out of the basis where possible;
    // rows where no original column can pivot in are redundant
    for r in 0..m {
        if tab.basis[r] >= n {
            if let Some(pc) = (0..n).find(|&j| tab.at(r, j).abs() > 1e-9) {
                tab.pivot(r, pc);
            }
        }
    }

    let mut cost = c.to_vec();
    cost.resize(cols, 0.0);
    if !tab.optimise(&cost, n) {
        return LpOutcome::Unbounded;
    }
    LpOutcome::Optimal {
        objective: tab.objective(&cost),
        x: tab.solution(n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimal(o: LpOutcome) -> (Vec<f64>, f64) {
        match o {
            LpOutcome::Optimal { x, objective } => (x, objective),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn small_lp() {
        // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let a = vec![vec![1.0, 2.0, 1.0, 0.0], vec![3.0, 1.0, 0.0, 1.0]];
        let (x, obj) = optimal(solve_standard(&a, &[4.0, 6.0], &[-1.0, -1.0, 0.0, 0.0]));
        assert!((obj + 2.8).abs() < 1e-12);
        assert!((x[0] - 1.6).abs() < 1e-12 && (x[1] - 1.2).abs() < 1e-12);
    }

    #[test]
    fn infeasible_reports_phase_one() {
        // x = 1 and x = 2 cannot both hold
        let a = vec![vec![1.0], vec![1.0]];
        match solve_standard(&a, &[1.0, 2.0], &[0.0]) {
            LpOutcome::Infeasible { phase_one, .. } => assert!((phase_one - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        // x + y = 1 stated twice, min x
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![2.0, 2.0]];
        let (x, obj) = optimal(solve_standard(&a, &[1.0, 1.0, 2.0], &[1.0, 0.0]));
        assert_eq!(obj, 0.0);
        assert!((x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_detected() {
        // min -x s.t. x - y = 0
        let a = vec![vec![1.0, -1.0]];
        assert_eq!(solve_standard(&a, &[0.0], &[-1.0, 0.0]), LpOutcome::Unbounded);
    }

    #[test]
    fn negative_rhs_rows_are_flipped() {
        // -x = -3
        let (x, _) = optimal(solve_standard(&[vec![-1.0]], &[-3.0], &[1.0]));
        assert!((x[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // classic cycling example (Beale) in standard form
        let a = vec![
            vec![0.25, -8.0, -1.0, 9.0, 1.0, 0.0, 0.0],
            vec![0.5, -12.0, -0.5, 3.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        ];
        let c = [-0.75, 20.0, -0.5, 6.0, 0.0, 0.0, 0.0];
        let (_, obj) = optimal(solve_standard(&a, &[0.0, 0.0, 1.0], &c));
        assert!((obj + 1.25).abs() < 1e-9);
    }
}
