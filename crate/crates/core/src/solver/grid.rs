use serde::{Deserialize, Serialize};

use crate::distribution::Distribution;
use crate::error::{Error, Result};

/// Off-grid value lookup rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lookup {
    /// Nearest grid point in total variation, lexicographically smallest on ties.
    #[default]
    Nearest,
    /// Linear in each first coordinate; two-state grids only.
    Bilinear,
}

/// All distributions over `dim` states whose coordinates are multiples of
/// `1/bins`, in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexGrid {
    dim: usize,
    bins: u32,
    counts: Vec<Vec<u32>>,
}

fn compositions(dim: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() + 1 == dim {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for k in 0..=total {
        prefix.push(k);
        compositions(dim, total - k, prefix, out);
        prefix.pop();
    }
}

/// `C(bins + dim - 1, dim - 1)`, saturating.
pub fn grid_point_count(dim: usize, bins: u32) -> u128 {
    let mut c: u128 = 1;
    for i in 1..dim as u128 {
        c = c.saturating_mul(bins as u128 + i) / i;
    }
    c
}

pub const MAX_GRID_POINTS: u128 = 5_000_000;

impl SimplexGrid {
    pub fn new(dim: usize, bins: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("grid dimension must be positive"));
        }
        if bins == 0 {
            return Err(Error::invalid("grid needs at least one bin"));
        }
        let required = grid_point_count(dim, bins);
        if required > MAX_GRID_POINTS {
            return Err(Error::Capacity {
                what: format!("simplex grid of dimension {dim} with {bins} bins"),
                required,
                cap: MAX_GRID_POINTS,
            });
        }
        let mut counts = Vec::with_capacity(required as usize);
        compositions(dim, bins, &mut Vec::with_capacity(dim), &mut counts);
        Ok(SimplexGrid { dim, bins, counts })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bins(&self) -> u32 {
        self.bins
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn counts(&self, index: usize) -> &[u32] {
        &self.counts[index]
    }

    pub fn coords(&self, index: usize) -> Vec<f64> {
        let g = self.bins as f64;
        self.counts[index].iter().map(|&c| c as f64 / g).collect()
    }

    pub fn point(&self, index: usize) -> Distribution {
        Distribution::from_drifted(self.coords(index)).expect("lattice points are distributions")
    }

    pub fn points(&self) -> impl Iterator<Item = Distribution> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    pub fn index_of_counts(&self, counts: &[u32]) -> Option<usize> {
        self.counts.binary_search_by(|c| c.as_slice().cmp(counts)).ok()
    }

    /// Index of the grid point nearest to `p` in total variation.
    pub fn nearest_index(&self, p: &[f64]) -> Result<usize> {
        if p.len() != self.dim {
            return Err(Error::invalid(format!("point of dimension {} on a grid of dimension {}", p.len(), self.dim)));
        }
        Ok(match self.dim {
            1 => 0,
            // grid index equals the count of the first state; halves round down
            2 => {
                let x = p[0] * self.bins as f64;
                let k = (x - 0.5).ceil().clamp(0.0, self.bins as f64);
                k as usize
            }
            _ => self.index_of_counts(&self.round_counts(p)).expect("rounded counts lie on the grid"),
        })
    }

    pub fn nearest(&self, p: &Distribution) -> Result<Distribution> {
        Ok(self.point(self.nearest_index(p.as_slice())?))
    }

    /// Largest-remainder rounding, which minimises the 1-norm distance; among
    /// equal remainders later coordinates are rounded up, which yields the
    /// lexicographically smallest minimiser.
    fn round_counts(&self, p: &[f64]) -> Vec<u32> {
        let g = self.bins as f64;
        let scaled: Vec<f64> = p.iter().map(|&x| (x * g).max(0.0)).collect();
        let mut counts: Vec<u32> = scaled.iter().map(|&x| x.floor() as u32).collect();
        let assigned: u32 = counts.iter().sum();
        if assigned > self.bins {
            // only possible with inputs that sum above one by more than rounding
            let mut excess = assigned - self.bins;
            for c in counts.iter_mut().rev() {
                let take = excess.min(*c);
                *c -= take;
                excess -= take;
            }
            return counts;
        }
        let remainder = self.bins - assigned;
        let mut order: Vec<usize> = (0..self.dim).collect();
        order.sort_by(|&a, &b| {
            let fa = scaled[a] - scaled[a].floor();
            let fb = scaled[b] - scaled[b].floor();
            if (fa - fb).abs() <= 1e-12 {
                b.cmp(&a)
            } else {
                fb.partial_cmp(&fa).unwrap()
            }
        });
        for &i in order.iter().take(remainder as usize) {
            counts[i] += 1;
        }
        counts
    }

    /// Grid indices whose first coordinate lies in `[lo - tol, hi + tol]`,
    /// as an inclusive index range. Two-state grids only.
    pub(crate) fn interval_range(&self, lo: f64, hi: f64, tol: f64) -> Option<(usize, usize)> {
        debug_assert!(self.dim <= 2);
        if self.dim == 1 {
            return Some((0, 0));
        }
        let g = self.bins as f64;
        let a = ((lo - tol) * g - 1e-9).ceil().max(0.0);
        let b = ((hi + tol) * g + 1e-9).floor().min(g);
        (a <= b).then_some((a as usize, b as usize))
    }
}
