use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights below zero but above this are clamped to zero.
pub const NEGATIVE_CLAMP: f64 = 1e-12;
/// Allowed deviation of the weight sum from one.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A point on a finite probability simplex.
///
/// Used for mean-fields, empirical distributions and per-state action
/// distributions alike.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution(Vec<f64>);

impl Distribution {
    pub fn new(mut weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("distribution must have at least one entry"));
        }
        for w in weights.iter_mut() {
            if !w.is_finite() {
                return Err(Error::invalid(format!("non-finite weight {w}")));
            }
            if *w < 0.0 {
                if *w < -NEGATIVE_CLAMP {
                    return Err(Error::invalid(format!("negative weight {w}")));
                }
                *w = 0.0;
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::invalid(format!("weights sum to {sum}, expected 1")));
        }
        Ok(Distribution(weights))
    }

    /// Uniform distribution over `n` outcomes.
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0);
        Distribution(vec![1.0 / n as f64; n])
    }

    /// Point mass at `index`.
    pub fn dirac(n: usize, index: usize) -> Self {
        assert!(index < n);
        let mut w = vec![0.0; n];
        w[index] = 1.0;
        Distribution(w)
    }

    /// Two-outcome distribution `[p, 1 - p]`.
    pub fn binary(p: f64) -> Result<Self> {
        Self::new(vec![p, 1.0 - p])
    }

    /// Builds from weights that are known to be stochastic up to rounding;
    /// clamps tiny negatives and renormalises.
    pub(crate) fn from_drifted(mut weights: Vec<f64>) -> Result<Self> {
        for w in weights.iter_mut() {
            if *w < 0.0 && *w >= -1e-9 {
                *w = 0.0;
            }
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) || (sum - 1.0).abs() > 1e-6 {
            return Err(Error::model(format!(
                "propagated weights {weights:?} are not a distribution"
            )));
        }
        weights.iter_mut().for_each(|w| *w /= sum);
        Ok(Distribution(weights))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Convex combination `(1 - s) * self + s * other`.
    pub fn mix(&self, other: &Distribution, s: f64) -> Result<Distribution> {
        if self.len() != other.len() {
            return Err(Error::invalid("dimension mismatch in mix"));
        }
        Distribution::new(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| (1.0 - s) * a + s * b)
                .collect(),
        )
    }

    /// Index of a sample drawn with the uniform variate `u` in `[0, 1)`.
    pub fn sample_with(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (i, w) in self.0.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        // rounding: fall back to the last outcome with positive mass
        self.0.iter().rposition(|w| *w > 0.0).unwrap_or(0)
    }
}

impl Index<usize> for Distribution {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Distribution::new(v)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.0
    }
}

/// Per-state occupation counts of a finite team.
pub fn state_counts(states: &[usize], num_states: usize) -> Result<Vec<u32>> {
    let mut counts = vec![0u32; num_states];
    for &s in states {
        if s >= num_states {
            return Err(Error::invalid(format!(
                "state index {s} out of range for {num_states} states"
            )));
        }
        counts[s] += 1;
    }
    Ok(counts)
}

/// Distribution with weights `counts[x] / total`.
pub fn counts_to_distribution(counts: &[u32]) -> Result<Distribution> {
    let total: u64 = counts.iter().map(|&c| c as u64).sum();
    if total == 0 {
        return Err(Error::invalid("empty team"));
    }
    // counts are integers, so each ratio is the correctly rounded rational
    Ok(Distribution(
        counts.iter().map(|&c| c as f64 / total as f64).collect(),
    ))
}

/// Fraction of agents at each state.
pub fn empirical_distribution(states: &[usize], num_states: usize) -> Result<Distribution> {
    if states.is_empty() {
        return Err(Error::invalid("empirical distribution of an empty team"));
    }
    counts_to_distribution(&state_counts(states, num_states)?)
}

/// Total variation distance, half the 1-norm of the difference.
pub fn tv_distance(a: &Distribution, b: &Distribution) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(tv(a.as_slice(), b.as_slice()))
}

pub(crate) fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}
