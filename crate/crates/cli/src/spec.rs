//! User models in the affine tabular JSON format.

use serde::{Deserialize, Serialize};

use mftg_core::model::{AffineKernel, AffineReward};
use mftg_core::{Error, GameModel, LipschitzBundle, Sizes};

use crate::canonical::canonical;

const SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecSizes {
    pub blue_states: usize,
    pub red_states: usize,
    pub blue_actions: usize,
    pub red_actions: usize,
    pub horizon: usize,
}

/// `base[t][x][u][x']`, `mu_weights[t][x][u][x'][z]`, `nu_weights[t][x][u][x'][y]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub base: Vec<Vec<Vec<Vec<f64>>>>,
    pub mu_weights: Vec<Vec<Vec<Vec<Vec<f64>>>>>,
    pub nu_weights: Vec<Vec<Vec<Vec<Vec<f64>>>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineModelSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub sizes: SpecSizes,
    pub rho: f64,
    pub blue_kernel: KernelSpec,
    pub red_kernel: KernelSpec,
    pub reward: AffineReward,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<LipschitzBundle>,
}

fn invalid(msg: String) -> Error {
    Error::ModelValidation(msg)
}

fn check_shape(label: &str, got: usize, want: usize) -> Result<(), Error> {
    if got != want {
        return Err(invalid(format!("{label}: expected {want} entries, got {got}")));
    }
    Ok(())
}

impl KernelSpec {
    fn validate(&self, team: &str, horizon: usize, states: usize, actions: usize, blue: usize, red: usize) -> Result<(), Error> {
        check_shape(&format!("{team}_kernel.base"), self.base.len(), horizon)?;
        check_shape(&format!("{team}_kernel.mu_weights"), self.mu_weights.len(), horizon)?;
        check_shape(&format!("{team}_kernel.nu_weights"), self.nu_weights.len(), horizon)?;
        for t in 0..horizon {
            check_shape(&format!("{team}_kernel.base[{t}]"), self.base[t].len(), states)?;
            for x in 0..states {
                check_shape(&format!("{team}_kernel.base[{t}][{x}]"), self.base[t][x].len(), actions)?;
                for u in 0..actions {
                    let at = format!("{team}_kernel (t={t}, state={x}, action={u})");
                    let row = &self.base[t][x][u];
                    check_shape(&format!("{at} base"), row.len(), states)?;
                    if row.iter().any(|p| !p.is_finite()) {
                        return Err(invalid(format!("{at}: base entries must be finite")));
                    }
                    let sum: f64 = row.iter().sum();
                    if (sum - 1.0).abs() > SUM_TOL {
                        return Err(invalid(format!("{at}: base row sums to {sum}, expected 1")));
                    }
                    for (label, weights, dim) in [("mu_weights", &self.mu_weights, blue), ("nu_weights", &self.nu_weights, red)] {
                        let slice = weights[t].get(x).and_then(|w| w.get(u)).ok_or_else(|| invalid(format!("{at}: {label} missing")))?;
                        check_shape(&format!("{at} {label}"), slice.len(), states)?;
                        for (x2, w) in slice.iter().enumerate() {
                            check_shape(&format!("{at} {label}[{x2}]"), w.len(), dim)?;
                        }
                        for z in 0..dim {
                            let col: f64 = slice.iter().map(|w| w[z]).sum();
                            if slice.iter().any(|w| !w[z].is_finite()) || col.abs() > SUM_TOL {
                                return Err(invalid(format!("{at}: {label} slice {z} sums to {col}, expected 0")));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn to_kernel(&self) -> Result<AffineKernel, Error> {
        AffineKernel::from_nested(&self.base, &self.mu_weights, &self.nu_weights)
    }
}

impl AffineModelSpec {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        let spec: AffineModelSpec = serde_json::from_str(text).map_err(|e| invalid(format!("model JSON: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Shape, row-sum and weight-sum checks. Non-negativity at the simplex
    /// vertices is checked when the model is built.
    pub fn validate(&self) -> Result<(), Error> {
        let s = &self.sizes;
        if s.horizon == 0 {
            return Err(invalid("horizon must be at least 1".into()));
        }
        self.blue_kernel.validate("blue", s.horizon, s.blue_states, s.blue_actions, s.blue_states, s.red_states)?;
        self.red_kernel.validate("red", s.horizon, s.red_states, s.red_actions, s.blue_states, s.red_states)?;
        let r = &self.reward;
        check_shape("reward.base", r.base.len(), s.horizon + 1)?;
        check_shape("reward.mu_coeffs", r.mu_coeffs.len(), s.horizon + 1)?;
        check_shape("reward.nu_coeffs", r.nu_coeffs.len(), s.horizon + 1)?;
        for t in 0..=s.horizon {
            check_shape(&format!("reward.mu_coeffs[{t}]"), r.mu_coeffs[t].len(), s.blue_states)?;
            check_shape(&format!("reward.nu_coeffs[{t}]"), r.nu_coeffs[t].len(), s.red_states)?;
        }
        let all = r.base.iter().chain(r.mu_coeffs.iter().flatten()).chain(r.nu_coeffs.iter().flatten());
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(invalid("reward coefficients must be finite".into()));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<GameModel, Error> {
        self.validate()?;
        let s = &self.sizes;
        let sizes = Sizes::new(s.blue_states, s.red_states, s.blue_actions, s.red_actions);
        let mut b = GameModel::builder(sizes, s.horizon, self.rho)
            .name(self.name.clone().unwrap_or_else(|| "custom".into()))
            .blue_kernel(self.blue_kernel.to_kernel()?)
            .red_kernel(self.red_kernel.to_kernel()?)
            .reward(self.reward.clone());
        if let Some(l) = &self.lipschitz {
            b = b.lipschitz(l.clone());
        }
        b.build()
    }

    pub fn to_canonical_json(&self) -> String {
        canonical(self).expect("model spec serializes")
    }
}
