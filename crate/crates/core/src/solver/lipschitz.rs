use crate::error::{Error, Result};
use crate::model::LipschitzBundle;

/// Lipschitz constant of the optimal value at time `t` of a game with
/// `horizon` transitions:
/// `L_r (1 + sum_{k=t}^{T-1} prod_{tau=t}^{k} (L_mu,tau + L_nu,tau))`
/// where `L_mu,tau = 1 + L_f,tau / 2` and `L_nu,tau = 1 + L_g,tau / 2`.
pub fn lipschitz_value_constant(bundle: &LipschitzBundle, t: usize, horizon: usize) -> Result<f64> {
    if t > horizon {
        return Err(Error::invalid(format!("t={t} beyond horizon {horizon}")));
    }
    if bundle.l_f.len() < horizon || bundle.l_g.len() < horizon {
        return Err(Error::invalid(format!(
            "lipschitz bundle covers {} transitions, need {horizon}",
            bundle.l_f.len().min(bundle.l_g.len())
        )));
    }
    let mut sum = 0.0;
    let mut prod = 1.0;
    for tau in t..horizon {
        prod *= (1.0 + 0.5 * bundle.l_f[tau]) + (1.0 + 0.5 * bundle.l_g[tau]);
        sum += prod;
    }
    Ok(bundle.l_r * (1.0 + sum))
}
