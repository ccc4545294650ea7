use crate::error::{Error, Result};
use crate::policy::PurePolicy;

pub const DEFAULT_PURE_POLICY_CAP: usize = 4096;

/// Number of pure policies, `num_actions ^ num_states`, if it fits in u128.
pub fn pure_policy_count(num_states: usize, num_actions: usize) -> Option<u128> {
    (num_actions as u128).checked_pow(num_states as u32)
}

pub fn enumerate_pure_policies(num_states: usize, num_actions: usize) -> Result<Vec<PurePolicy>> {
    enumerate_pure_policies_capped(num_states, num_actions, DEFAULT_PURE_POLICY_CAP)
}

/// All state-to-action assignments in lexicographic order, the first state
/// being the most significant digit.
pub fn enumerate_pure_policies_capped(num_states: usize, num_actions: usize, cap: usize) -> Result<Vec<PurePolicy>> {
    if num_states == 0 || num_actions == 0 {
        return Err(Error::invalid("pure policies need non-empty state and action sets"));
    }
    let count = pure_policy_count(num_states, num_actions).unwrap_or(u128::MAX);
    if count > cap as u128 {
        return Err(Error::Capacity {
            what: format!("{num_actions}^{num_states} pure policies"),
            required: count,
            cap: cap as u128,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut digits = vec![0usize; num_states];
    loop {
        out.push(PurePolicy::new(digits.clone(), num_actions)?);
        // increment from the least significant (last) state
        let mut i = num_states;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < num_actions {
                break;
            }
            digits[i] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_order() {
        assert_eq!(enumerate_pure_policies(2, 2).unwrap().len(), 4);
        assert_eq!(enumerate_pure_policies(1, 3).unwrap().len(), 3);
        let p = enumerate_pure_policies(3, 2).unwrap();
        assert_eq!(p.len(), 8);
        assert_eq!(p[0].assignment(), &[0, 0, 0]);
        assert_eq!(p[1].assignment(), &[0, 0, 1]);
        assert_eq!(p[7].assignment(), &[1, 1, 1]);
        assert!(p.windows(2).all(|w| w[0].assignment() < w[1].assignment()));
    }

    #[test]
    fn cap_is_enforced() {
        match enumerate_pure_policies(13, 2) {
            Err(Error::Capacity { cap, required, .. }) => {
                assert_eq!(cap, 4096);
                assert_eq!(required, 8192);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(enumerate_pure_policies_capped(13, 2, 10_000).unwrap().len(), 8192);
    }
}
