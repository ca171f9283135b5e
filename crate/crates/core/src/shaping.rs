//! θ-parameterised terminal rewards.
//!
//! For an end state `g_i`:
//!
//! ```text
//! upper:  1            if θ ≤ i
//!         0            if θ ≥ i + 1
//!         i + 1 − θ    otherwise
//!
//! lower:  0            if θ ≤ i
//!        −1            if θ ≥ i + 1
//!         i − θ        otherwise
//! ```
//!
//! Non-end states pay nothing. At an integer θ = k the upper reward is the
//! indicator of `i ≥ k`, so the expected reward of a policy is its
//! decumulative probability `G(g_k)`. The lower reward is always the upper
//! one minus 1 on end states.

use serde::{Deserialize, Serialize};

use crate::mdp::StateClass;

/// Which quantile is being optimised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Upper,
    Lower,
}

impl std::fmt::Display for Objective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Objective::Upper => "upper",
            Objective::Lower => "lower",
        })
    }
}

impl std::str::FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "upper" => Ok(Objective::Upper),
            "lower" => Ok(Objective::Lower),
            other => Err(format!(
                "unknown objective `{other}` (expected upper or lower)"
            )),
        }
    }
}

/// Threshold parameter, kept inside `[0, n + 1]` for `n` end states.
///
/// Outside that interval both reward functions are constant in θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theta {
    value: f64,
    end_states: usize,
}

impl Theta {
    pub fn new(value: f64, end_states: usize) -> Self {
        let mut theta = Self {
            value: 0.0,
            end_states,
        };
        theta.set(value);
        theta
    }

    pub fn value(self) -> f64 {
        self.value
    }

    pub fn end_states(self) -> usize {
        self.end_states
    }

    pub fn max(self) -> f64 {
        self.end_states as f64 + 1.0
    }

    /// Sets θ, clamping; returns `true` when the clamp was active.
    pub fn set(&mut self, value: f64) -> bool {
        let clamped = value.clamp(0.0, self.max());
        self.value = clamped;
        clamped != value
    }

    /// Moves θ by `delta`, clamping; returns `true` when the clamp was active.
    pub fn shift(&mut self, delta: f64) -> bool {
        self.set(self.value + delta)
    }
}

pub fn upper_reward(theta: Theta, s: StateClass) -> f64 {
    match s {
        StateClass::NonEnd => 0.0,
        StateClass::End(i) => {
            let i = i as f64;
            let t = theta.value;
            if t <= i {
                1.0
            } else if t >= i + 1.0 {
                0.0
            } else {
                i + 1.0 - t
            }
        }
    }
}

pub fn lower_reward(theta: Theta, s: StateClass) -> f64 {
    match s {
        StateClass::NonEnd => 0.0,
        StateClass::End(i) => {
            let i = i as f64;
            let t = theta.value;
            if t >= i + 1.0 {
                -1.0
            } else if t <= i {
                0.0
            } else {
                i - t
            }
        }
    }
}

pub fn shaped_reward(objective: Objective, theta: Theta, s: StateClass) -> f64 {
    match objective {
        Objective::Upper => upper_reward(theta, s),
        Objective::Lower => lower_reward(theta, s),
    }
}

/// `1` on end states `g_i` with `i ≥ k`, else `0`.
pub fn binary_upper_reward(k: usize, s: StateClass) -> f64 {
    match s {
        StateClass::End(i) if i >= k => 1.0,
        _ => 0.0,
    }
}

/// `−1` on end states strictly below `g_k`, else `0` (same scale as
/// [`lower_reward`], so the two agree at θ = k).
pub fn binary_lower_reward(k: usize, s: StateClass) -> f64 {
    match s {
        StateClass::End(i) if i < k => -1.0,
        _ => 0.0,
    }
}

pub fn binary_reward(objective: Objective, k: usize, s: StateClass) -> f64 {
    match objective {
        Objective::Upper => binary_upper_reward(k, s),
        Objective::Lower => binary_lower_reward(k, s),
    }
}

/// Shaped reward of every end state, indexed `i - 1`.
pub fn end_reward_vector(objective: Objective, theta: Theta) -> Vec<f64> {
    (1..=theta.end_states)
        .map(|i| shaped_reward(objective, theta, StateClass::End(i)))
        .collect()
}

/// Quantile index reported for a (converged) θ: `floor(θ)` clamped to `1..=n`.
pub fn quantile_from_theta(theta: Theta) -> usize {
    let n = theta.end_states.max(1);
    (theta.value.floor().max(1.0) as usize).min(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn th(v: f64) -> Theta {
        Theta::new(v, 5)
    }

    #[test]
    fn upper_reward_cases() {
        assert_eq!(upper_reward(th(2.0), StateClass::End(3)), 1.0);
        assert!((upper_reward(th(3.4), StateClass::End(3)) - 0.6).abs() < 1e-12);
        assert_eq!(upper_reward(th(5.0), StateClass::End(3)), 0.0);
        assert_eq!(upper_reward(th(2.5), StateClass::NonEnd), 0.0);
    }

    #[test]
    fn lower_reward_cases() {
        assert!((lower_reward(th(3.4), StateClass::End(3)) + 0.4).abs() < 1e-12);
        assert_eq!(lower_reward(th(1.0), StateClass::End(3)), 0.0);
        assert_eq!(lower_reward(th(5.0), StateClass::End(3)), -1.0);
        assert_eq!(lower_reward(th(4.5), StateClass::NonEnd), 0.0);
    }

    #[test]
    fn binary_cases() {
        assert_eq!(binary_upper_reward(2, StateClass::End(3)), 1.0);
        assert_eq!(binary_upper_reward(2, StateClass::End(1)), 0.0);
        assert_eq!(binary_lower_reward(3, StateClass::End(2)), -1.0);
        assert_eq!(binary_lower_reward(3, StateClass::End(3)), 0.0);
        assert_eq!(binary_lower_reward(3, StateClass::NonEnd), 0.0);
    }

    #[test]
    fn binary_forms_agree_at_integer_theta() {
        let n = 6;
        for k in 1..=n {
            for i in 1..=n {
                let s = StateClass::End(i);
                let t = Theta::new(k as f64, n);
                assert_eq!(binary_upper_reward(k, s), upper_reward(t, s));
                assert_eq!(binary_lower_reward(k, s), lower_reward(t, s));
            }
        }
    }

    #[test]
    fn theta_clamps() {
        let mut t = Theta::new(-3.0, 4);
        assert_eq!(t.value(), 0.0);
        assert!(t.shift(10.0));
        assert_eq!(t.value(), 5.0);
        assert!(!t.shift(-0.5));
        assert_eq!(t.value(), 4.5);
    }

    #[test]
    fn quantile_from_theta_cases() {
        assert_eq!(quantile_from_theta(Theta::new(4.0, 16)), 4);
        assert_eq!(quantile_from_theta(Theta::new(2.3, 2)), 2);
        assert_eq!(quantile_from_theta(Theta::new(0.2, 3)), 1);
        assert_eq!(quantile_from_theta(Theta::new(3.9, 3)), 3);
    }

    proptest! {
        #[test]
        fn upper_reward_monotone_in_index(t in 0.0f64..8.0, i in 1usize..7) {
            let theta = Theta::new(t, 7);
            prop_assert!(upper_reward(theta, StateClass::End(i)) <= upper_reward(theta, StateClass::End(i + 1)));
        }

        #[test]
        fn lower_is_upper_minus_one(t in 0.0f64..8.0, i in 1usize..=7) {
            let theta = Theta::new(t, 7);
            let s = StateClass::End(i);
            prop_assert!((lower_reward(theta, s) - (upper_reward(theta, s) - 1.0)).abs() <= 1e-12);
        }
    }
}
